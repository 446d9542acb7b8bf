//! Acceptance run: one line per criterion.
//!
//! Criteria that cannot hold as stated are still evaluated literally and
//! reported as FAIL. The process exits nonzero if a criterion passes or fails
//! differently from the recorded analysis.

mod props;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::thread;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use qmzv::classical::{
    crank_bivariate, crank_moment_series, delta_series, r4_divisor_formula, tau_values,
};
use qmzv::harness::{
    lehmer_scan, prime_vanishing_report, primes_up_to, verify, IdentityReport, PrimeReport, Status,
};
use qmzv::quasi_shuffle::{depth_one_product, homomorphism_grid, lambda_coeff, omega, words_up_to};
use qmzv::rat::bernoulli_numbers;
use qmzv::{bracket, qshuffle, u_series, CycNum, LinComb, MDIndex, QSeries, Rat};

/// Criteria whose literal statement is known not to hold.
const RED: &[usize] = &[8, 9, 11];

struct Outcome {
    pass: bool,
    /// The outcome agrees with the recorded analysis.
    analyzed: bool,
    detail: String,
}

impl Outcome {
    fn green(pass: bool, detail: String) -> Outcome {
        Outcome {
            pass,
            analyzed: pass,
            detail,
        }
    }
}

fn report(id: &str, order: u64) -> IdentityReport {
    verify(id, order).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn describe(r: &IdentityReport) -> String {
    match r.mismatches.first() {
        None => format!("{} {}", r.id, r.status),
        Some(m) => {
            let at = if m.den == 1 {
                format!("q^{}", m.num)
            } else {
                format!("q^({}/{})", m.num, m.den)
            };
            format!(
                "{} {} ({} mismatches, first at {at}: {} vs {})",
                r.id, r.status, r.mismatch_count, m.lhs, m.rhs
            )
        }
    }
}

fn first_at(r: &IdentityReport, num: u64, lhs: i64, rhs: i64) -> bool {
    r.mismatches.first().is_some_and(|m| {
        let level = m.lhs.level();
        m.num == num
            && m.den == 1
            && m.lhs == CycNum::from_int(level, lhs)
            && m.rhs == CycNum::from_int(level, rhs)
    })
}

fn int(r: &Rat) -> i128 {
    r.to_bigint()
        .and_then(|b| b.to_i128())
        .expect("integer coefficient")
}

fn coeff_int(f: &QSeries, e: u64) -> i128 {
    int(f.coeff(e).as_rat().expect("rational coefficient"))
}

fn c1() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 1..=4 {
        let g = homomorphism_grid(2, 4, n, 40).unwrap();
        pass &= g.failures.is_empty();
        parts.push(format!(
            "N={n}: {} words, {} pairs, {} failures",
            g.words,
            g.pairs,
            g.failures.len()
        ));
    }
    // spot check against the plain definition
    let words = words_up_to(2, 4, 3);
    let mut spot = 0;
    for (i, w) in words.iter().enumerate().step_by(17) {
        let v = &words[(i * 7 + 3) % words.len()];
        let lhs = bracket(&qshuffle(w, v).unwrap(), 40);
        let rhs = bracket(&LinComb::word(w.clone()), 40)
            .mul(&bracket(&LinComb::word(v.clone()), 40))
            .unwrap();
        pass &= lhs == rhs;
        spot += 1;
    }
    parts.push(format!("{spot} direct spot checks at N=3"));
    Outcome::green(pass, parts.join("; "))
}

fn c2() -> Outcome {
    let t = 40;
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 1..=5u32 {
        for s in 0..=4u32 {
            for tt in 0..=4u32 {
                for c in 0..n as i64 {
                    for d in 0..n as i64 {
                        let rhs = depth_one_product(s, tt, c, d, n).unwrap().evaluate(t);
                        let a = u_series(&MDIndex::new(vec![s], vec![c], n).unwrap(), t);
                        let b = u_series(&MDIndex::new(vec![tt], vec![d], n).unwrap(), t);
                        cases += 1;
                        if a.mul(&b).unwrap() != rhs {
                            bad.push(format!("N={n} s={s} t={tt} c={c} d={d}"));
                        }
                    }
                }
            }
        }
    }
    Outcome::green(
        bad.is_empty(),
        format!(
            "{cases} products to order {t}, {} mismatches {:?}",
            bad.len(),
            bad
        ),
    )
}

fn c3() -> Outcome {
    let mut checks = 0;
    let mut pass = true;
    for level in 1..=8u32 {
        for c in 0..level as i64 {
            for n in 1..=10u32 {
                let a = omega(n, c, level);
                let b = omega(n, -c, level);
                pass &= a == if n % 2 == 1 { b } else { -b };
                checks += 1;
            }
        }
    }
    let bern = bernoulli_numbers(14);
    for n in 0..=12u32 {
        let want = &bern[n as usize + 1] / &Rat::from_int(n as i64 + 1);
        pass &= omega(n, 0, 1).as_rat() == Some(&want);
        checks += 1;
    }
    pass &= omega(1, 0, 1) == CycNum::from_rat(1, Rat::new(1, 12));
    pass &= lambda_coeff(1, 2, 0, 1, 1).unwrap() == CycNum::from_rat(1, Rat::new(-1, 12));
    Outcome::green(
        pass,
        format!("{checks} exact checks of parity and the level-one Bernoulli values"),
    )
}

/// τ(n) for n < count from q Π (1 − qⁿ)²⁴ by repeated multiplication.
fn tau_oracle(count: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); count];
    p[0] = BigInt::from(1);
    for n in 1..count {
        for _ in 0..24 {
            for e in (n..count).rev() {
                let x = p[e - n].clone();
                p[e] -= x;
            }
        }
    }
    let mut tau = vec![BigInt::zero(); count];
    tau[1..count].clone_from_slice(&p[..count - 1]);
    tau
}

fn c4() -> Outcome {
    let t = 151;
    let a = report("delta-convolution", t);
    let b = report("delta-linear", t);
    let u = |k: u32| u_series(&MDIndex::level_one(&[k]), t);
    let sc = |f: &QSeries, x: i64, y: i64| f.scale_rat(&Rat::new(x, y));
    let extracted = [
        sc(&u(3).mul(&u(7)).unwrap(), 200, 3),
        sc(&u(5).mul(&u(5)).unwrap(), -147, 1),
        sc(&u(7), 5, 18),
        sc(&u(5), 7, 12),
        sc(&u(3), 5, 36),
    ]
    .iter()
    .fold(QSeries::zero(1, 1, t), |acc, f| acc.add(f).unwrap());
    let oracle = tau_oracle(t as usize);
    let lib = tau_values(t);
    let delta = delta_series(t);
    let mut pass = a.status == Status::Pass && b.status == Status::Pass;
    for n in 1..t {
        let want = &oracle[n as usize];
        pass &= BigInt::from(coeff_int(&extracted, n)) == *want;
        pass &= BigInt::from(lib[n as usize]) == *want;
        pass &= BigInt::from(coeff_int(&delta, n)) == *want;
    }
    let tau2 = coeff_int(&extracted, 2);
    pass &= tau2 == -24;
    Outcome::green(
        pass,
        format!(
            "{}; {}; extracted τ(n) = oracle for n ≤ 150; τ(2) = {tau2}",
            describe(&a),
            describe(&b)
        ),
    )
}

fn c5() -> Outcome {
    let r = report("ag-derivative", 100);
    Outcome::green(
        r.status == Status::Pass,
        format!("{} at order 100", describe(&r)),
    )
}

fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in (1..=max.min(n)).rev() {
        for mut rest in partitions(n - p, p) {
            rest.insert(0, p);
            out.push(rest);
        }
    }
    out
}

/// Σ crank(λ)² over partitions of n ≥ 2.
fn crank_second_moment(n: u32) -> i64 {
    partitions(n, n)
        .iter()
        .map(|lam| {
            let ones = lam.iter().filter(|&&x| x == 1).count() as i64;
            let crank = if ones == 0 {
                lam[0] as i64
            } else {
                lam.iter().filter(|&&x| x as i64 > ones).count() as i64 - ones
            };
            crank * crank
        })
        .sum()
}

fn c6() -> Outcome {
    let ids = [
        "crank-c4",
        "crank-c6",
        "crank-c4-linear",
        "crank-c6-linear",
        "crank-dc2-linear",
    ];
    let reps: Vec<_> = ids.iter().map(|id| report(id, 100)).collect();
    let mut pass = reps.iter().all(|r| r.status == Status::Pass);
    let biv = crank_bivariate(20);
    let m2 = |n: u64| -> Rat {
        (-(n as i64)..=n as i64).fold(Rat::zero(), |acc, m| {
            &acc + &(&Rat::from_int(m * m) * &biv.coeff(m, n))
        })
    };
    let c2 = crank_moment_series(2, 20).unwrap();
    let (a, b) = (m2(1), m2(2));
    pass &= a == Rat::from_int(2) && b == Rat::from_int(8);
    for n in 1..20u64 {
        pass &= c2.coeff(n).as_rat() == Some(&m2(n));
        if n >= 2 {
            pass &= m2(n) == Rat::from_int(crank_second_moment(n as u32));
        }
    }
    let names: Vec<String> = reps.iter().map(describe).collect();
    Outcome::green(
        pass,
        format!("{}; M_2(1) = {a}, M_2(2) = {b}", names.join(", ")),
    )
}

fn c7() -> Outcome {
    let reps: Vec<_> = ["rhoades-1", "rhoades-2", "rhoades-3"]
        .iter()
        .map(|id| report(id, 80))
        .collect();
    let pass = reps.iter().all(|r| r.status == Status::Pass);
    Outcome::green(
        pass,
        reps.iter().map(describe).collect::<Vec<_>>().join(", ") + " at order 80",
    )
}

fn c8() -> Outcome {
    let sym = report("eisenstein-sym", 60);
    let w1 = report("weight-one-construction", 60);
    let fixed = report("weight-one-construction-corrected", 60);
    let pass = sym.status == Status::Pass && w1.status == Status::Pass;
    let analyzed =
        sym.status == Status::Pass && w1.status == Status::Fail && fixed.status == Status::Pass;
    Outcome {
        pass,
        analyzed,
        detail: format!(
            "{} ({} cases); {}; {}",
            describe(&sym),
            sym.cases,
            describe(&w1),
            describe(&fixed)
        ),
    }
}

fn r4_oracle(count: usize) -> Vec<i64> {
    let mut r = vec![0i64; count];
    let m = (count as f64).sqrt() as i64 + 1;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                for d in -m..=m {
                    let n = (a * a + b * b + c * c + d * d) as usize;
                    if n < count {
                        r[n] += 1;
                    }
                }
            }
        }
    }
    r
}

fn c9() -> Outcome {
    let t = 100;
    let t2 = report("theta2-level4", t);
    let t4 = report("theta4-level4", t);
    let sh = report("theta4-shuffle", t);
    let shc = report("theta4-shuffle-corrected", t);
    let r4 = report("r4-closed-form", 201);
    let l2 = report("theta4-level2", t);
    let l2c = report("theta4-level2-corrected", t);
    let oracle = r4_oracle(201);
    let formula = r4_divisor_formula(201);
    let lattice = (1..=200u64).all(|n| coeff_int(&formula, n) == oracle[n as usize] as i128);
    let l2_ok = l2.status == Status::Fail && first_at(&l2, 1, 8, 4) && l2c.status == Status::Pass;
    let rest = t2.status == Status::Pass
        && t4.status == Status::Pass
        && r4.status == Status::Pass
        && lattice;
    let pass = rest && sh.status == Status::Pass && l2_ok;
    let analyzed = rest
        && l2_ok
        && sh.status == Status::Fail
        && first_at(&sh, 3, 32, -64)
        && shc.status == Status::Pass;
    let detail = [
        describe(&t2),
        describe(&t4),
        describe(&sh),
        describe(&shc),
        format!(
            "{} to n = 200, lattice oracle {}",
            describe(&r4),
            if lattice { "agrees" } else { "DISAGREES" }
        ),
        describe(&l2),
        describe(&l2c),
    ]
    .join("; ");
    Outcome {
        pass,
        analyzed,
        detail,
    }
}

fn c10() -> Outcome {
    let reps = [
        report("partition-sum", 80),
        report("ono-singh-1-k0", 60),
        report("ono-singh-1-k1", 60),
        report("ono-singh-2-k0", 60),
        report("ono-singh-2-k1", 60),
    ];
    let pass = reps.iter().all(|r| r.status == Status::Pass);
    Outcome::green(
        pass,
        reps.iter()
            .map(|r| format!("{} @{}", describe(r), r.order))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn c11() -> Outcome {
    let nmax = 1500;
    let primes: Vec<u64> = primes_up_to(nmax);
    let set = |s: &[u32]| s.iter().copied().collect::<BTreeSet<u32>>();
    let mut parts = Vec::new();
    let mut first = true;
    for (k, l) in [(1, 3), (3, 5)] {
        let r = prime_vanishing_report(k, l, 1, &set(&[]), false, nmax).unwrap();
        let ok = r.vanishing == primes;
        first &= ok;
        parts.push(format!("f_{{{k},{l}}} zeros = primes: {ok}"));
    }
    let mut second = true;
    for n in [3u32, 4, 5] {
        let r = prime_vanishing_report(1, 3, n, &set(&[1]), true, nmax).unwrap();
        let want: Vec<u64> = primes
            .iter()
            .copied()
            .filter(|p| p % n as u64 == 1)
            .collect();
        let ok = r.vanishing == want;
        second &= ok;
        parts.push(format!("N={n} S={{1}} zeros = primes ≡ 1: {ok}"));
    }
    let mut third = true;
    let mut third_analyzed = true;
    for n in [3u32, 4, 5] {
        for c in 2..n {
            let r: PrimeReport = prime_vanishing_report(1, 3, n, &set(&[c]), false, nmax).unwrap();
            third &= r.exact_match.is_some();
            third_analyzed &= r.exact_match.is_none()
                && r.prime_match.as_deref() == Some(&*format!("primes ≢ S mod {n}"))
                && !r.composite_zeros.is_empty();
            let comp: Vec<u64> = r.composite_zeros.iter().copied().take(4).collect();
            parts.push(format!(
                "N={n} S={{{c}}} matched set: {}, on primes: {}, composite zeros {comp:?}",
                r.exact_match.as_deref().unwrap_or("none"),
                r.prime_match.as_deref().unwrap_or("none"),
            ));
        }
    }
    Outcome {
        pass: first && second && third,
        analyzed: first && second && !third && third_analyzed,
        detail: parts.join("; "),
    }
}

fn c12() -> Outcome {
    let rows = lehmer_scan(500).unwrap();
    let oracle = tau_oracle(501);
    let never_equal = rows.iter().all(|r| !r.equal);
    let consistent = rows.iter().all(|r| {
        r.consistent && (&r.lhs - &r.rhs).to_bigint().as_ref() == Some(&oracle[r.p as usize])
    });
    Outcome::green(
        never_equal && consistent,
        format!("{} primes, equal=false everywhere: {never_equal}, lhs − Q(p) = τ(p) everywhere: {consistent}", rows.len()),
    )
}

fn c13() -> Outcome {
    let mut failures = Vec::new();
    for (name, suite) in props::SUITES {
        if let Err(e) = suite() {
            failures.push(format!("{name}: {e}"));
        }
    }
    let detail = if failures.is_empty() {
        format!(
            "{} suites × {} cases, seed {:#x}",
            props::SUITES.len(),
            props::CASES,
            props::SEED
        )
    } else {
        failures.join("; ")
    };
    Outcome::green(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 13] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13];
    let outcomes: BTreeMap<usize, Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .enumerate()
            .map(|(i, f)| (i + 1, s.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(i, h)| (i, h.join().expect("criterion panicked")))
            .collect()
    });
    let mut unexpected = Vec::new();
    for (i, o) in &outcomes {
        println!(
            "criterion {i:>2}: {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        let expected_red = RED.contains(i);
        if !o.analyzed || o.pass == expected_red {
            unexpected.push(*i);
        }
    }
    let passed = outcomes.values().filter(|o| o.pass).count();
    println!("acceptance: {passed}/13 criteria pass");
    if unexpected.is_empty() {
        println!("failing criteria {RED:?} fail exactly as analyzed");
        ExitCode::SUCCESS
    } else {
        println!("criteria {unexpected:?} differ from the recorded analysis");
        ExitCode::FAILURE
    }
}
