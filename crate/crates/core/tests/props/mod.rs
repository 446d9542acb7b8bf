//! Randomized invariants shared by the property tests and the acceptance run.

#![allow(dead_code)]

use num_integer::Integer;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use qmzv::divisor_sums::{u_series_with, UPath};
use qmzv::quasi_shuffle::{diamond, diamond_lin, hoffman_symmetric_sum_check, qshuffle_lin};
use qmzv::{
    qshuffle, u_series, zeta_power, CycNum, DMode, Letter, LinComb, MDIndex, QSeries, Rat, Word,
};

pub const SEED: u64 = 0x5eed_2024;
pub const CASES: u32 = 256;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

fn run<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(config());
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn rat() -> impl Strategy<Value = Rat> {
    (-40i64..40, 1i64..9).prop_map(|(n, d)| Rat::new(n, d))
}

fn big_rat() -> impl Strategy<Value = Rat> {
    (any::<i64>(), 1i64..i64::MAX).prop_map(|(n, d)| Rat::new(n, d))
}

fn cyc(level: u32) -> impl Strategy<Value = CycNum> {
    prop::collection::vec(rat(), level as usize).prop_map(move |v| {
        let terms: Vec<(i64, Rat)> = v
            .into_iter()
            .enumerate()
            .map(|(j, r)| (j as i64, r))
            .collect();
        CycNum::from_terms(level, &terms)
    })
}

fn series(den: u32, level: u32, order: u64) -> impl Strategy<Value = QSeries> {
    prop::collection::vec(
        prop_oneof![3 => Just(None), 2 => cyc(level).prop_map(Some)],
        order as usize,
    )
    .prop_map(move |v| {
        let zero = CycNum::zero(level);
        let dense = v
            .into_iter()
            .map(|c| c.unwrap_or_else(|| zero.clone()))
            .collect();
        QSeries::from_dense(den, level, order, dense)
    })
}

fn series_triple() -> impl Strategy<Value = (QSeries, QSeries, QSeries)> {
    (1u32..=3, 1u32..=6, 1u64..=14)
        .prop_flat_map(|(d, n, t)| (series(d, n, t), series(d, n, t), series(d, n, t)))
}

fn letter(level: u32, max_a: u32) -> impl Strategy<Value = Letter> {
    (1..=max_a, 0..level as i64).prop_map(move |(a, c)| Letter::new(a, c, level).unwrap())
}

fn word(level: u32, depth: usize, max_a: u32) -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(level, max_a), 0..=depth)
        .prop_map(move |ls| Word::new(level, ls).unwrap())
}

fn index() -> impl Strategy<Value = MDIndex> {
    (1u32..=5, 1usize..=2)
        .prop_flat_map(|(n, a)| {
            (
                Just(n),
                prop::collection::vec(0u32..=4, a),
                prop::collection::vec(0..n as i64, a),
            )
        })
        .prop_filter("|k| <= 4", |(_, k, _)| k.iter().sum::<u32>() <= 4)
        .prop_map(|(n, k, c)| MDIndex::new(k, c, n).unwrap())
}

fn check(ok: bool, what: &str) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what.to_string()))
    }
}

pub fn rat_field() -> Result<(), String> {
    run(
        "rat field",
        (big_rat(), big_rat(), big_rat()),
        |(x, y, z)| {
            let b = |r: &Rat| r.to_big();
            check((&x + &y).to_big() == b(&x) + b(&y), "sum")?;
            check((&x * &y).to_big() == b(&x) * b(&y), "product")?;
            check(&(&x * &y) * &z == &x * &(&y * &z), "mul assoc")?;
            check(&x * &(&y + &z) == &(&x * &y) + &(&x * &z), "distributive")?;
            if !x.is_zero() {
                check(&x * &x.recip() == Rat::one(), "inverse")?;
            }
            Ok(())
        },
    )
}

pub fn cyclotomic_field() -> Result<(), String> {
    let s = (1u32..=12).prop_flat_map(|n| (cyc(n), cyc(n), cyc(n)));
    run("cyclotomic field", s, |(x, y, z)| {
        let n = x.level();
        check(&(&x + &y) + &z == &x + &(&y + &z), "add assoc")?;
        check(&x + &y == &y + &x, "add comm")?;
        check(&(&x * &y) * &z == &x * &(&y * &z), "mul assoc")?;
        check(&x * &y == &y * &x, "mul comm")?;
        check(&x * &(&y + &z) == &(&x * &y) + &(&x * &z), "distributive")?;
        check((&x + &(-&x)).is_zero(), "additive inverse")?;
        check(&CycNum::one(n) * &x == x, "unit")?;
        if !x.is_zero() {
            check((&x * &x.inv()).is_one(), "multiplicative inverse")?;
        }
        Ok(())
    })
}

pub fn orthogonality() -> Result<(), String> {
    run("orthogonality", (1u32..=24, 0i64..80), |(n, m)| {
        let mut s = CycNum::zero(n);
        for j in 0..n as i64 {
            s += &zeta_power(n, j * m);
        }
        let want = if m.is_multiple_of(&(n as i64)) {
            n as i64
        } else {
            0
        };
        check(s == CycNum::from_int(n, want), "Σ ζ^{jm}")
    })
}

pub fn series_ring() -> Result<(), String> {
    run("series ring", series_triple(), |(f, g, h)| {
        let mul = |a: &QSeries, b: &QSeries| a.mul(b).unwrap();
        let add = |a: &QSeries, b: &QSeries| a.add(b).unwrap();
        check(mul(&mul(&f, &g), &h) == mul(&f, &mul(&g, &h)), "mul assoc")?;
        check(mul(&f, &g) == mul(&g, &f), "mul comm")?;
        check(
            mul(&f, &add(&g, &h)) == add(&mul(&f, &g), &mul(&f, &h)),
            "distributive",
        )?;
        check(add(&f, &f.neg()).is_zero(), "additive inverse")?;
        if !f.coeff(0).is_zero() {
            let one = QSeries::one(f.den(), f.cyclo(), f.order());
            check(mul(&f, &f.invert().unwrap()) == one, "inverse")?;
        }
        Ok(())
    })
}

pub fn twist_and_derivation() -> Result<(), String> {
    let s = (series_triple(), 0i64..12, 1i64..40);
    run("twist and derivation", s, |((f, g, _), j, t)| {
        let mul = |a: &QSeries, b: &QSeries| a.mul(b).unwrap();
        for mode in [DMode::Standard, DMode::LevelN] {
            let lhs = mul(&f, &g).d_operator(mode);
            let rhs = mul(&f.d_operator(mode), &g)
                .add(&mul(&f, &g.d_operator(mode)))
                .unwrap();
            check(lhs == rhs, "Leibniz rule")?;
        }
        let n = f.cyclo();
        let tw = |a: &QSeries, j: i64| a.twist(n, j).unwrap();
        check(
            tw(&mul(&f, &g), j) == mul(&tw(&f, j), &tw(&g, j)),
            "twist is multiplicative",
        )?;
        check(tw(&tw(&f, j), -j) == f, "twist inverse")?;
        check(
            tw(&f.d_operator(DMode::LevelN), j) == tw(&f, j).d_operator(DMode::LevelN),
            "twist commutes with D",
        )?;
        if t.gcd(&(n as i64)) == 1 {
            let ga = |a: &QSeries| a.galois_apply(t).unwrap();
            check(
                ga(&mul(&f, &g)) == mul(&ga(&f), &ga(&g)),
                "Galois action is multiplicative",
            )?;
        }
        Ok(())
    })
}

pub fn diamond_laws() -> Result<(), String> {
    let s = (1u32..=6).prop_flat_map(|n| (letter(n, 4), letter(n, 4), letter(n, 4)));
    run("diamond", s, |(x, y, z)| {
        check(
            diamond(x, y).unwrap() == diamond(y, x).unwrap(),
            "commutative",
        )?;
        let lz = LinComb::letter(z);
        let lx = LinComb::letter(x);
        let left = diamond_lin(&diamond(x, y).unwrap(), &lz).unwrap();
        let right = diamond_lin(&lx, &diamond(y, z).unwrap()).unwrap();
        check(left == right, "associative")
    })
}

pub fn shuffle_laws() -> Result<(), String> {
    let s = (1u32..=4).prop_flat_map(|n| (word(n, 2, 3), word(n, 2, 3), word(n, 2, 3)));
    run("quasi-shuffle", s, |(u, v, w)| {
        check(
            qshuffle(&u, &v).unwrap() == qshuffle(&v, &u).unwrap(),
            "commutative",
        )?;
        let left = qshuffle_lin(&qshuffle(&u, &v).unwrap(), &LinComb::word(w.clone())).unwrap();
        let right = qshuffle_lin(&LinComb::word(u.clone()), &qshuffle(&v, &w).unwrap()).unwrap();
        check(left == right, "associative")?;
        check(
            qshuffle(&Word::empty(u.level()), &u).unwrap() == LinComb::word(u.clone()),
            "unit",
        )
    })
}

pub fn hoffman() -> Result<(), String> {
    let s = (1u32..=4).prop_flat_map(|n| prop::collection::vec(letter(n, 3), 1..=3));
    run("symmetric sums", s, |ls| {
        check(
            hoffman_symmetric_sum_check(&ls).unwrap(),
            "symmetric-sum formula",
        )
    })
}

pub fn divisor_oracles() -> Result<(), String> {
    run("divisor-sum oracles", index(), |idx| {
        let t = 40;
        let fast = u_series(&idx, t);
        check(
            fast == u_series_with(&idx, t, UPath::Divisor),
            "rational and divisor paths",
        )?;
        let conj = u_series(&idx.negate_colors(), t);
        check(conj == fast.galois_apply(-1).unwrap(), "conjugation")?;
        let plain = MDIndex::new(idx.weights.clone(), vec![0; idx.depth()], idx.level).unwrap();
        let one = u_series(&MDIndex::level_one(&idx.weights), t)
            .embed(idx.level)
            .unwrap();
        check(u_series(&plain, t) == one, "color-zero collapse")?;
        let a = idx.depth() as u64;
        let first = a * (a + 1) / 2;
        check(
            (0..first).all(|e| fast.coeff(e).is_zero()),
            "support starts at a(a+1)/2",
        )?;
        let c: i64 = idx.colors.iter().map(|&c| c as i64).sum();
        check(
            fast.coeff(first) == zeta_power(idx.level, c),
            "leading coefficient",
        )
    })
}

pub type Suite = (&'static str, fn() -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("rationals", rat_field),
    ("cyclotomic field", cyclotomic_field),
    ("orthogonality", orthogonality),
    ("series ring", series_ring),
    ("twist and derivation", twist_and_derivation),
    ("diamond", diamond_laws),
    ("quasi-shuffle", shuffle_laws),
    ("symmetric sums", hoffman),
    ("divisor-sum oracles", divisor_oracles),
];
