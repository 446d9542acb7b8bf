//! Classical q-series built without the divisor-sum machinery where
//! possible: eta and Δ from products, theta powers by counting lattice
//! points, the crank generating function from its triple product.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{zeta_power, CycNum};
use crate::divisor_sums::{u_series, MDIndex};
use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::rat::{bernoulli_numbers, binomial, Rat};

fn int_series(den: u32, order: u64, coeffs: &[i128]) -> QSeries {
    let rats = coeffs.iter().map(|&c| Rat::from_i128_int(c)).collect();
    QSeries::from_rats(den, order, rats)
}

fn dense_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let t = a.len().min(b.len());
    let mut out = vec![0i128; t];
    for (i, &x) in a.iter().enumerate().take(t) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(t - i) {
            out[i + j] = out[i + j]
                .checked_add(x.checked_mul(y).expect("coefficient overflow"))
                .expect("coefficient overflow");
        }
    }
    out
}

/// (q;q)_∞ coefficients from the pentagonal number theorem.
pub(crate) fn eta_coeffs(order: u64) -> Vec<i128> {
    let t = order as usize;
    let mut c = vec![0i128; t];
    for k in 0i64.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let a = (k * (3 * k - 1) / 2) as usize;
        let b = (k * (3 * k + 1) / 2) as usize;
        if a >= t {
            break;
        }
        c[a] += sign;
        if k > 0 && b < t {
            c[b] += sign;
        }
    }
    c
}

/// ∏_{n≥1} (1 - q^n), without the q^{1/24}.
pub fn eta_q24_free(order: u64) -> QSeries {
    int_series(1, order, &eta_coeffs(order))
}

/// P(q) = Σ p(n) q^n = 1/(q;q)_∞.
pub fn partition_series(order: u64) -> QSeries {
    let t = order as usize;
    let eta = eta_coeffs(order);
    let mut p = vec![0i128; t];
    if t > 0 {
        p[0] = 1;
    }
    for n in 1..t {
        let mut s = 0i128;
        for k in 1..=n {
            if eta[k] != 0 {
                s -= eta[k] * p[n - k];
            }
        }
        p[n] = s;
    }
    int_series(1, order, &p)
}

/// Δ = q ∏ (1 - q^n)^24 = Σ τ(n) q^n.
pub fn delta_series(order: u64) -> QSeries {
    int_series(1, order, &tau_values(order))
}

/// τ(n) for n < order (τ(0) = 0).
pub fn tau_values(order: u64) -> Vec<i128> {
    let t = order as usize;
    if t == 0 {
        return Vec::new();
    }
    let eta = eta_coeffs(order);
    let mut acc = vec![0i128; t];
    acc[0] = 1;
    let mut base = eta;
    let mut k = 24u32;
    while k > 0 {
        if k & 1 == 1 {
            acc = dense_mul(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = dense_mul(&base, &base);
        }
    }
    let mut out = vec![0i128; t];
    out[1..t].copy_from_slice(&acc[..t - 1]);
    out
}

/// E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) q^n for even k ≥ 2.
pub fn eisenstein_level_one(k: u32, order: u64) -> Result<QSeries> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::Invalid(format!("E_{k} needs even k >= 2")));
    }
    let b = &bernoulli_numbers(k as usize + 1)[k as usize];
    let scale = -(Rat::from_int(2 * k as i64) / b.clone());
    let s = u_series(&MDIndex::level_one(&[k - 1]), order).scale_rat(&scale);
    Ok(QSeries::one(1, 1, order).add(&s).unwrap())
}

/// Non-constant part of the level-N Eisenstein series, leading coefficient one:
///
/// ```text
/// G_{k,(a,b),N} = Σ_{ℓ>0} Σ_{m>0, m≡a} ℓ^{k-1} ζ^{bℓ} q^{mℓ/N}
///              + (-1)^k Σ_{ℓ>0} Σ_{m>0, m≡-a} ℓ^{k-1} ζ^{-bℓ} q^{mℓ/N}
/// ```
///
/// Exponents count units of q^{1/N}.
pub fn eisenstein_level_n_normalized(
    k: u32,
    a: i64,
    b: i64,
    n: u32,
    order: u64,
) -> Result<QSeries> {
    if k == 0 || n == 0 {
        return Err(Error::Invalid("need k >= 1 and N >= 1".into()));
    }
    let nn = n as i64;
    let mut dense = vec![CycNum::zero(n); order as usize];
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    for l in 1..order {
        let w = Rat::from_bigint(BigInt::from(l).pow(k - 1));
        for m in 1..order {
            let e = m * l;
            if e >= order {
                break;
            }
            let m = m as i64;
            if (m - a).rem_euclid(nn) == 0 {
                dense[e as usize] += &zeta_power(n, b * l as i64).scale(&w);
            }
            if (m + a).rem_euclid(nn) == 0 {
                dense[e as usize] +=
                    &zeta_power(n, -b * l as i64).scale(&(&w * &Rat::from_int(sign)));
            }
        }
    }
    Ok(QSeries::from_dense(n, n, order, dense))
}

/// E_{1,χ} = 1 - (2/B_{1,χ}) Σ_n (Σ_{d|n} χ(d)) q^n for an odd character
/// given by its values χ(0), …, χ(f-1).
pub fn eisenstein_chi(chi: &[i64], order: u64) -> Result<QSeries> {
    let f = chi.len() as i64;
    if f == 0 {
        return Err(Error::Invalid("empty character table".into()));
    }
    // B_{1,χ} = Σ_{a=1}^{f} χ(a) (a/f - 1/2)
    let b1: Rat = (1..=f)
        .map(|a| Rat::from_int(chi[(a % f) as usize]) * (Rat::new(a, f) - Rat::new(1, 2)))
        .sum();
    if b1.is_zero() {
        return Err(Error::Invalid("B_{1,χ} vanishes (even character)".into()));
    }
    let scale = -(Rat::from_int(2) / b1);
    let t = order as usize;
    let mut c = vec![Rat::zero(); t];
    if t > 0 {
        c[0] = Rat::one();
    }
    for d in 1..t {
        let v = chi[d % f as usize];
        if v == 0 {
            continue;
        }
        let w = &scale * &Rat::from_int(v);
        for m in (d..t).step_by(d) {
            c[m] += &w;
        }
    }
    Ok(QSeries::from_rats(1, order, c))
}

/// The character mod 4: 0, 1, 0, -1.
pub const CHI4: [i64; 4] = [0, 1, 0, -1];

/// r_d(n) = #{x ∈ Z^d : Σ x_i² = n} for n < order.
pub fn lattice_counts(dim: u32, order: u64) -> Vec<u64> {
    fn rec(dim: u32, rem_max: u64, sum: u64, out: &mut [u64]) {
        if dim == 0 {
            out[sum as usize] += 1;
            return;
        }
        let mut x: i64 = 0;
        while (x * x) as u64 + sum <= rem_max {
            let s = sum + (x * x) as u64;
            let mult = if x == 0 { 1 } else { 2 };
            for _ in 0..mult {
                rec(dim - 1, rem_max, s, out);
            }
            x += 1;
        }
    }
    let mut out = vec![0u64; order as usize];
    if order > 0 {
        rec(dim, order - 1, 0, &mut out);
    }
    out
}

/// θ^p(2z) = Σ r_p(n) q^n when `rescale` is 2; θ^p(z) = Σ r_p(n) q^{n/2}
/// (so `den = 2`) when `rescale` is 1.
pub fn theta_powers(power: u32, rescale: u32, order: u64) -> Result<QSeries> {
    if power == 0 || !(rescale == 1 || rescale == 2) {
        return Err(Error::Invalid(format!(
            "theta power {power}, rescale {rescale}"
        )));
    }
    let counts: Vec<i128> = lattice_counts(power, order)
        .into_iter()
        .map(i128::from)
        .collect();
    Ok(int_series(3 - rescale, order, &counts))
}

/// r_4(n) = 8 Σ_{d|n, 4∤d} d (with r_4(0) = 1).
pub fn r4_divisor_formula(order: u64) -> QSeries {
    let t = order as usize;
    let mut c = vec![0i128; t];
    if t > 0 {
        c[0] = 1;
    }
    for d in 1..t {
        if d % 4 != 0 {
            for m in (d..t).step_by(d) {
                c[m] += 8 * d as i128;
            }
        }
    }
    int_series(1, order, &c)
}

/// A series in q whose coefficients are Laurent polynomials in z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BivariateSeries {
    pub order: u64,
    /// z-exponent → coefficient series in q.
    pub terms: BTreeMap<i64, QSeries>,
}

impl BivariateSeries {
    pub fn coeff(&self, m: i64, n: u64) -> Rat {
        self.terms
            .get(&m)
            .map(|s| s.coeff(n).as_rat().cloned().unwrap_or_else(Rat::zero))
            .unwrap_or_else(Rat::zero)
    }
}

/// M(m, n) as a dense table indexed by (m + order, n).
fn crank_table(order: u64) -> Vec<Vec<i128>> {
    let t = order as usize;
    let w = 2 * t + 1;
    let mut a = vec![vec![0i128; t]; w];
    if t == 0 {
        return a;
    }
    a[t][0] = 1;
    // divide by (1 - z^s q^n) for s = ±1
    for n in 1..t {
        for s in [1i64, -1] {
            let rows: Vec<usize> = if s == 1 {
                (1..w).collect()
            } else {
                (0..w - 1).rev().collect()
            };
            for &m in &rows {
                let src = (m as i64 - s) as usize;
                for e in n..t {
                    let v = a[src][e - n];
                    if v != 0 {
                        a[m][e] = a[m][e].checked_add(v).expect("crank coefficient overflow");
                    }
                }
            }
        }
    }
    let eta = eta_coeffs(order);
    a.into_iter().map(|row| dense_mul(&row, &eta)).collect()
}

/// C(z, q) = (q;q)_∞ / ((zq;q)_∞ (z^{-1}q;q)_∞), coefficient of z^m q^n = M(m, n).
pub fn crank_bivariate(order: u64) -> BivariateSeries {
    let t = order as i64;
    let table = crank_table(order);
    let mut terms = BTreeMap::new();
    for (i, row) in table.iter().enumerate() {
        if row.iter().any(|&v| v != 0) {
            terms.insert(i as i64 - t, int_series(1, order, row));
        }
    }
    BivariateSeries { order, terms }
}

/// C_j(q) = Σ_n (Σ_m m^j M(m, n)) q^n for even j.
pub fn crank_moment_series(j: u32, order: u64) -> Result<QSeries> {
    if j % 2 == 1 {
        return Err(Error::Invalid(format!(
            "odd crank moment {j} vanishes identically"
        )));
    }
    let t = order as usize;
    let table = crank_table(order);
    let mut c = vec![BigInt::from(0); t];
    for (i, row) in table.iter().enumerate() {
        let m = BigInt::from(i as i64 - t as i64).pow(j);
        for (e, &v) in row.iter().enumerate() {
            if v != 0 {
                c[e] += &m * v;
            }
        }
    }
    Ok(QSeries::from_rats(
        1,
        order,
        c.into_iter().map(Rat::from_bigint).collect(),
    ))
}

fn crank_recurrence_with(a: u32, order: u64, shift: u32, factor: i64) -> Result<QSeries> {
    if a % 2 == 1 {
        return Err(Error::Invalid(format!(
            "odd crank moment {a} vanishes identically"
        )));
    }
    let p = partition_series(order);
    let u = |k: u32| u_series(&MDIndex::level_one(&[k]), order);
    let mut c: Vec<QSeries> = vec![p.clone()];
    for b in (2..=a).step_by(2) {
        let mut acc = u(b - 1 + shift).mul(&p)?.scale_rat(&Rat::from_int(2));
        for j in 1..b / 2 {
            let w =
                Rat::from_bigint(binomial(b as u64 - 1, 2 * j as u64 - 1)) * Rat::from_int(factor);
            let term = u(2 * j - 1 + shift)
                .mul(&c[(b / 2 - j) as usize])?
                .scale_rat(&w);
            acc = acc.add(&term)?;
        }
        c.push(acc);
    }
    Ok(c.pop().unwrap())
}

/// C_a by the moment recurrence
/// C_a = 2 Σ_{j=1}^{a/2-1} C(a-1, 2j-1) U_{(2j-1)} C_{a-2j} + 2 U_{(a-1)} P.
pub fn crank_moment_recurrence(a: u32, order: u64) -> Result<QSeries> {
    crank_recurrence_with(a, order, 0, 2)
}

/// The recurrence in its alternative indexing
/// Σ_{j=1}^{a/2-1} C(a-1, 2j-1) U_{(2j)} C_{a-2j} + 2 U_{(a)} P.
pub fn crank_moment_recurrence_shifted(a: u32, order: u64) -> Result<QSeries> {
    crank_recurrence_with(a, order, 1, 1)
}

/// Coefficient-wise sum of Galois conjugates; the result has rational coefficients.
pub fn galois_trace_series(f: &QSeries) -> QSeries {
    let mut c = vec![Rat::zero(); f.order() as usize];
    for (e, x) in f.terms() {
        c[*e as usize] = x.trace();
    }
    QSeries::from_rats(f.den(), f.order(), c)
}

/// p(n) by Euler's recurrence, an oracle independent of series inversion.
pub fn partition_numbers(count: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::from(0); count];
    if count == 0 {
        return p;
    }
    p[0] = BigInt::from(1);
    for n in 1..count {
        let mut s = BigInt::from(0);
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            s += &p[n - g1] * sign;
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= n {
                s += &p[n - g2] * sign;
            }
        }
        p[n] = s;
    }
    p
}

/// The integer coefficients of a level-one rational series, when integral.
pub fn integer_coeffs(f: &QSeries) -> Option<Vec<i128>> {
    f.to_bigints()?.iter().map(|b| b.to_i128()).collect()
}
