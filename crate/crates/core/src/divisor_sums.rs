//! Twisted multiple divisor sums and their generating series.
//!
//! For weights k⃗, colors c⃗ and level N,
//!
//! ```text
//! σ_{k⃗,c⃗}(n) = Σ_{m_1 n_1 + … + m_a n_a = n, 0 < n_1 < … < n_a} ζ_N^{Σ c_i m_i} Π m_i^{k_i}
//! U_{k⃗;c⃗;N}(q) = Σ_{n ≥ 1} σ_{k⃗,c⃗}(n) q^n        (U = 1 at depth 0)
//! ```
//!
//! [`u_series`] expands the nested rational form built from Eulerian
//! polynomials; [`sigma_twisted`] enumerates partitions directly and serves
//! as its oracle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{zeta_power, CycNum};
use crate::error::{Error, Result};
use crate::kernel::{nested_sum, Filter};
use crate::qseries::QSeries;
use crate::rat::Rat;

pub use crate::kernel::eulerian_polynomial;

/// Names one series U_{k⃗;c⃗;N}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MDIndex {
    pub weights: Vec<u32>,
    pub colors: Vec<u32>,
    pub level: u32,
}

impl MDIndex {
    /// Colors are reduced modulo the level.
    pub fn new(weights: Vec<u32>, colors: Vec<i64>, level: u32) -> Result<MDIndex> {
        if level == 0 {
            return Err(Error::Invalid("level must be positive".into()));
        }
        if weights.len() != colors.len() {
            return Err(Error::Invalid(format!(
                "{} weights but {} colors",
                weights.len(),
                colors.len()
            )));
        }
        let colors = colors
            .iter()
            .map(|c| c.rem_euclid(level as i64) as u32)
            .collect();
        Ok(MDIndex {
            weights,
            colors,
            level,
        })
    }

    pub fn level_one(weights: &[u32]) -> MDIndex {
        MDIndex {
            weights: weights.to_vec(),
            colors: vec![0; weights.len()],
            level: 1,
        }
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    /// |k⃗| + depth.
    pub fn weight(&self) -> u32 {
        self.weights.iter().sum::<u32>() + self.depth() as u32
    }

    pub fn negate_colors(&self) -> MDIndex {
        let colors = self
            .colors
            .iter()
            .map(|&c| (self.level - c) % self.level)
            .collect();
        MDIndex {
            colors,
            ..self.clone()
        }
    }
}

impl fmt::Display for MDIndex {
    /// The CLI syntax `k1,k2;c1,c2;N`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        write!(
            f,
            "{};{};{}",
            join(&self.weights),
            join(&self.colors),
            self.level
        )
    }
}

impl FromStr for MDIndex {
    type Err = Error;

    /// Parses `k1,k2,...;c1,c2,...;N`. Missing colors default to zero and a
    /// missing level to 1.
    fn from_str(s: &str) -> Result<MDIndex> {
        let bad = |m: &str| Error::Parse(format!("index {s:?}: {m}"));
        let parts: Vec<&str> = s.trim().split(';').map(str::trim).collect();
        if parts.len() > 3 {
            return Err(bad("too many fields"));
        }
        let list = |p: &str| -> Result<Vec<i64>> {
            if p.is_empty() {
                return Ok(Vec::new());
            }
            p.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| bad("expected integers"))
                })
                .collect()
        };
        let weights = list(parts[0])?;
        if weights.iter().any(|&k| k < 0) {
            return Err(bad("weights must be nonnegative"));
        }
        let mut colors = list(parts.get(1).copied().unwrap_or(""))?;
        if colors.is_empty() {
            colors = vec![0; weights.len()];
        }
        let level = match parts.get(2) {
            Some(l) if !l.is_empty() => l.parse::<u32>().map_err(|_| bad("bad level"))?,
            _ => 1,
        };
        if level == 0 {
            return Err(bad("level must be positive"));
        }
        MDIndex::new(weights.iter().map(|&k| k as u32).collect(), colors, level)
            .map_err(|e| bad(&e.to_string()))
    }
}

type Visit<'a> = &'a mut dyn FnMut(&[(u64, u64)]);

fn enumerate_partitions(depth: usize, n: u64, visit: Visit<'_>) {
    fn rec(depth: usize, min_part: u64, rem: u64, acc: &mut Vec<(u64, u64)>, visit: Visit<'_>) {
        if acc.len() == depth {
            if rem == 0 {
                visit(acc);
            }
            return;
        }
        let left = (depth - acc.len()) as u64;
        // the remaining parts are distinct and at least min_part each
        if rem < left * min_part + left * (left - 1) / 2 {
            return;
        }
        for p in min_part..=rem {
            for m in 1..=rem / p {
                acc.push((p, m));
                rec(depth, p + 1, rem - m * p, acc, visit);
                acc.pop();
            }
        }
    }
    rec(depth, 1, n, &mut Vec::new(), visit);
}

/// σ_{k⃗,c⃗}(n) by direct enumeration of (part, multiplicity) choices.
pub fn sigma_twisted(idx: &MDIndex, n: u64) -> CycNum {
    let level = idx.level as usize;
    let mut ring = vec![BigInt::zero(); level];
    if idx.depth() == 0 {
        return CycNum::zero(idx.level);
    }
    enumerate_partitions(idx.depth(), n, &mut |parts| {
        let mut w = BigInt::one();
        let mut r = 0usize;
        for (j, &(_, m)) in parts.iter().enumerate() {
            w *= BigInt::from(m).pow(idx.weights[j]);
            r = (r + idx.colors[j] as usize * m as usize) % level;
        }
        ring[r] += w;
    });
    let terms: Vec<(i64, Rat)> = ring
        .into_iter()
        .enumerate()
        .map(|(r, v)| (r as i64, Rat::from_bigint(v)))
        .collect();
    CycNum::from_terms(idx.level, &terms)
}

/// Evaluation route for [`u_series_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UPath {
    /// Coefficient-wise via [`sigma_twisted`].
    Divisor,
    /// Expansion of the nested Eulerian rational form.
    Rational,
}

/// U_{k⃗;c⃗;N}(q) to order T via the rational form.
pub fn u_series(idx: &MDIndex, order: u64) -> QSeries {
    u_series_with(idx, order, UPath::Rational)
}

pub fn u_series_with(idx: &MDIndex, order: u64, path: UPath) -> QSeries {
    let t = order as usize;
    match path {
        UPath::Divisor => {
            let mut terms = Vec::new();
            if idx.depth() == 0 {
                terms.push((0, CycNum::one(idx.level)));
            } else {
                for n in 1..order {
                    terms.push((n, sigma_twisted(idx, n)));
                }
            }
            QSeries::from_terms(1, idx.level, order, terms)
        }
        UPath::Rational => {
            let letters: Vec<(u32, usize, Filter)> = idx
                .weights
                .iter()
                .zip(&idx.colors)
                .map(|(&k, &c)| (k, c as usize, Filter::None))
                .collect();
            let dense = nested_sum(&letters, idx.level as usize, t);
            QSeries::from_dense(1, idx.level, order, dense)
        }
    }
}

/// Which variable a [`RestrictedIndex`] constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Restrict {
    /// m_j mod N ∈ S_j.
    Multiplicity,
    /// n_j mod N ∈ S_j.
    PartSize,
}

/// Weights with a residue class set per position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RestrictedIndex {
    pub weights: Vec<u32>,
    pub classes: Vec<BTreeSet<u32>>,
    pub level: u32,
    pub on: Restrict,
}

impl RestrictedIndex {
    pub fn new(
        weights: Vec<u32>,
        classes: Vec<BTreeSet<u32>>,
        level: u32,
        on: Restrict,
    ) -> Result<RestrictedIndex> {
        if level == 0 || weights.len() != classes.len() {
            return Err(Error::Invalid("weights and classes must match".into()));
        }
        if classes
            .iter()
            .any(|s| s.is_empty() || s.iter().any(|&c| c >= level))
        {
            return Err(Error::Invalid(
                "each class set must be a nonempty set of residues".into(),
            ));
        }
        Ok(RestrictedIndex {
            weights,
            classes,
            level,
            on,
        })
    }

    fn mask(&self, j: usize) -> Vec<bool> {
        (0..self.level)
            .map(|r| self.classes[j].contains(&r))
            .collect()
    }
}

/// The restricted sums Σ Π m_j^{k_j} over solutions whose multiplicities
/// (or part sizes) lie in the prescribed classes. Integer coefficients.
pub fn u_series_restricted(idx: &RestrictedIndex, order: u64) -> QSeries {
    let letters: Vec<(u32, usize, Filter)> = idx
        .weights
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let f = match idx.on {
                Restrict::Multiplicity => Filter::Mult(idx.mask(j)),
                Restrict::PartSize => Filter::Part(idx.mask(j)),
            };
            (k, 0, f)
        })
        .collect();
    let dense = nested_sum(&letters, 1, order as usize);
    QSeries::from_dense(1, 1, order, dense)
}

/// Brute-force coefficient of [`u_series_restricted`].
pub fn sigma_restricted(idx: &RestrictedIndex, n: u64) -> BigInt {
    let mut total = BigInt::zero();
    let level = idx.level as u64;
    enumerate_partitions(idx.weights.len(), n, &mut |parts| {
        let ok = parts.iter().enumerate().all(|(j, &(p, m))| {
            let v = match idx.on {
                Restrict::Multiplicity => m,
                Restrict::PartSize => p,
            };
            idx.classes[j].contains(&((v % level) as u32))
        });
        if ok {
            let mut w = BigInt::one();
            for (j, &(_, m)) in parts.iter().enumerate() {
                w *= BigInt::from(m).pow(idx.weights[j]);
            }
            total += w;
        }
    });
    total
}

/// Σ_n Σ_{d | n, d mod N ∉ S} d^k q^n, the divisor form of Û_{(k),S,N}.
pub fn hat_u(k: u32, excluded: &BTreeSet<u32>, n: u32, order: u64) -> Result<QSeries> {
    if n == 0 || (0..n).all(|r| excluded.contains(&r)) {
        return Err(Error::Invalid("excluded set covers every residue".into()));
    }
    let t = order as usize;
    let mut c = vec![Rat::zero(); t];
    for d in 1..t {
        if excluded.contains(&((d % n as usize) as u32)) {
            continue;
        }
        let w = Rat::from_bigint(BigInt::from(d).pow(k));
        for mult in (d..t).step_by(d) {
            c[mult] += &w;
        }
    }
    Ok(QSeries::from_rats(1, order, c))
}

/// The literal color sum Σ_{j ∉ S} U_{(k);(j);N}(q).
pub fn hat_u_color_sum(k: u32, excluded: &BTreeSet<u32>, n: u32, order: u64) -> QSeries {
    let mut acc = QSeries::zero(1, n, order);
    for j in 0..n {
        if !excluded.contains(&j) {
            let idx = MDIndex::new(vec![k], vec![j as i64], n).unwrap();
            acc = acc.add(&u_series(&idx, order)).unwrap();
        }
    }
    acc
}

/// S_{a,b,N}(q) = Σ_{ℓ>0} ζ_N^{bℓ} Σ_{m>0, m ≡ a} q^{mℓ}, by direct summation.
pub fn s_series(a: i64, b: i64, n: u32, order: u64) -> QSeries {
    let nn = n as i64;
    let mut terms = Vec::new();
    for l in 1..order {
        let z = zeta_power(n, b * l as i64);
        for m in 1..order {
            if m * l >= order {
                break;
            }
            if (m as i64 - a).rem_euclid(nn) == 0 {
                terms.push((m * l, z.clone()));
            }
        }
    }
    QSeries::from_terms(1, n, order, terms)
}

/// S_{a,b,N} as (1/N) Σ_c ζ^{-ac} U_{(0);(c)}(ζ^{b a^{-1}} q), for gcd(a, N) = 1.
pub fn s_series_via_twist(a: i64, b: i64, n: u32, order: u64) -> Result<QSeries> {
    let nn = n as i64;
    let g = a.rem_euclid(nn).gcd(&nn);
    if g != 1 {
        return Err(Error::NotCoprime { t: a, n });
    }
    let a_inv = (1..=nn)
        .find(|x| (x * a).rem_euclid(nn) == 1 % nn)
        .unwrap_or(0);
    let mut acc = QSeries::zero(1, n, order);
    for c in 0..nn {
        let idx = MDIndex::new(vec![0], vec![c], n)?;
        let term = u_series(&idx, order).scale(&zeta_power(n, -a * c))?;
        acc = acc.add(&term)?;
    }
    acc.scale_rat(&Rat::new(1, nn)).twist(n, b * a_inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(s: &str) -> MDIndex {
        s.parse().unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(idx("1;0;1"), MDIndex::level_one(&[1]));
        assert_eq!(idx("1"), MDIndex::level_one(&[1]));
        assert_eq!(idx("0,0;1,-1;4").colors, vec![1, 3]);
        assert_eq!(idx("").depth(), 0);
        assert_eq!(idx(";;4").level, 4);
        assert!("1,2;0;3".parse::<MDIndex>().is_err());
        assert!("a".parse::<MDIndex>().is_err());
        assert!("1;0;0".parse::<MDIndex>().is_err());
        assert_eq!(idx("7,3;0,0;1").to_string(), "7,3;0,0;1");
        assert_eq!(idx("7,3").weight(), 12);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_twisted(&idx("1;0;1"), 6), CycNum::from_int(1, 12));
        assert_eq!(sigma_twisted(&idx("0;1;4"), 4), zeta_power(4, 1));
        assert_eq!(sigma_twisted(&idx("0,0;0,0;1"), 5), CycNum::from_int(1, 5));
        assert!(sigma_twisted(&idx("0,0,0"), 5).is_zero());
    }

    #[test]
    fn series_examples() {
        let s = u_series(&idx("1"), 5);
        assert_eq!(s, QSeries::from_ints(1, 5, &[0, 1, 3, 4, 7]));
        assert_eq!(u_series(&idx("0,0"), 6).coeff(5), CycNum::from_int(1, 5));
        assert_eq!(u_series(&idx(""), 7), QSeries::one(1, 1, 7));
        assert_eq!(u_series(&idx(";;3"), 7), QSeries::one(1, 3, 7));
    }

    #[test]
    fn paths_agree_small() {
        for s in ["2,1;1,2;3", "0,3;3,1;4", "1,1,0;0,1,2;5", "4;2;5"] {
            let i = idx(s);
            assert_eq!(
                u_series_with(&i, 25, UPath::Divisor),
                u_series(&i, 25),
                "{s}"
            );
        }
    }

    #[test]
    fn support_starts_at_triangle() {
        let s = u_series(&idx("0,1,2;1,1,1;3"), 12);
        assert!(s.terms().iter().all(|(e, _)| *e >= 6));
        assert!(!s.coeff(6).is_zero());
    }

    #[test]
    fn restricted() {
        let all: BTreeSet<u32> = (0..4).collect();
        let r = RestrictedIndex::new(vec![1], vec![all], 4, Restrict::Multiplicity).unwrap();
        assert_eq!(u_series_restricted(&r, 20), u_series(&idx("1"), 20));
        let zero: BTreeSet<u32> = [0].into();
        let r = RestrictedIndex::new(vec![1], vec![zero], 4, Restrict::Multiplicity).unwrap();
        assert_eq!(u_series_restricted(&r, 10).coeff(4), CycNum::from_int(1, 4));
        assert!(
            RestrictedIndex::new(vec![1], vec![BTreeSet::new()], 4, Restrict::PartSize).is_err()
        );
    }

    #[test]
    fn hat_examples() {
        let none = BTreeSet::new();
        assert_eq!(hat_u(1, &none, 3, 12).unwrap(), u_series(&idx("1"), 12));
        let evens: BTreeSet<u32> = [0].into();
        assert_eq!(
            hat_u(0, &evens, 2, 10).unwrap().coeff(4),
            CycNum::from_int(1, 1)
        );
        let ones: BTreeSet<u32> = [1].into();
        assert!(hat_u(2, &ones, 4, 10).unwrap().coeff(5).is_zero());
        assert!(hat_u(1, &[0, 1].into(), 2, 10).is_err());
    }

    #[test]
    fn s_examples() {
        assert_eq!(s_series(1, 0, 3, 5).coeff(1), CycNum::one(3));
        assert_eq!(s_series(0, 1, 2, 5).coeff(2), CycNum::from_int(2, -1));
        assert_eq!(s_series(1, 0, 1, 12), u_series(&idx("0"), 12));
        for n in [3u32, 4, 5, 7] {
            for a in 1..n as i64 {
                if a.gcd(&(n as i64)) != 1 {
                    assert!(s_series_via_twist(a, 1, n, 10).is_err());
                    continue;
                }
                for b in 0..n as i64 {
                    assert_eq!(
                        s_series_via_twist(a, b, n, 30).unwrap(),
                        s_series(a, b, n, 30)
                    );
                }
            }
        }
    }
}
