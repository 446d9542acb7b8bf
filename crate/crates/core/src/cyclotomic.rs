//! The cyclotomic fields Q(ζ_N).
//!
//! An element is stored by its coordinates in the power basis
//! 1, ζ, …, ζ^{φ(N)-1}, always reduced modulo Φ_N, so two elements are equal
//! exactly when their coordinates are.
//!
//! - [`cyclotomic_polynomial`]: integer coefficients of Φ_N
//! - [`CycNum`]: an element of Q(ζ_N) with field operations
//! - [`zeta_power`], [`CycNum::embed`], [`CycNum::galois_apply`]

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rat::Rat;

pub(crate) type Coords = SmallVec<[Rat; 4]>;

/// Coefficients of Φ_N, lowest degree first.
///
/// Computed by exact division of x^N - 1 by Φ_d for the proper divisors d.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n >= 1, "cyclotomic_polynomial: N must be positive");
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let lead = den[dn];
    let mut q = vec![0i64; rem.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn] / lead;
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
}

/// Precomputed data for one level: x^j mod Φ_N for every j < max(N, 2φ).
pub(crate) struct CycloField {
    pub n: u32,
    pub phi: usize,
    pub powers: Vec<Vec<i64>>,
}

impl CycloField {
    fn build(n: u32) -> CycloField {
        let phi_poly = cyclotomic_polynomial(n);
        let phi = phi_poly.len() - 1;
        let len = (n as usize).max(2 * phi);
        let mut powers = Vec::with_capacity(len);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..len {
            powers.push(cur.clone());
            // multiply by x and reduce with the monic Φ_N
            let top = cur[phi - 1];
            let mut next = vec![0i64; phi];
            for i in (1..phi).rev() {
                next[i] = cur[i - 1];
            }
            for i in 0..phi {
                next[i] -= top * phi_poly[i];
            }
            cur = next;
        }
        CycloField { n, phi, powers }
    }

    fn power(&self, j: i64) -> &[i64] {
        &self.powers[j.rem_euclid(self.n as i64) as usize]
    }
}

const FAST: usize = 64;

pub(crate) fn field(n: u32) -> &'static CycloField {
    static SMALL: [OnceLock<CycloField>; FAST] = [const { OnceLock::new() }; FAST];
    static LARGE: OnceLock<Mutex<HashMap<u32, &'static CycloField>>> = OnceLock::new();
    assert!(n >= 1, "level must be positive");
    if (n as usize) < FAST {
        return SMALL[n as usize].get_or_init(|| CycloField::build(n));
    }
    let mut map = LARGE.get_or_init(Default::default).lock().unwrap();
    map.entry(n)
        .or_insert_with(|| Box::leak(Box::new(CycloField::build(n))))
}

/// An exact element of Q(ζ_N).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    level: u32,
    coeffs: Coords,
}

impl CycNum {
    pub fn zero(level: u32) -> CycNum {
        let phi = field(level).phi;
        CycNum {
            level,
            coeffs: (0..phi).map(|_| Rat::zero()).collect(),
        }
    }

    pub fn one(level: u32) -> CycNum {
        CycNum::from_rat(level, Rat::one())
    }

    pub fn from_rat(level: u32, r: Rat) -> CycNum {
        let mut z = CycNum::zero(level);
        z.coeffs[0] = r;
        z
    }

    pub fn from_int(level: u32, n: i64) -> CycNum {
        CycNum::from_rat(level, Rat::from_int(n))
    }

    /// Builds an element from power-basis coordinates. Coordinates at or
    /// beyond φ(N) are reduced, so any exponents are accepted.
    pub fn from_terms(level: u32, terms: &[(i64, Rat)]) -> CycNum {
        let f = field(level);
        let mut z = CycNum::zero(level);
        for (j, r) in terms {
            z.add_scaled_power(f, *j, r);
        }
        z
    }

    fn add_scaled_power(&mut self, f: &CycloField, j: i64, r: &Rat) {
        if r.is_zero() {
            return;
        }
        for (i, &c) in f.power(j).iter().enumerate() {
            if c != 0 {
                self.coeffs[i] += &(r * &Rat::from_int(c));
            }
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Power-basis coordinates, length φ(N).
    pub fn coords(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Rat::is_zero)
    }

    /// The rational value, when the element lies in Q.
    pub fn as_rat(&self) -> Option<&Rat> {
        self.coeffs[1..]
            .iter()
            .all(Rat::is_zero)
            .then(|| &self.coeffs[0])
    }

    fn check(&self, other: &CycNum) {
        assert!(
            self.level == other.level,
            "cyclotomic level mismatch: {} vs {} (embed explicitly)",
            self.level,
            other.level
        );
    }

    pub fn try_add(&self, other: &CycNum) -> Result<CycNum> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &CycNum) -> Result<CycNum> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(self * other)
    }

    pub fn scale(&self, r: &Rat) -> CycNum {
        CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplies by ζ_N^j.
    pub fn mul_zeta(&self, j: i64) -> CycNum {
        let f = field(self.level);
        let mut out = CycNum::zero(self.level);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.add_scaled_power(f, i as i64 + j, c);
        }
        out
    }

    pub fn inv(&self) -> CycNum {
        assert!(!self.is_zero(), "inverse of zero");
        if let Some(r) = self.as_rat() {
            return CycNum::from_rat(self.level, r.recip());
        }
        let modulus: Vec<Rat> = cyclotomic_polynomial(self.level)
            .into_iter()
            .map(Rat::from_int)
            .collect();
        let a: Vec<Rat> = self.coeffs.to_vec();
        let u = poly_inverse_mod(&a, &modulus);
        let mut out = CycNum::zero(self.level);
        for (i, c) in u.into_iter().enumerate() {
            out.coeffs[i] = c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> CycNum {
        let mut acc = CycNum::one(self.level);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Image under ζ_N ↦ ζ_L^{L/N}.
    pub fn embed(&self, target: u32) -> Result<CycNum> {
        if target == 0 || !target.is_multiple_of(self.level) {
            return Err(Error::NotDivisible {
                from: self.level,
                to: target,
            });
        }
        if target == self.level {
            return Ok(self.clone());
        }
        let step = (target / self.level) as i64;
        let f = field(target);
        let mut out = CycNum::zero(target);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.add_scaled_power(f, i as i64 * step, c);
        }
        Ok(out)
    }

    /// The automorphism σ_t : ζ_N ↦ ζ_N^t.
    pub fn galois_apply(&self, t: i64) -> Result<CycNum> {
        let n = self.level as i64;
        if t.rem_euclid(n).gcd(&n) != 1 {
            return Err(Error::NotCoprime { t, n: self.level });
        }
        let f = field(self.level);
        let mut out = CycNum::zero(self.level);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.add_scaled_power(f, i as i64 * t, c);
        }
        Ok(out)
    }

    /// Complex conjugate, i.e. σ_{-1}.
    pub fn conj(&self) -> CycNum {
        self.galois_apply(-1).expect("-1 is always a unit")
    }

    /// Sum of all Galois conjugates.
    pub fn trace(&self) -> Rat {
        let n = self.level as i64;
        let mut acc = CycNum::zero(self.level);
        for t in 1..=n {
            if t.gcd(&n) == 1 {
                acc += &self.galois_apply(t).unwrap();
            }
        }
        acc.as_rat().expect("trace is rational").clone()
    }
}

/// ζ_N^j in canonical form.
pub fn zeta_power(level: u32, j: i64) -> CycNum {
    CycNum::from_terms(level, &[(j, Rat::one())])
}

fn trim(p: &mut Vec<Rat>) {
    while p.len() > 1 && p.last().is_some_and(Rat::is_zero) {
        p.pop();
    }
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out: Vec<Rat> = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

fn poly_divrem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![Rat::zero()], r);
    }
    let mut q = vec![Rat::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                let t = &c * bj;
                r[i + j] -= &t;
            }
        }
        q[i] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    (q, r)
}

/// Inverse of `a` modulo the irreducible `m`, by the extended Euclidean
/// algorithm over Q[x].
fn poly_inverse_mod(a: &[Rat], m: &[Rat]) -> Vec<Rat> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut t0, mut t1) = (vec![Rat::zero()], vec![Rat::one()]);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        t0 = std::mem::replace(&mut t1, t);
    }
    // r0 is a nonzero constant
    let c = r0[0].recip();
    let (_, t) = poly_divrem(&t0, m);
    let mut t: Vec<Rat> = t.iter().map(|x| x * &c).collect();
    t.resize(m.len() - 1, Rat::zero());
    t
}

impl<'a> Add<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        CycNum {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<'a> Mul<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        self.check(rhs);
        let phi = self.coeffs.len();
        if phi == 1 {
            return CycNum {
                level: self.level,
                coeffs: smallvec::smallvec![&self.coeffs[0] * &rhs.coeffs[0]],
            };
        }
        let mut prod: SmallVec<[Rat; 8]> = (0..2 * phi - 1).map(|_| Rat::zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += &(a * b);
                }
            }
        }
        let f = field(self.level);
        let mut out = CycNum::zero(self.level);
        for (k, c) in prod.into_iter().enumerate() {
            if k < phi {
                out.coeffs[k] += &c;
            } else {
                out.add_scaled_power(f, k as i64, &c);
            }
        }
        out
    }
}

impl<'a> Div<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &CycNum) -> CycNum {
        self * &rhs.inv()
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            level: self.level,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: CycNum) -> CycNum { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: &CycNum) -> CycNum { (&self).$m(rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&CycNum> for CycNum {
    fn add_assign(&mut self, rhs: &CycNum) {
        self.check(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&CycNum> for CycNum {
    fn sub_assign(&mut self, rhs: &CycNum) {
        self.check(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

impl fmt::Display for CycNum {
    /// Writes e.g. `1/2 - 3*z^2`, where z stands for ζ_N.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (j, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{mag}*z")?,
                (_, true) => write!(f, "z^{j}")?,
                (_, false) => write!(f, "{mag}*z^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", self, self.level)
    }
}

#[derive(Serialize, Deserialize)]
struct CycNumWire {
    level: u32,
    terms: Vec<(u32, Rat)>,
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| (j as u32, c.clone()))
            .collect();
        CycNumWire {
            level: self.level,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<CycNum, D::Error> {
        let w = CycNumWire::deserialize(d)?;
        if w.level == 0 {
            return Err(D::Error::custom("level must be positive"));
        }
        let phi = field(w.level).phi as u32;
        if w.terms.iter().any(|(j, _)| *j >= phi) {
            return Err(D::Error::custom("basis power out of range"));
        }
        let terms: Vec<(i64, Rat)> = w.terms.into_iter().map(|(j, r)| (j as i64, r)).collect();
        Ok(CycNum::from_terms(w.level, &terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        for n in 1..40 {
            assert_eq!(cyclotomic_polynomial(n).len() - 1, euler_phi(n) as usize);
        }
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(zeta_power(4, 2), CycNum::from_int(4, -1));
        assert_eq!(zeta_power(3, 1) + zeta_power(3, 2), CycNum::from_int(3, -1));
        assert_eq!(zeta_power(2, 1), CycNum::from_int(2, -1));
        assert_eq!(zeta_power(7, 7), CycNum::one(7));
        assert_eq!(zeta_power(5, -1), zeta_power(5, 4));
    }

    #[test]
    fn orthogonality() {
        for n in 1..=12u32 {
            for m in 0..2 * n as i64 {
                let mut s = CycNum::zero(n);
                for j in 0..n as i64 {
                    s += &zeta_power(n, j * m);
                }
                let expect = if m % n as i64 == 0 { n as i64 } else { 0 };
                assert_eq!(s, CycNum::from_int(n, expect), "N={n} m={m}");
            }
        }
    }

    #[test]
    fn embedding() {
        assert_eq!(
            CycNum::from_int(2, -1).embed(4).unwrap(),
            CycNum::from_int(4, -1)
        );
        assert_eq!(zeta_power(3, 1).embed(6).unwrap(), zeta_power(6, 2));
        let r = CycNum::from_rat(1, Rat::new(5, 7));
        assert_eq!(r.embed(12).unwrap(), CycNum::from_rat(12, Rat::new(5, 7)));
        assert!(zeta_power(3, 1).embed(4).is_err());
        assert_eq!(zeta_power(5, 2).embed(5).unwrap(), zeta_power(5, 2));
    }

    #[test]
    fn galois() {
        assert_eq!(zeta_power(4, 1).galois_apply(3).unwrap(), -zeta_power(4, 1));
        let tr =
            zeta_power(3, 1).galois_apply(1).unwrap() + zeta_power(3, 1).galois_apply(2).unwrap();
        assert_eq!(tr, CycNum::from_int(3, -1));
        let r = CycNum::from_rat(5, Rat::new(3, 5));
        for t in 1..5 {
            assert_eq!(r.galois_apply(t).unwrap(), r);
        }
        assert!(zeta_power(4, 1).galois_apply(2).is_err());
        assert_eq!(zeta_power(3, 1).trace(), Rat::from_int(-1));
    }

    #[test]
    fn inverse() {
        let x = zeta_power(4, 1) - CycNum::one(4);
        let w = x.inv();
        assert_eq!(&x * &w, CycNum::one(4));
        // 1/(i - 1) = -(1 + i)/2
        let expect = (CycNum::one(4) + zeta_power(4, 1)).scale(&Rat::new(-1, 2));
        assert_eq!(w, expect);
    }

    #[test]
    fn display_and_serde() {
        let x = CycNum::from_terms(4, &[(0, Rat::new(1, 2)), (1, Rat::from_int(-3))]);
        assert_eq!(x.to_string(), "1/2 - 3*z");
        let js = serde_json::to_string(&x).unwrap();
        assert_eq!(js, r#"{"level":4,"terms":[[0,"1/2"],[1,"-3/1"]]}"#);
        assert_eq!(serde_json::from_str::<CycNum>(&js).unwrap(), x);
        assert!(serde_json::from_str::<CycNum>(r#"{"level":4,"terms":[[2,"1/1"]]}"#).is_err());
    }

    #[test]
    #[should_panic(expected = "level mismatch")]
    fn mixed_levels_rejected() {
        let _ = zeta_power(2, 1) + zeta_power(4, 1);
    }
}
