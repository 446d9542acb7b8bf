//! Truncated power series in q^{1/M} with coefficients in Q(ζ_L).
//!
//! A [`QSeries`] knows every coefficient at exponents `e < order`, where
//! exponents count units of q^{1/M} (`den = M`). Products truncate to the
//! smaller of the two orders.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{zeta_power, CycNum};
use crate::error::{Error, Result};
use crate::rat::Rat;

/// How [`QSeries::d_operator`] scales the coefficient at q^{e/M}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DMode {
    /// D = q d/dq: multiply by e/M.
    Standard,
    /// D_M = M·D: multiply by e.
    LevelN,
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QSeriesWire", into = "QSeriesWire")]
pub struct QSeries {
    den: u32,
    cyclo: u32,
    order: u64,
    coeffs: Vec<(u64, CycNum)>,
}

#[derive(Serialize, Deserialize)]
struct QSeriesWire {
    den: u32,
    cyclo: u32,
    order: u64,
    coeffs: Vec<(u64, CycNum)>,
}

impl From<QSeries> for QSeriesWire {
    fn from(s: QSeries) -> QSeriesWire {
        QSeriesWire {
            den: s.den,
            cyclo: s.cyclo,
            order: s.order,
            coeffs: s.coeffs,
        }
    }
}

impl TryFrom<QSeriesWire> for QSeries {
    type Error = Error;
    fn try_from(w: QSeriesWire) -> Result<QSeries> {
        if w.den == 0 || w.cyclo == 0 {
            return Err(Error::Parse("den and cyclo must be positive".into()));
        }
        let mut last = None;
        for (e, c) in &w.coeffs {
            if *e >= w.order || last.is_some_and(|l| l >= *e) {
                return Err(Error::Parse(format!("exponent {e} out of order or range")));
            }
            if c.level() != w.cyclo {
                return Err(Error::LevelMismatch(c.level(), w.cyclo));
            }
            last = Some(*e);
        }
        Ok(QSeries::from_terms(w.den, w.cyclo, w.order, w.coeffs))
    }
}

impl QSeries {
    pub fn zero(den: u32, cyclo: u32, order: u64) -> QSeries {
        assert!(den >= 1 && cyclo >= 1);
        QSeries {
            den,
            cyclo,
            order,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(den: u32, cyclo: u32, order: u64, c: CycNum) -> QSeries {
        QSeries::from_terms(den, cyclo, order, vec![(0, c)])
    }

    pub fn one(den: u32, cyclo: u32, order: u64) -> QSeries {
        QSeries::constant(den, cyclo, order, CycNum::one(cyclo))
    }

    /// Builds a series from (exponent, coefficient) pairs in any order.
    /// Repeated exponents are summed; terms at or beyond `order` are dropped.
    pub fn from_terms(den: u32, cyclo: u32, order: u64, terms: Vec<(u64, CycNum)>) -> QSeries {
        let mut map: BTreeMap<u64, CycNum> = BTreeMap::new();
        for (e, c) in terms {
            if e >= order {
                continue;
            }
            assert_eq!(
                c.level(),
                cyclo,
                "coefficient level differs from series level"
            );
            match map.get_mut(&e) {
                Some(v) => *v += &c,
                None => {
                    map.insert(e, c);
                }
            }
        }
        let coeffs = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        QSeries {
            den,
            cyclo,
            order,
            coeffs,
        }
    }

    /// Dense constructor: `coeffs[e]` is the coefficient at exponent e.
    pub fn from_dense(den: u32, cyclo: u32, order: u64, coeffs: Vec<CycNum>) -> QSeries {
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .take(order as usize)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| {
                assert_eq!(c.level(), cyclo);
                (e as u64, c)
            })
            .collect();
        QSeries {
            den,
            cyclo,
            order,
            coeffs,
        }
    }

    /// Rational dense constructor at cyclotomic level 1.
    pub fn from_rats(den: u32, order: u64, coeffs: Vec<Rat>) -> QSeries {
        let cs = coeffs.into_iter().map(|r| CycNum::from_rat(1, r)).collect();
        QSeries::from_dense(den, 1, order, cs)
    }

    pub fn from_ints(den: u32, order: u64, coeffs: &[i64]) -> QSeries {
        QSeries::from_rats(
            den,
            order,
            coeffs.iter().map(|&c| Rat::from_int(c)).collect(),
        )
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn cyclo(&self) -> u32 {
        self.cyclo
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> &[(u64, CycNum)] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at exponent `e` (in q^{1/M} units). Panics past the order.
    pub fn coeff(&self, e: u64) -> CycNum {
        assert!(
            e < self.order,
            "coefficient {e} beyond truncation order {}",
            self.order
        );
        match self.coeffs.binary_search_by_key(&e, |(x, _)| *x) {
            Ok(i) => self.coeffs[i].1.clone(),
            Err(_) => CycNum::zero(self.cyclo),
        }
    }

    pub fn dense(&self) -> Vec<CycNum> {
        let mut out = vec![CycNum::zero(self.cyclo); self.order as usize];
        for (e, c) in &self.coeffs {
            out[*e as usize] = c.clone();
        }
        out
    }

    fn compatible(&self, other: &QSeries) -> Result<()> {
        if self.den != other.den {
            return Err(Error::DenMismatch(self.den, other.den));
        }
        if self.cyclo != other.cyclo {
            return Err(Error::LevelMismatch(self.cyclo, other.cyclo));
        }
        Ok(())
    }

    pub fn truncate(&self, order: u64) -> QSeries {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| *e < order)
            .cloned()
            .collect();
        QSeries {
            order,
            coeffs,
            ..*self
        }
    }

    fn merge(&self, other: &QSeries, negate: bool) -> Result<QSeries> {
        self.compatible(other)?;
        let order = self.order.min(other.order);
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.coeffs, &other.coeffs);
        let mut out = Vec::with_capacity(a.len().max(b.len()));
        loop {
            let ea = a.get(i).map(|t| t.0).filter(|&e| e < order);
            let eb = b.get(j).map(|t| t.0).filter(|&e| e < order);
            match (ea, eb) {
                (None, None) => break,
                (Some(x), Some(y)) if x == y => {
                    let c = if negate {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((x, c));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(x), y) if y.is_none_or(|y| x < y) => {
                    out.push(a[i].clone());
                    i += 1;
                }
                (_, Some(y)) => {
                    let c = if negate { -&b[j].1 } else { b[j].1.clone() };
                    out.push((y, c));
                    j += 1;
                }
                _ => unreachable!(),
            }
        }
        Ok(QSeries {
            den: self.den,
            cyclo: self.cyclo,
            order,
            coeffs: out,
        })
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries> {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        self.merge(other, true)
    }

    pub fn neg(&self) -> QSeries {
        let coeffs = self.coeffs.iter().map(|(e, c)| (*e, -c)).collect();
        QSeries { coeffs, ..*self }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        self.compatible(other)?;
        let order = self.order.min(other.order);
        let mut acc: Vec<Option<CycNum>> = vec![None; order as usize];
        for (ea, ca) in &self.coeffs {
            if *ea >= order {
                break;
            }
            for (eb, cb) in &other.coeffs {
                let e = ea + eb;
                if e >= order {
                    break;
                }
                let p = ca * cb;
                match &mut acc[e as usize] {
                    Some(v) => *v += &p,
                    slot => *slot = Some(p),
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .enumerate()
            .filter_map(|(e, c)| c.filter(|c| !c.is_zero()).map(|c| (e as u64, c)))
            .collect();
        Ok(QSeries {
            den: self.den,
            cyclo: self.cyclo,
            order,
            coeffs,
        })
    }

    pub fn scale(&self, c: &CycNum) -> Result<QSeries> {
        if c.level() != self.cyclo {
            return Err(Error::LevelMismatch(self.cyclo, c.level()));
        }
        if c.is_zero() {
            return Ok(QSeries::zero(self.den, self.cyclo, self.order));
        }
        let coeffs = self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect();
        Ok(QSeries { coeffs, ..*self })
    }

    pub fn scale_rat(&self, r: &Rat) -> QSeries {
        if r.is_zero() {
            return QSeries::zero(self.den, self.cyclo, self.order);
        }
        let coeffs = self.coeffs.iter().map(|(e, x)| (*e, x.scale(r))).collect();
        QSeries { coeffs, ..*self }
    }

    pub fn pow(&self, k: u32) -> QSeries {
        let mut acc = QSeries::one(self.den, self.cyclo, self.order);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        acc
    }

    pub fn d_operator(&self, mode: DMode) -> QSeries {
        let m = Rat::new(1, self.den as i64);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| *e > 0)
            .map(|(e, c)| {
                let f = Rat::from_int(*e as i64);
                let f = if mode == DMode::Standard { &f * &m } else { f };
                (*e, c.scale(&f))
            })
            .collect();
        QSeries { coeffs, ..*self }
    }

    /// Substitutes q ↦ ζ_N^j q in the underlying variable q^{1/M}: the
    /// coefficient at exponent e gains ζ_N^{je}.
    pub fn twist(&self, n: u32, j: i64) -> Result<QSeries> {
        if n == 0 || !self.cyclo.is_multiple_of(n) {
            return Err(Error::NotDivisible {
                from: n,
                to: self.cyclo,
            });
        }
        let step = (self.cyclo / n) as i64;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| {
                let k = (j.rem_euclid(n as i64) * step * (*e % self.cyclo as u64) as i64)
                    .rem_euclid(self.cyclo as i64);
                (*e, c.mul_zeta(k))
            })
            .collect();
        Ok(QSeries { coeffs, ..*self })
    }

    /// Substitutes q ↦ q^{p/r}. The exponent grid is refined as needed so
    /// the result is exact; the new order keeps exactly the known range.
    pub fn substitute_power(&self, p: u64, r: u64) -> Result<QSeries> {
        if p == 0 || r == 0 {
            return Err(Error::Invalid(
                "substitute_power needs a positive rational".into(),
            ));
        }
        let g = p.gcd(&r);
        let (p, r) = (p / g, r / g);
        // q^{e/M} becomes q^{e·p/(M·r)}
        let den = self.den as u64 * r;
        let den_u32 = u32::try_from(den).map_err(|_| Error::Invalid("grid too fine".into()))?;
        let order = self
            .order
            .checked_mul(p)
            .ok_or_else(|| Error::Invalid("order overflow".into()))?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| (e * p, c.clone()))
            .collect();
        Ok(QSeries {
            den: den_u32,
            cyclo: self.cyclo,
            order,
            coeffs,
        })
    }

    /// Re-expresses the series on the grid q^{1/target}. `target` must be a
    /// multiple of the current den.
    pub fn with_den(&self, target: u32) -> Result<QSeries> {
        if target == 0 || !target.is_multiple_of(self.den) {
            return Err(Error::DenMismatch(self.den, target));
        }
        let k = (target / self.den) as u64;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| (e * k, c.clone()))
            .collect();
        Ok(QSeries {
            den: target,
            cyclo: self.cyclo,
            order: self.order * k,
            coeffs,
        })
    }

    /// Multiplicative inverse, for a series with nonzero constant term.
    pub fn invert(&self) -> Result<QSeries> {
        let c0 = self.coeff_or_zero(0);
        if c0.is_zero() {
            return Err(Error::ZeroConstant);
        }
        let inv0 = c0.inv();
        let t = self.order as usize;
        let mut b: Vec<CycNum> = Vec::with_capacity(t);
        b.push(inv0.clone());
        for n in 1..t {
            let mut s = CycNum::zero(self.cyclo);
            for (e, c) in &self.coeffs {
                let e = *e as usize;
                if e == 0 {
                    continue;
                }
                if e > n {
                    break;
                }
                s += &(c * &b[n - e]);
            }
            b.push(-(&s * &inv0));
        }
        Ok(QSeries::from_dense(self.den, self.cyclo, self.order, b))
    }

    fn coeff_or_zero(&self, e: u64) -> CycNum {
        if e < self.order {
            self.coeff(e)
        } else {
            CycNum::zero(self.cyclo)
        }
    }

    pub fn embed(&self, target: u32) -> Result<QSeries> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| Ok((*e, c.embed(target)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(QSeries {
            cyclo: target,
            coeffs,
            ..*self
        })
    }

    pub fn galois_apply(&self, t: i64) -> Result<QSeries> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, c)| Ok((*e, c.galois_apply(t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(QSeries { coeffs, ..*self })
    }

    /// Coefficient-wise reduction modulo `m`; every coefficient must be a
    /// rational integer.
    pub fn reduce_mod(&self, m: u64) -> Result<ModSeries> {
        if m == 0 {
            return Err(Error::Invalid("modulus must be positive".into()));
        }
        let mb = BigInt::from(m);
        let mut coeffs = Vec::new();
        for (e, c) in &self.coeffs {
            let n = c
                .as_rat()
                .and_then(Rat::to_bigint)
                .ok_or(Error::NonIntegral(*e))?;
            let r = n.mod_floor(&mb).to_u64().unwrap();
            if r != 0 {
                coeffs.push((*e, r));
            }
        }
        Ok(ModSeries {
            modulus: m,
            den: self.den,
            order: self.order,
            coeffs,
        })
    }

    /// True when every coefficient is a rational integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(_, c)| c.as_rat().is_some_and(Rat::is_integer))
    }

    /// Integer coefficients as a dense vector, if all are integers.
    pub fn to_bigints(&self) -> Option<Vec<BigInt>> {
        let mut out = vec![BigInt::zero(); self.order as usize];
        for (e, c) in &self.coeffs {
            out[*e as usize] = c.as_rat()?.to_bigint()?;
        }
        Some(out)
    }
}

/// A truncated series with coefficients in Z/m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModSeries {
    pub modulus: u64,
    pub den: u32,
    pub order: u64,
    pub coeffs: Vec<(u64, u64)>,
}

impl ModSeries {
    pub fn coeff(&self, e: u64) -> u64 {
        self.coeffs.iter().find(|(x, _)| *x == e).map_or(0, |t| t.1)
    }
}

/// ζ_N^j as a constant series convenience.
pub fn zeta_series(den: u32, cyclo: u32, order: u64, j: i64) -> QSeries {
    QSeries::constant(den, cyclo, order, zeta_power(cyclo, j))
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.as_rat().is_some_and(Rat::is_negative);
            let c = &if neg && i > 0 { -c } else { c.clone() };
            match (i, neg) {
                (0, _) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = match (*e, self.den) {
                (0, _) => String::new(),
                (1, 1) => "q".to_string(),
                (e, 1) => format!("q^{e}"),
                (e, m) => format!("q^({e}/{m})"),
            };
            let single = c.coords().iter().filter(|x| !x.is_zero()).count() == 1;
            match (mono.is_empty(), single) {
                (true, _) => write!(f, "{c}")?,
                (false, _) if c.is_one() => write!(f, "{mono}")?,
                (false, true) => write!(f, "{c}*{mono}")?,
                (false, false) => write!(f, "({c})*{mono}")?,
            }
        }
        write!(f, " + O(q^{})", fmt_exp(self.order, self.den))
    }
}

fn fmt_exp(e: u64, den: u32) -> String {
    if den == 1 {
        e.to_string()
    } else {
        format!("({e}/{den})")
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QSeries[den={}, cyclo={}] {}",
            self.den, self.cyclo, self
        )
    }
}
