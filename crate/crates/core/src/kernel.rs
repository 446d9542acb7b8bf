//! Integer kernels behind the divisor-sum series.
//!
//! Coefficients are accumulated in the group ring Z[Z/N] (index r stands for
//! ζ_N^r) and only converted to [`CycNum`] at the end. Accumulators try
//! machine integers first and report overflow so callers can retry with
//! [`BigInt`].

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::cyclotomic::CycNum;
use crate::rat::{binomial, Rat};

pub(crate) trait Acc: Clone {
    fn nil() -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    /// self += a·w, returning false on overflow.
    fn add_mul(&mut self, a: &Self, w: &Self) -> bool;
    fn add(&mut self, a: &Self) -> bool;
    fn is_nil(&self) -> bool;
    fn to_rat(&self) -> Rat;
}

impl Acc for i64 {
    fn nil() -> i64 {
        0
    }
    fn from_big(v: &BigInt) -> Option<i64> {
        v.to_i64()
    }
    fn add_mul(&mut self, a: &i64, w: &i64) -> bool {
        match a.checked_mul(*w).and_then(|p| self.checked_add(p)) {
            Some(s) => {
                *self = s;
                true
            }
            None => false,
        }
    }
    fn add(&mut self, a: &i64) -> bool {
        match self.checked_add(*a) {
            Some(s) => {
                *self = s;
                true
            }
            None => false,
        }
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn to_rat(&self) -> Rat {
        Rat::from_int(*self)
    }
}

impl Acc for i128 {
    fn nil() -> i128 {
        0
    }
    fn from_big(v: &BigInt) -> Option<i128> {
        v.to_i128()
    }
    fn add_mul(&mut self, a: &i128, w: &i128) -> bool {
        match a.checked_mul(*w).and_then(|p| self.checked_add(p)) {
            Some(s) => {
                *self = s;
                true
            }
            None => false,
        }
    }
    fn add(&mut self, a: &i128) -> bool {
        match self.checked_add(*a) {
            Some(s) => {
                *self = s;
                true
            }
            None => false,
        }
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn to_rat(&self) -> Rat {
        Rat::from_i128_int(*self)
    }
}

impl Acc for BigInt {
    fn nil() -> BigInt {
        <BigInt as Zero>::zero()
    }
    fn from_big(v: &BigInt) -> Option<BigInt> {
        Some(v.clone())
    }
    fn add_mul(&mut self, a: &BigInt, w: &BigInt) -> bool {
        if !Zero::is_zero(a) && !Zero::is_zero(w) {
            *self += a * w;
        }
        true
    }
    fn add(&mut self, a: &BigInt) -> bool {
        *self += a;
        true
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_rat(&self) -> Rat {
        Rat::from_bigint(self.clone())
    }
}

/// Coefficients of Q_k(x), defined by Σ n^k x^n = x Q_k(x)/(1-x)^{k+1}.
pub fn eulerian_polynomial(k: u32) -> Vec<BigInt> {
    // Eulerian numbers A(k, j) = (j+1)A(k-1, j) + (k-j)A(k-1, j-1)
    let mut row = vec![BigInt::from(1)];
    for n in 2..=k {
        let mut next = vec![<BigInt as Zero>::zero(); n as usize];
        for j in 0..n as usize {
            let mut v = <BigInt as Zero>::zero();
            if j < row.len() {
                v += &row[j] * (j as u64 + 1);
            }
            if j >= 1 && j - 1 < row.len() {
                v += &row[j - 1] * (n as u64 - j as u64);
            }
            next[j] = v;
        }
        row = next;
    }
    row
}

/// Coefficients of x Q_k(x)/(1-x)^{k+1} below x^t, expanded from the
/// Eulerian numerator and the binomial series of the denominator.
pub(crate) fn rational_weights(k: u32, t: usize) -> Vec<BigInt> {
    let q = eulerian_polynomial(k);
    let mut w = vec![<BigInt as Zero>::zero(); t];
    for (m, slot) in w.iter_mut().enumerate().skip(1) {
        let mut s = <BigInt as Zero>::zero();
        for (i, qi) in q.iter().enumerate() {
            if i + 1 > m {
                break;
            }
            s += qi * binomial((m - 1 - i) as u64 + k as u64, k as u64);
        }
        *slot = s;
    }
    w
}

/// One factor of the nested sum: the weight attached to a part p taken
/// with multiplicity m, and the power of ζ_N it contributes.
pub(crate) trait Letter<A> {
    fn weight(&self, part: usize, mult: usize) -> Option<(&A, usize)>;
}

/// Weight table indexed by multiplicity, color c (contributing ζ^{c·m}).
pub(crate) struct Colored<A> {
    pub w: Vec<A>,
    pub color: usize,
    pub level: usize,
    pub filter: Filter,
}

#[derive(Clone, Debug)]
pub(crate) enum Filter {
    None,
    Mult(Vec<bool>),
    Part(Vec<bool>),
}

impl<A> Letter<A> for Colored<A> {
    fn weight(&self, part: usize, mult: usize) -> Option<(&A, usize)> {
        match &self.filter {
            Filter::None => {}
            Filter::Mult(ok) => {
                if !ok[mult % ok.len()] {
                    return None;
                }
            }
            Filter::Part(ok) => {
                if !ok[part % ok.len()] {
                    return None;
                }
            }
        }
        Some((&self.w[mult], (self.color * mult) % self.level))
    }
}

/// Dynamic-programming state of the nested sum over 0 < n_1 < … < n_j.
///
/// `cum[(p, e, r)]` holds the total over all choices of the processed parts
/// whose largest part is < p, at exponent e, in the ζ^r component.
#[derive(Clone)]
pub(crate) struct State<A> {
    t: usize,
    n: usize,
    cum: Vec<A>,
}

impl<A: Acc> State<A> {
    pub fn empty(t: usize, n: usize) -> State<A> {
        let mut cum = vec![A::nil(); (t + 1) * t * n];
        let one = A::from_big(&BigInt::from(1)).unwrap();
        if t > 0 {
            for p in 1..=t {
                cum[(p * t) * n] = one.clone();
            }
        }
        State { t, n, cum }
    }

    #[inline]
    fn idx(&self, p: usize, e: usize, r: usize) -> usize {
        (p * self.t + e) * self.n + r
    }

    /// Appends one more (strictly larger) part.
    pub fn extend<L: Letter<A>>(&self, letter: &L) -> Option<State<A>> {
        let (t, n) = (self.t, self.n);
        let mut fresh = vec![A::nil(); (t + 1) * t * n];
        for p in 1..t {
            for m in 1..t {
                let shift = m * p;
                if shift >= t {
                    break;
                }
                let Some((w, rot)) = letter.weight(p, m) else {
                    continue;
                };
                if w.is_nil() {
                    continue;
                }
                for e in 0..t - shift {
                    for r in 0..n {
                        let src = &self.cum[self.idx(p, e, r)];
                        if src.is_nil() {
                            continue;
                        }
                        let dst = ((p * t) + e + shift) * n + (r + rot) % n;
                        if !fresh[dst].add_mul(src, w) {
                            return None;
                        }
                    }
                }
            }
        }
        // fresh[p] holds sums with largest part exactly p; accumulate to < p
        let mut cum = vec![A::nil(); (t + 1) * t * n];
        for p in 1..=t {
            let (lo, hi) = ((p - 1) * t * n, p * t * n);
            for i in 0..t * n {
                let mut v = cum[lo + i].clone();
                if !v.add(&fresh[lo + i]) {
                    return None;
                }
                cum[hi + i] = v;
            }
        }
        Some(State { t, n, cum })
    }

    /// Totals of `self.extend(letter)` without materializing the new state.
    pub fn extend_totals<L: Letter<A>>(&self, letter: &L) -> Option<Vec<A>> {
        let (t, n) = (self.t, self.n);
        let mut out = vec![A::nil(); t * n];
        for p in 1..t {
            for m in 1..t {
                let shift = m * p;
                if shift >= t {
                    break;
                }
                let Some((w, rot)) = letter.weight(p, m) else {
                    continue;
                };
                if w.is_nil() {
                    continue;
                }
                for e in 0..t - shift {
                    for r in 0..n {
                        let src = &self.cum[self.idx(p, e, r)];
                        if src.is_nil() {
                            continue;
                        }
                        if !out[(e + shift) * n + (r + rot) % n].add_mul(src, w) {
                            return None;
                        }
                    }
                }
            }
        }
        Some(out)
    }

    /// Coefficients of the full sum: entry `e * n + r` is the ζ^r part of q^e.
    pub fn totals(&self) -> &[A] {
        let (t, n) = (self.t, self.n);
        &self.cum[t * t * n..(t + 1) * t * n]
    }
}

/// Converts group-ring coefficients (e-major, length t·n) to CycNum values.
pub(crate) fn to_cycnums<A: Acc>(flat: &[A], n: usize) -> Vec<CycNum> {
    flat.chunks(n)
        .map(|c| {
            let terms: Vec<(i64, Rat)> = c
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_nil())
                .map(|(r, a)| (r as i64, a.to_rat()))
                .collect();
            CycNum::from_terms(n as u32, &terms)
        })
        .collect()
}

/// The letter m ↦ m^k ζ_n^{c·m}, or `None` if a weight overflows `A`.
pub(crate) fn colored<A: Acc>(
    k: u32,
    c: usize,
    n: usize,
    t: usize,
    filter: Filter,
) -> Option<Colored<A>> {
    let w = rational_weights(k, t)
        .iter()
        .map(A::from_big)
        .collect::<Option<Vec<A>>>()?;
    Some(Colored {
        w,
        color: c % n,
        level: n,
        filter,
    })
}

/// Runs the nested sum for the given letters, trying `i128` first.
pub(crate) fn nested_sum(letters: &[(u32, usize, Filter)], n: usize, t: usize) -> Vec<CycNum> {
    fn run<A: Acc>(letters: &[(u32, usize, Filter)], n: usize, t: usize) -> Option<Vec<CycNum>> {
        let mut st = State::<A>::empty(t, n);
        for (k, c, filter) in letters {
            st = st.extend(&colored::<A>(*k, *c, n, t, filter.clone())?)?;
        }
        Some(to_cycnums(st.totals(), n))
    }
    if t == 0 {
        return Vec::new();
    }
    run::<i128>(letters, n, t).unwrap_or_else(|| run::<BigInt>(letters, n, t).unwrap())
}
