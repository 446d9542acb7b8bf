//! The quasi-shuffle algebra on letters z[a;c] of level N.
//!
//! Letters carry a shifted weight a ≥ 1 and a color c mod N. The bracket
//! sends the word z[a_1;c_1]⋯z[a_l;c_l] to U_{(a⃗-1);c⃗;N} / Π (a_i - 1)!,
//! and turns the quasi-shuffle product into multiplication of q-series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{field, zeta_power, CycNum};
use crate::divisor_sums::{u_series, MDIndex};
use crate::error::{Error, Result};
use crate::kernel::{colored, Colored, Filter, State};
use crate::qseries::QSeries;
use crate::rat::{bernoulli_numbers, binomial, factorial, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub a: u32,
    pub c: u32,
    pub level: u32,
}

impl Letter {
    pub fn new(a: u32, c: i64, level: u32) -> Result<Letter> {
        if a == 0 || level == 0 {
            return Err(Error::Invalid(format!(
                "letter z[{a};{c}] at level {level}"
            )));
        }
        Ok(Letter {
            a,
            c: c.rem_euclid(level as i64) as u32,
            level,
        })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z[{};{}]", self.a, self.c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    level: u32,
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty(level: u32) -> Word {
        Word {
            level,
            letters: Vec::new(),
        }
    }

    pub fn new(level: u32, letters: Vec<Letter>) -> Result<Word> {
        if let Some(l) = letters.iter().find(|l| l.level != level) {
            return Err(Error::LevelMismatch(l.level, level));
        }
        Ok(Word { level, letters })
    }

    /// Builds a word from (a, c) pairs.
    pub fn from_pairs(level: u32, pairs: &[(u32, i64)]) -> Result<Word> {
        let letters = pairs
            .iter()
            .map(|&(a, c)| Letter::new(a, c, level))
            .collect::<Result<_>>()?;
        Word::new(level, letters)
    }

    /// Parses `z[a;c] z[a;c] ...`; `1` or an empty string is the empty word.
    /// A letter may also carry its level as `z[a;c;N]`, which must equal `level`.
    pub fn parse(s: &str, level: u32) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty(level));
        }
        let bad = || Error::Parse(format!("word {s:?}"));
        let mut letters = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let body = rest.strip_prefix("z[").ok_or_else(bad)?;
            let close = body.find(']').ok_or_else(bad)?;
            let f: Vec<&str> = body[..close].split(';').map(str::trim).collect();
            if f.len() < 2 || f.len() > 3 {
                return Err(bad());
            }
            let a: u32 = f[0].parse().map_err(|_| bad())?;
            let c: i64 = f[1].parse().map_err(|_| bad())?;
            if let Some(n) = f.get(2) {
                let n: u32 = n.parse().map_err(|_| bad())?;
                if n != level {
                    return Err(Error::LevelMismatch(level, n));
                }
            }
            letters.push(Letter::new(a, c, level)?);
            rest = body[close + 1..].trim_start();
        }
        Word::new(level, letters)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    pub fn weight(&self) -> u32 {
        self.letters.iter().map(|l| l.a).sum()
    }

    /// The series index (a⃗ - 1; c⃗; N) the bracket evaluates.
    pub fn index(&self) -> MDIndex {
        MDIndex {
            weights: self.letters.iter().map(|l| l.a - 1).collect(),
            colors: self.letters.iter().map(|l| l.c).collect(),
            level: self.level,
        }
    }

    fn prepend(&self, l: Letter) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + 1);
        letters.push(l);
        letters.extend_from_slice(&self.letters);
        Word {
            level: self.level,
            letters,
        }
    }

    fn suffix(&self, i: usize) -> Word {
        Word {
            level: self.level,
            letters: self.letters[i..].to_vec(),
        }
    }

    /// Π (a_i - 1)!.
    fn norm(&self) -> BigInt {
        self.letters
            .iter()
            .map(|l| factorial(l.a - 1).numer())
            .product()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A finite Q(ζ_N)-linear combination of words.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinComb {
    level: u32,
    terms: BTreeMap<Word, CycNum>,
}

impl LinComb {
    pub fn zero(level: u32) -> LinComb {
        LinComb {
            level,
            terms: BTreeMap::new(),
        }
    }

    pub fn word(w: Word) -> LinComb {
        let level = w.level;
        let mut terms = BTreeMap::new();
        terms.insert(w, CycNum::one(level));
        LinComb { level, terms }
    }

    pub fn letter(l: Letter) -> LinComb {
        LinComb::word(Word {
            level: l.level,
            letters: vec![l],
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &CycNum)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> CycNum {
        self.terms
            .get(w)
            .cloned()
            .unwrap_or_else(|| CycNum::zero(self.level))
    }

    pub fn add_term(&mut self, w: Word, c: &CycNum) {
        assert_eq!(w.level, self.level, "word level mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c.clone());
            }
        }
    }

    pub fn add(&self, other: &LinComb) -> Result<LinComb> {
        self.same_level(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CycNum) -> LinComb {
        let mut out = LinComb::zero(self.level);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    fn same_level(&self, other: &LinComb) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    fn prepend(&self, l: Letter) -> LinComb {
        LinComb {
            level: self.level,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.prepend(l), c.clone()))
                .collect(),
        }
    }

    /// Σ c_w · [w] to the given order.
    pub fn bracket(&self, order: u64) -> QSeries {
        bracket(self, order)
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut words: Vec<_> = self.terms.iter().collect();
        words.sort_by(|a, b| (b.0.depth(), b.0).cmp(&(a.0.depth(), a.0)));
        for (i, (w, c)) in words.into_iter().enumerate() {
            let (neg, mag) = match c.as_rat() {
                Some(r) if r.is_negative() => (true, CycNum::from_rat(c.level(), -r)),
                _ => (false, c.clone()),
            };
            match (i, neg) {
                (0, true) => write!(f, "−")?,
                (0, false) => {}
                (_, true) => write!(f, " − ")?,
                (_, false) => write!(f, " + ")?,
            }
            let coef = match mag.as_rat() {
                Some(r) if r.is_one() => None,
                Some(r) => Some(r.to_string()),
                None => Some(format!("({mag})")),
            };
            match (coef, w.depth()) {
                (None, _) => write!(f, "{w}")?,
                (Some(c), 0) => write!(f, "{c}")?,
                (Some(c), _) => write!(f, "{c}·{w}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

type OmegaTable = Mutex<HashMap<(u32, u32), Arc<Vec<CycNum>>>>;

fn omega_table(n: u32, c: u32, len: usize) -> Arc<Vec<CycNum>> {
    static TABLE: OnceLock<OmegaTable> = OnceLock::new();
    let table = TABLE.get_or_init(Default::default);
    if let Some(v) = table.lock().unwrap().get(&(n, c)) {
        if v.len() >= len {
            return v.clone();
        }
    }
    let len = len.max(16);
    let v: Vec<CycNum> = if c == 0 {
        let b = bernoulli_numbers(len + 1);
        (0..len)
            .map(|i| CycNum::from_rat(n, &b[i + 1] / &Rat::from_int(i as i64 + 1)))
            .collect()
    } else {
        // 1/(ζ^c e^x - 1): invert f = (ζ^c - 1) + ζ^c Σ_{m≥1} x^m/m!
        let z = zeta_power(n, c as i64);
        let f0_inv = (&z - &CycNum::one(n)).inv();
        let mut g: Vec<CycNum> = vec![f0_inv.clone()];
        for k in 1..len {
            let mut s = CycNum::zero(n);
            for m in 1..=k {
                s += &g[k - m].scale(&factorial(m as u32).recip());
            }
            g.push(-(&(&s * &z) * &f0_inv));
        }
        g.into_iter()
            .enumerate()
            .map(|(k, x)| x.scale(&factorial(k as u32)))
            .collect()
    };
    let v = Arc::new(v);
    table.lock().unwrap().insert((n, c), v.clone());
    v
}

/// ω_{n;c}: the coefficients in 1/(ζ_N^c e^x - 1) = δ_{c,0}/x + Σ ω_{n;c} x^n/n!.
pub fn omega(n: u32, c: i64, level: u32) -> CycNum {
    let c = c.rem_euclid(level as i64) as u32;
    omega_table(level, c, n as usize + 1)[n as usize].clone()
}

/// λ_{a,b;c}^j = (-1)^{b-1} C(a+b-j-1, a-j) ω_{a+b-j-1;c} / (a+b-j-1)!.
pub fn lambda_coeff(a: u32, b: u32, c: i64, j: u32, level: u32) -> Result<CycNum> {
    if a == 0 || b == 0 || j == 0 || j > a {
        return Err(Error::Invalid(format!(
            "lambda index j={j} outside 1..={a}"
        )));
    }
    let m = a + b - j - 1;
    let mut r = Rat::from_bigint(binomial(m as u64, (a - j) as u64)) / factorial(m);
    if b.is_multiple_of(2) {
        r = -r;
    }
    Ok(omega(m, c, level).scale(&r))
}

/// The commutative letter product z[a;c] ⋄ z[b;d].
pub fn diamond(x: Letter, y: Letter) -> Result<LinComb> {
    if x.level != y.level {
        return Err(Error::LevelMismatch(x.level, y.level));
    }
    let n = x.level;
    let dc = x.c as i64 - y.c as i64;
    let mut out = LinComb::zero(n);
    for j in 1..=x.a {
        out.add_term(
            Word {
                level: n,
                letters: vec![Letter { a: j, ..x }],
            },
            &lambda_coeff(x.a, y.a, dc, j, n)?,
        );
    }
    for j in 1..=y.a {
        out.add_term(
            Word {
                level: n,
                letters: vec![Letter { a: j, ..y }],
            },
            &lambda_coeff(y.a, x.a, -dc, j, n)?,
        );
    }
    if x.c == y.c {
        out.add_term(
            Word {
                level: n,
                letters: vec![Letter { a: x.a + y.a, ..x }],
            },
            &CycNum::one(n),
        );
    }
    Ok(out)
}

fn diamond_cached(x: Letter, y: Letter) -> Result<Arc<Vec<(Letter, CycNum)>>> {
    type Cache = Mutex<HashMap<(Letter, Letter), Arc<Vec<(Letter, CycNum)>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(x, y)) {
        return Ok(v.clone());
    }
    let v: Arc<Vec<_>> = Arc::new(
        diamond(x, y)?
            .terms
            .into_iter()
            .map(|(w, c)| (w.letters[0], c))
            .collect(),
    );
    cache.lock().unwrap().insert((x, y), v.clone());
    Ok(v)
}

/// ⋄ extended bilinearly to combinations of depth-one words.
pub fn diamond_lin(x: &LinComb, y: &LinComb) -> Result<LinComb> {
    x.same_level(y)?;
    let mut out = LinComb::zero(x.level);
    for (u, cu) in &x.terms {
        for (v, cv) in &y.terms {
            if u.depth() != 1 || v.depth() != 1 {
                return Err(Error::Invalid("diamond needs single letters".into()));
            }
            let c = cu * cv;
            for (w, cw) in &diamond(u.letters[0], v.letters[0])?.terms {
                out.add_term(w.clone(), &(cw * &c));
            }
        }
    }
    Ok(out)
}

/// The quasi-shuffle product of two words.
pub fn qshuffle(w: &Word, v: &Word) -> Result<LinComb> {
    if w.level != v.level {
        return Err(Error::LevelMismatch(w.level, v.level));
    }
    let (lw, lv) = (w.depth(), v.depth());
    // table[i][j] = w[i..] * v[j..]
    let mut table: Vec<Vec<LinComb>> = vec![vec![LinComb::zero(w.level); lv + 1]; lw + 1];
    for i in (0..=lw).rev() {
        for j in (0..=lv).rev() {
            table[i][j] = if i == lw {
                LinComb::word(v.suffix(j))
            } else if j == lv {
                LinComb::word(w.suffix(i))
            } else {
                let (a, b) = (w.letters[i], v.letters[j]);
                let mut acc = table[i + 1][j].prepend(a);
                for (x, c) in &table[i][j + 1].terms {
                    acc.add_term(x.prepend(b), c);
                }
                let rest = &table[i + 1][j + 1];
                for (l, cl) in diamond_cached(a, b)?.iter() {
                    for (x, c) in &rest.terms {
                        acc.add_term(x.prepend(*l), &(c * cl));
                    }
                }
                acc
            };
        }
    }
    Ok(table.swap_remove(0).swap_remove(0))
}

/// The quasi-shuffle product extended bilinearly.
pub fn qshuffle_lin(x: &LinComb, y: &LinComb) -> Result<LinComb> {
    x.same_level(y)?;
    let mut out = LinComb::zero(x.level);
    for (u, cu) in &x.terms {
        for (v, cv) in &y.terms {
            let c = cu * cv;
            for (w, cw) in &qshuffle(u, v)?.terms {
                out.add_term(w.clone(), &(cw * &c));
            }
        }
    }
    Ok(out)
}

/// Evaluates a combination of words as a q-series.
pub fn bracket(x: &LinComb, order: u64) -> QSeries {
    let mut acc = QSeries::zero(1, x.level, order);
    for (w, c) in &x.terms {
        let s = u_series(&w.index(), order).scale_rat(&Rat::from_bigint(w.norm()).recip());
        acc = acc.add(&s.scale(c).unwrap()).unwrap();
    }
    acc
}

/// A combination of U-series indices with CycNum coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesComb {
    pub level: u32,
    pub terms: BTreeMap<MDIndex, CycNum>,
}

impl SeriesComb {
    fn add_term(&mut self, idx: MDIndex, c: CycNum) {
        if c.is_zero() {
            return;
        }
        let e = self
            .terms
            .entry(idx)
            .or_insert_with(|| CycNum::zero(c.level()));
        *e += &c;
    }

    pub fn evaluate(&self, order: u64) -> QSeries {
        let mut acc = QSeries::zero(1, self.level, order);
        for (idx, c) in &self.terms {
            acc = acc.add(&u_series(idx, order).scale(c).unwrap()).unwrap();
        }
        acc
    }
}

/// The explicit expansion of U_{(s);(c)} · U_{(t);(d)} at level N.
pub fn depth_one_product(s: u32, t: u32, c: i64, d: i64, level: u32) -> Result<SeriesComb> {
    let idx = |w: Vec<u32>, cs: Vec<i64>| MDIndex::new(w, cs, level);
    let mut out = SeriesComb {
        level,
        terms: BTreeMap::new(),
    };
    let one = CycNum::one(level);
    out.add_term(idx(vec![s, t], vec![c, d])?, one.clone());
    out.add_term(idx(vec![t, s], vec![d, c])?, one.clone());
    if (c - d).rem_euclid(level as i64) == 0 {
        let w = &(&factorial(s) * &factorial(t)) / &factorial(s + t + 1);
        out.add_term(idx(vec![s + t + 1], vec![c])?, one.scale(&w));
    }
    let sign = |e: u32| {
        if e.is_multiple_of(2) {
            Rat::one()
        } else {
            -Rat::one()
        }
    };
    for j in 0..=s {
        let r = Rat::from_bigint(binomial(s as u64, j as u64)) * sign(t);
        out.add_term(
            idx(vec![j], vec![c])?,
            omega(s + t - j, c - d, level).scale(&r),
        );
    }
    for j in 0..=t {
        let r = Rat::from_bigint(binomial(t as u64, j as u64)) * sign(s);
        out.add_term(
            idx(vec![j], vec![d])?,
            omega(s + t - j, d - c, level).scale(&r),
        );
    }
    out.terms.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// An element (σ, s) of S_a × {±1}^a.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub sigma: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    /// All 2^a · a! elements.
    pub fn all(a: usize) -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        for sigma in permutations(a) {
            for mask in 0..1u32 << a {
                let signs = (0..a)
                    .map(|j| if mask >> j & 1 == 1 { -1 } else { 1 })
                    .collect();
                out.push(SignedPermutation {
                    sigma: sigma.clone(),
                    signs,
                });
            }
        }
        out
    }

    /// The sign (-1)^ε and the transformed index, with
    /// ε = Σ_j (1 - s_j)/2 · (k_{σ(j)} + 1).
    pub fn act(&self, idx: &MDIndex) -> (i64, MDIndex) {
        let n = idx.level as i64;
        let mut eps = 0u32;
        let mut weights = Vec::with_capacity(idx.depth());
        let mut colors = Vec::with_capacity(idx.depth());
        for (j, &i) in self.sigma.iter().enumerate() {
            let k = idx.weights[i];
            let c = idx.colors[i] as i64 * self.signs[j] as i64;
            if self.signs[j] < 0 {
                eps += k + 1;
            }
            weights.push(k);
            colors.push(c.rem_euclid(n) as u32);
        }
        let sign = if eps.is_multiple_of(2) { 1 } else { -1 };
        (
            sign,
            MDIndex {
                weights,
                colors,
                level: idx.level,
            },
        )
    }
}

fn permutations(a: usize) -> Vec<Vec<usize>> {
    if a == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(a - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, a - 1);
            out.push(q);
        }
    }
    out
}

fn signed_sum(counts: HashMap<MDIndex, i64>, level: u32, order: u64) -> QSeries {
    let mut keys: Vec<_> = counts.into_iter().filter(|(_, m)| *m != 0).collect();
    keys.sort();
    let mut acc = QSeries::zero(1, level, order);
    for (idx, m) in keys {
        acc = acc
            .add(&u_series(&idx, order).scale_rat(&Rat::from_int(m)))
            .unwrap();
    }
    acc
}

/// U^sym = Σ_{(σ,s) ∈ S_a^±} (-1)^ε U_{σk⃗, sσc⃗}, without averaging.
pub fn sym_traceform(weights: &[u32], colors: &[i64], level: u32, order: u64) -> Result<QSeries> {
    let idx = MDIndex::new(weights.to_vec(), colors.to_vec(), level)?;
    let mut counts: HashMap<MDIndex, i64> = HashMap::new();
    for g in SignedPermutation::all(idx.depth()) {
        let (sign, j) = g.act(&idx);
        *counts.entry(j).or_default() += sign;
    }
    Ok(signed_sum(counts, level, order))
}

/// Σ_{σ ∈ S_a} U_{σk⃗} at level one.
pub fn sym_traceform_level_one(weights: &[u32], order: u64) -> QSeries {
    let mut counts: HashMap<MDIndex, i64> = HashMap::new();
    for p in permutations(weights.len()) {
        let w: Vec<u32> = p.iter().map(|&i| weights[i]).collect();
        *counts.entry(MDIndex::level_one(&w)).or_default() += 1;
    }
    signed_sum(counts, 1, order)
}

fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Both sides of the symmetric-sum formula
/// Σ_σ a_{σ(1)}⋯a_{σ(n)} = Σ_B (-1)^{n-|B|} Π(|β|-1)! ∗_{β∈B} (⋄_{i∈β} a_i).
pub fn hoffman_sides(letters: &[Letter]) -> Result<(LinComb, LinComb)> {
    let level = letters.first().map_or(1, |l| l.level);
    let n = letters.len();
    let mut lhs = LinComb::zero(level);
    for p in permutations(n) {
        let w = Word::new(level, p.iter().map(|&i| letters[i]).collect())?;
        lhs.add_term(w, &CycNum::one(level));
    }
    let mut rhs = LinComb::zero(level);
    for blocks in set_partitions(n) {
        let mut prod = LinComb::word(Word::empty(level));
        let mut f = Rat::one();
        for b in &blocks {
            let mut d = LinComb::letter(letters[b[0]]);
            for &i in &b[1..] {
                d = diamond_lin(&d, &LinComb::letter(letters[i]))?;
            }
            prod = qshuffle_lin(&prod, &d)?;
            f *= &factorial(b.len() as u32 - 1);
        }
        if (n - blocks.len()) % 2 == 1 {
            f = -f;
        }
        rhs = rhs.add(&prod.scale(&CycNum::from_rat(level, f)))?;
    }
    Ok((lhs, rhs))
}

pub fn hoffman_symmetric_sum_check(letters: &[Letter]) -> Result<bool> {
    let (l, r) = hoffman_sides(letters)?;
    Ok(l == r)
}

/// Every word of depth ≤ `depth` with shifted weights ≤ `max_a` at level N.
pub fn words_up_to(depth: usize, max_a: u32, level: u32) -> Vec<Word> {
    let mut out = vec![Word::empty(level)];
    let mut layer = vec![Word::empty(level)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &layer {
            for a in 1..=max_a {
                for c in 0..level {
                    let mut v = w.clone();
                    v.letters.push(Letter { a, c, level });
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Outcome of [`homomorphism_grid`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridReport {
    pub level: u32,
    pub words: usize,
    pub pairs: usize,
    pub failures: Vec<(String, String)>,
}

/// Bracket evaluation in Z[Z/N] with cached prefix states.
struct FastBracket {
    level: usize,
    t: usize,
    letters: HashMap<(u32, u32), Colored<i128>>,
    states: HashMap<Vec<Letter>, Arc<State<i128>>>,
    totals: HashMap<Word, Arc<Vec<i128>>>,
    last: Option<(Vec<Letter>, Arc<State<i128>>)>,
}

impl FastBracket {
    fn new(level: u32, t: usize) -> FastBracket {
        FastBracket {
            level: level as usize,
            t,
            letters: HashMap::new(),
            states: HashMap::new(),
            totals: HashMap::new(),
            last: None,
        }
    }

    fn letter(&mut self, l: Letter) -> Option<&Colored<i128>> {
        if !self.letters.contains_key(&(l.a, l.c)) {
            let c = colored::<i128>(l.a - 1, l.c as usize, self.level, self.t, Filter::None)?;
            self.letters.insert((l.a, l.c), c);
        }
        self.letters.get(&(l.a, l.c))
    }

    fn state(&mut self, prefix: &[Letter]) -> Option<Arc<State<i128>>> {
        if let Some(s) = self.states.get(prefix) {
            return Some(s.clone());
        }
        if let Some((p, s)) = &self.last {
            if p == prefix {
                return Some(s.clone());
            }
        }
        let s = if prefix.is_empty() {
            Arc::new(State::empty(self.t, self.level))
        } else {
            let parent = self.state(&prefix[..prefix.len() - 1])?;
            let l = *prefix.last().unwrap();
            Arc::new(parent.extend(self.letter(l)?)?)
        };
        if prefix.len() <= 2 {
            self.states.insert(prefix.to_vec(), s.clone());
        } else {
            self.last = Some((prefix.to_vec(), s.clone()));
        }
        Some(s)
    }

    fn totals(&mut self, w: &Word) -> Option<Arc<Vec<i128>>> {
        if let Some(v) = self.totals.get(w) {
            return Some(v.clone());
        }
        let v = match w.letters.split_last() {
            None => self.state(&[])?.totals().to_vec(),
            Some((l, prefix)) => {
                let st = self.state(prefix)?;
                st.extend_totals(self.letter(*l)?)?
            }
        };
        let v = Arc::new(v);
        self.totals.insert(w.clone(), v.clone());
        Some(v)
    }
}

fn lcm_den(c: &CycNum) -> BigInt {
    c.coords()
        .iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(&r.denom()))
}

/// Group-ring vector (length t·n) to power-basis integer coordinates (length t·φ).
fn reduce(g: &[i128], n: usize) -> Option<Vec<i128>> {
    let f = field(n as u32);
    let mut out = vec![0i128; g.len() / n * f.phi];
    for (e, chunk) in g.chunks(n).enumerate() {
        for (r, &v) in chunk.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for (i, &p) in f.powers[r].iter().enumerate() {
                let slot = &mut out[e * f.phi + i];
                *slot = slot.checked_add(v.checked_mul(p as i128)?)?;
            }
        }
    }
    Some(out)
}

/// Exact integer check of [w * v] = [w]·[v]; `None` on machine overflow.
fn fast_pair(fb: &mut FastBracket, w: &Word, v: &Word, prod: &LinComb) -> Option<bool> {
    let (n, t) = (fb.level, fb.t);
    let phi = field(n as u32).phi;
    // D·Σ c_x/norm_x · tot_x with integer coefficients
    let mut den = BigInt::one();
    for (x, c) in &prod.terms {
        den = den.lcm(&(lcm_den(c) * x.norm()));
    }
    let mut lhs = vec![0i128; t * n];
    for (x, c) in &prod.terms {
        let scale = Rat::from_bigint(den.clone()) / Rat::from_bigint(x.norm());
        let coefs: Vec<i128> = c
            .coords()
            .iter()
            .map(|r| (r * &scale).to_bigint()?.to_i128())
            .collect::<Option<_>>()?;
        let tot = fb.totals(x)?;
        for (j, &cj) in coefs.iter().enumerate().take(phi) {
            if cj == 0 {
                continue;
            }
            for e in 0..t {
                for r in 0..n {
                    let v = tot[e * n + r];
                    if v != 0 {
                        let slot = &mut lhs[e * n + (r + j) % n];
                        *slot = slot.checked_add(v.checked_mul(cj)?)?;
                    }
                }
            }
        }
    }
    let (tw, tv) = (fb.totals(w)?, fb.totals(v)?);
    let mut rhs = vec![0i128; t * n];
    for e1 in 0..t {
        for r1 in 0..n {
            let a = tw[e1 * n + r1];
            if a == 0 {
                continue;
            }
            for e2 in 0..t - e1 {
                for r2 in 0..n {
                    let b = tv[e2 * n + r2];
                    if b != 0 {
                        let slot = &mut rhs[(e1 + e2) * n + (r1 + r2) % n];
                        *slot = slot.checked_add(a.checked_mul(b)?)?;
                    }
                }
            }
        }
    }
    let (lhs, rhs) = (reduce(&lhs, n)?, reduce(&rhs, n)?);
    // lhs/den = rhs/(norm_w norm_v)
    let nl = (w.norm() * v.norm()).to_i128()?;
    let nr = den.to_i128()?;
    for (a, b) in lhs.iter().zip(&rhs) {
        if a.checked_mul(nl)? != b.checked_mul(nr)? {
            return Some(false);
        }
    }
    Some(true)
}

/// Checks [w * v] = [w]·[v] to the given order for all words of depth ≤
/// `depth` and shifted weight ≤ `max_a` at one level. Each unordered pair
/// is evaluated once, after confirming w * v and v * w agree symbolically.
pub fn homomorphism_grid(depth: usize, max_a: u32, level: u32, order: u64) -> Result<GridReport> {
    let words = words_up_to(depth, max_a, level);
    let mut fb = FastBracket::new(level, order as usize);
    let mut report = GridReport {
        level,
        words: words.len(),
        ..Default::default()
    };
    for (i, w) in words.iter().enumerate() {
        for v in &words[i..] {
            let prod = qshuffle(w, v)?;
            report.pairs += 1;
            let ok = if w != v && qshuffle(v, w)? != prod {
                false
            } else {
                match fast_pair(&mut fb, w, v, &prod) {
                    Some(ok) => ok,
                    None => {
                        let lhs = bracket(&prod, order);
                        let rhs = bracket(&LinComb::word(w.clone()), order)
                            .mul(&bracket(&LinComb::word(v.clone()), order))?;
                        lhs == rhs
                    }
                }
            };
            if !ok {
                report.failures.push((w.to_string(), v.to_string()));
            }
        }
    }
    Ok(report)
}

impl FromStr for Letter {
    type Err = Error;

    /// Parses `z[a;c;N]`.
    fn from_str(s: &str) -> Result<Letter> {
        let bad = || Error::Parse(format!("letter {s:?}"));
        let body = s
            .trim()
            .strip_prefix("z[")
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(bad)?;
        let f: Vec<&str> = body.split(';').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let a = f[0].parse().map_err(|_| bad())?;
        let c = f[1].parse().map_err(|_| bad())?;
        let n = f[2].parse().map_err(|_| bad())?;
        Letter::new(a, c, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(a: u32, c: i64, n: u32) -> Letter {
        Letter::new(a, c, n).unwrap()
    }

    fn word(s: &str, n: u32) -> Word {
        Word::parse(s, n).unwrap()
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(1, 0, 1), CycNum::from_rat(1, Rat::new(1, 12)));
        assert_eq!(omega(0, 0, 1), CycNum::from_rat(1, Rat::new(-1, 2)));
        assert_eq!(omega(0, 1, 2), CycNum::from_rat(2, Rat::new(-1, 2)));
        let expect = CycNum::from_terms(4, &[(0, Rat::new(-1, 2)), (1, Rat::new(-1, 2))]);
        assert_eq!(omega(0, 1, 4), expect);
        let b = bernoulli_numbers(14);
        for n in 0..=12u32 {
            assert_eq!(
                omega(n, 0, 1).as_rat().unwrap(),
                &(&b[n as usize + 1] / &Rat::from_int(n as i64 + 1))
            );
        }
    }

    #[test]
    fn omega_symmetry() {
        for level in 1..=8u32 {
            for c in 0..level as i64 {
                for n in 1..=10u32 {
                    let lhs = omega(n, c, level);
                    let rhs = omega(n, -c, level);
                    assert_eq!(
                        lhs,
                        if n % 2 == 1 { rhs } else { -rhs },
                        "n={n} c={c} N={level}"
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_examples() {
        let r = |x: i64, y: i64, n| CycNum::from_rat(n, Rat::new(x, y));
        assert_eq!(lambda_coeff(1, 1, 0, 1, 1).unwrap(), r(-1, 2, 1));
        assert_eq!(lambda_coeff(2, 1, 0, 2, 1).unwrap(), r(-1, 2, 1));
        assert_eq!(lambda_coeff(1, 2, 0, 1, 1).unwrap(), r(-1, 12, 1));
        assert!(lambda_coeff(1, 2, 0, 2, 1).is_err());
    }

    #[test]
    fn diamond_examples() {
        let d = diamond(z(1, 0, 1), z(1, 0, 1)).unwrap();
        assert_eq!(d.to_string(), "z[2;0] − z[1;0]");
        let d = diamond(z(1, 0, 2), z(1, 1, 2)).unwrap();
        assert_eq!(d.to_string(), "−1/2·z[1;1] − 1/2·z[1;0]");
        assert!(diamond(z(1, 0, 2), z(1, 0, 3)).is_err());
    }

    #[test]
    fn shuffle_examples() {
        let x = word("z[1;0]", 1);
        assert_eq!(
            qshuffle(&x, &x).unwrap().to_string(),
            "2·z[1;0]z[1;0] + z[2;0] − z[1;0]"
        );
        let e = Word::empty(3);
        let w = word("z[2;1] z[1;2]", 3);
        assert_eq!(qshuffle(&e, &w).unwrap(), LinComb::word(w.clone()));
        let p = qshuffle(&w, &w).unwrap();
        assert!(p.terms().all(|(x, _)| x.depth() <= 4));
    }

    #[test]
    fn parse_words() {
        assert_eq!(word("z[2;5]", 4).letters()[0], z(2, 1, 4));
        assert_eq!(word("1", 4).depth(), 0);
        assert!(Word::parse("z[0;1]", 4).is_err());
        assert!(Word::parse("z[1,1]", 4).is_err());
        assert_eq!(word("z[1;1;4] z[2;0]", 4).depth(), 2);
        assert_eq!(Word::parse("z[1;1;3]", 4), Err(Error::LevelMismatch(4, 3)));
        assert_eq!("z[1;3;2]".parse::<Letter>().unwrap(), z(1, 1, 2));
    }

    #[test]
    fn bracket_examples() {
        let s = bracket(&LinComb::word(word("z[2;0]", 1)), 12);
        assert_eq!(s, u_series(&"1".parse().unwrap(), 12));
        assert_eq!(
            bracket(&LinComb::word(Word::empty(2)), 5),
            QSeries::one(1, 2, 5)
        );
        let x = LinComb::word(word("z[2;0]", 1));
        let lhs = bracket(&qshuffle_lin(&x, &x).unwrap(), 40);
        let s = bracket(&x, 40);
        assert_eq!(lhs, s.mul(&s).unwrap());
    }

    #[test]
    fn product_formula_example() {
        let p = depth_one_product(1, 1, 0, 0, 1).unwrap();
        let get = |s: &str| p.terms.get(&s.parse::<MDIndex>().unwrap()).cloned();
        assert_eq!(get("1,1"), Some(CycNum::from_int(1, 2)));
        assert_eq!(get("3"), Some(CycNum::from_rat(1, Rat::new(1, 6))));
        assert_eq!(get("1"), Some(CycNum::from_rat(1, Rat::new(-1, 6))));
        assert_eq!(p.terms.len(), 3);
        let u1 = u_series(&"1".parse().unwrap(), 30);
        assert_eq!(p.evaluate(30), u1.mul(&u1).unwrap());
        let q = depth_one_product(1, 2, 1, 0, 3).unwrap();
        assert!(q.terms.keys().all(|k| k.depth() != 1 || k.weights[0] <= 2));
    }

    #[test]
    fn traceform_examples() {
        let s = sym_traceform(&[0], &[1], 4, 5).unwrap();
        assert_eq!(s.coeff(1), CycNum::from_terms(4, &[(1, Rat::from_int(2))]));
        let s = sym_traceform(&[1], &[1], 2, 20).unwrap();
        assert_eq!(
            s,
            u_series(&"1;1;2".parse().unwrap(), 20).scale_rat(&Rat::from_int(2))
        );
        let s = sym_traceform_level_one(&[7, 3], 15);
        let t = u_series(&"7,3".parse().unwrap(), 15)
            .add(&u_series(&"3,7".parse().unwrap(), 15))
            .unwrap();
        assert_eq!(s, t);
        let id = SignedPermutation {
            sigma: vec![0, 1],
            signs: vec![1, 1],
        };
        let idx: MDIndex = "2,3;1,2;5".parse().unwrap();
        assert_eq!(id.act(&idx), (1, idx.clone()));
    }

    #[test]
    fn hoffman_small() {
        assert!(hoffman_symmetric_sum_check(&[z(3, 1, 2)]).unwrap());
        assert!(hoffman_symmetric_sum_check(&[z(1, 0, 1), z(2, 0, 1)]).unwrap());
        assert!(hoffman_symmetric_sum_check(&[z(1, 0, 3), z(2, 1, 3), z(1, 2, 3)]).unwrap());
    }

    #[test]
    fn grid_small() {
        for level in 1..=2 {
            let r = homomorphism_grid(2, 2, level, 16).unwrap();
            assert!(r.failures.is_empty(), "{:?}", r.failures);
        }
    }

    #[test]
    fn fast_pair_matches_generic() {
        let mut fb = FastBracket::new(3, 14);
        let w = word("z[2;1] z[1;2]", 3);
        let v = word("z[3;0]", 3);
        let prod = qshuffle(&w, &v).unwrap();
        assert_eq!(fast_pair(&mut fb, &w, &v, &prod), Some(true));
        let lhs = bracket(&prod, 14);
        let rhs = bracket(&LinComb::word(w), 14)
            .mul(&bracket(&LinComb::word(v), 14))
            .unwrap();
        assert_eq!(lhs, rhs);
    }
}
