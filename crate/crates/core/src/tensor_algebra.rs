//! Truncated free tensor algebra over the alphabet `1..=d`.
//!
//! Tensors are stored sparsely as a map from [`Word`] to coefficient. Words
//! are ordered by length first and then lexicographically, which is also the
//! order used for serialization.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A word over the alphabet `1..=d`. The empty word indexes level 0.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn new(letters: Vec<u16>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(i: u16) -> Self {
        Word(vec![i])
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Checks that every letter lies in `1..=dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l as usize > dim) {
            Some(l) => Err(Error::InvalidWord {
                word: self.to_string(),
                reason: format!("letter {l} outside 1..={dim}"),
            }),
            None => Ok(()),
        }
    }

    /// All words of length at most `depth` over `1..=dim`, in canonical order.
    pub fn all(dim: usize, depth: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut level = vec![Word::empty()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * dim);
            for w in &level {
                for l in 1..=dim as u16 {
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses comma-joined letters; the empty string is the empty word.
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split(',')
            .map(|p| {
                p.trim().parse::<u16>().map_err(|_| Error::InvalidWord {
                    word: s.to_string(),
                    reason: format!("cannot parse letter {p:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl From<&[u16]> for Word {
    fn from(v: &[u16]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[u16; N]> for Word {
    fn from(v: [u16; N]) -> Self {
        Word(v.to_vec())
    }
}

/// All interleavings of `u` and `v`, with multiplicities.
pub fn shuffle_words(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    let mut out = BTreeMap::new();
    let mut buf = Vec::with_capacity(u.len() + v.len());
    riffle(u.letters(), v.letters(), &mut buf, &mut out);
    out
}

fn riffle(u: &[u16], v: &[u16], buf: &mut Vec<u16>, out: &mut BTreeMap<Word, u64>) {
    if u.is_empty() || v.is_empty() {
        let mut w = buf.clone();
        w.extend_from_slice(u);
        w.extend_from_slice(v);
        *out.entry(Word(w)).or_insert(0) += 1;
        return;
    }
    buf.push(u[0]);
    riffle(&u[1..], v, buf, out);
    buf.pop();
    buf.push(v[0]);
    riffle(u, &v[1..], buf, out);
    buf.pop();
}

/// Shuffle of a list of words, `e_{w1} ⧢ ... ⧢ e_{wk}`, as word multiplicities.
pub fn shuffle_many(words: &[Word]) -> BTreeMap<Word, u64> {
    let mut acc: BTreeMap<Word, u64> = BTreeMap::from([(Word::empty(), 1)]);
    for w in words {
        let mut next = BTreeMap::new();
        for (u, cu) in &acc {
            for (x, cx) in shuffle_words(u, w) {
                *next.entry(x).or_insert(0) += cu * cx;
            }
        }
        acc = next;
    }
    acc
}

/// Largest deviation of the level-0 coefficient from one accepted by
/// [`FreeTensor::log`] for floating-point tensors.
pub const LEVEL0_TOL: f64 = 1e-12;

/// Element of the truncated tensor algebra `T^{(M)}(R^d)`.
#[derive(Clone, PartialEq)]
pub struct FreeTensor<S> {
    dim: usize,
    depth: usize,
    coeffs: BTreeMap<Word, S>,
}

impl<S: Scalar> fmt::Debug for FreeTensor<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FreeTensor")
            .field("dim", &self.dim)
            .field("depth", &self.depth)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<S: Scalar> FreeTensor<S> {
    pub fn zero(dim: usize, depth: usize) -> Self {
        FreeTensor {
            dim,
            depth,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize, depth: usize) -> Self {
        let mut t = Self::zero(dim, depth);
        t.coeffs.insert(Word::empty(), S::one());
        t
    }

    /// `c · e_w`; words longer than `depth` give the zero tensor.
    pub fn basis(dim: usize, depth: usize, word: Word, c: S) -> Result<Self> {
        Self::from_terms(dim, depth, [(word, c)])
    }

    /// The level-1 tensor with coordinates `v`.
    pub fn from_vector(v: &[S], depth: usize) -> Self {
        let mut t = Self::zero(v.len(), depth);
        if depth >= 1 {
            for (k, x) in v.iter().enumerate() {
                t.add_term(Word::letter(k as u16 + 1), x.clone());
            }
        }
        t
    }

    /// Builds a tensor by summing terms; terms beyond `depth` are dropped.
    pub fn from_terms(
        dim: usize,
        depth: usize,
        terms: impl IntoIterator<Item = (Word, S)>,
    ) -> Result<Self> {
        let mut t = Self::zero(dim, depth);
        for (w, c) in terms {
            w.validate(dim)?;
            t.add_term(w, c);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.coeffs.get(w).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeff_of(&self, letters: &[u16]) -> S {
        self.coeff(&Word::from(letters))
    }

    pub fn level0(&self) -> S {
        self.coeff(&Word::empty())
    }

    /// Nonzero terms in canonical word order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.coeffs.iter()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// Adds `c` to the coefficient of `w` (ignored beyond the depth).
    /// The caller guarantees that `w` uses valid letters.
    pub(crate) fn add_term(&mut self, w: Word, c: S) {
        if w.len() > self.depth || c.is_zero() {
            return;
        }
        match self.coeffs.entry(w) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn set(&mut self, w: Word, c: S) -> Result<()> {
        w.validate(self.dim)?;
        if w.len() > self.depth {
            return Err(Error::InvalidWord {
                word: w.to_string(),
                reason: format!("longer than depth {}", self.depth),
            });
        }
        if c.is_zero() {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, c);
        }
        Ok(())
    }

    /// Projection onto level `m`.
    pub fn level(&self, m: usize) -> Self {
        FreeTensor {
            dim: self.dim,
            depth: self.depth,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(w, _)| w.len() == m)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn truncate(&self, depth: usize) -> Self {
        let depth = depth.min(self.depth);
        FreeTensor {
            dim: self.dim,
            depth,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(w, _)| w.len() <= depth)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.truncate(other.depth);
        for (w, c) in &other.coeffs {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim, self.depth);
        for (w, c) in &self.coeffs {
            out.add_term(w.clone(), c.clone() * s.clone());
        }
        out
    }

    /// Concatenation (tensor) product, truncated at the smaller depth.
    pub fn concat_product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let depth = self.depth.min(other.depth);
        let mut out = Self::zero(self.dim, depth);
        for (u, a) in &self.coeffs {
            if u.len() > depth {
                break;
            }
            for (v, b) in &other.coeffs {
                if u.len() + v.len() > depth {
                    break;
                }
                out.add_term(u.concat(v), a.clone() * b.clone());
            }
        }
        Ok(out)
    }

    /// Shuffle product, truncated at the smaller depth.
    pub fn shuffle_product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let depth = self.depth.min(other.depth);
        let mut out = Self::zero(self.dim, depth);
        for (u, a) in &self.coeffs {
            for (v, b) in &other.coeffs {
                if u.len() + v.len() > depth {
                    break;
                }
                let ab = a.clone() * b.clone();
                for (w, m) in shuffle_words(u, v) {
                    out.add_term(w, ab.clone() * S::from_u64(m).expect("count fits scalar"));
                }
            }
        }
        Ok(out)
    }

    /// Truncated exponential; requires a zero level-0 coefficient.
    pub fn exp(&self) -> Result<Self> {
        if !self.level0().is_zero() {
            return Err(Error::LevelZero {
                expected: "0",
                got: format!("{:?}", self.level0()),
            });
        }
        let one = Self::one(self.dim, self.depth);
        let mut r = one.clone();
        for m in (1..=self.depth).rev() {
            let inv = S::one() / S::from_usize(m).expect("depth fits scalar");
            r = one.add(&self.concat_product(&r)?.scale(&inv))?;
        }
        Ok(r)
    }

    /// Truncated logarithm; requires a level-0 coefficient within
    /// [`LEVEL0_TOL`] of one, and treats it as exactly one.
    pub fn log(&self) -> Result<Self> {
        let c0 = self.level0();
        if !c0.is_one() && !((c0.as_f64() - 1.0).abs() <= LEVEL0_TOL) {
            return Err(Error::LevelZero {
                expected: "1",
                got: format!("{c0:?}"),
            });
        }
        let one = Self::one(self.dim, self.depth);
        let x = self.sub(&one.scale(&c0))?;
        if self.depth == 0 {
            return Ok(Self::zero(self.dim, 0));
        }
        let inv = |m: usize| S::one() / S::from_usize(m).expect("depth fits scalar");
        let mut r = one.scale(&inv(self.depth));
        for m in (1..self.depth).rev() {
            r = one.scale(&inv(m)).sub(&x.concat_product(&r)?)?;
        }
        x.concat_product(&r)
    }

    /// `⟨self, other⟩ = Σ_w self_w other_w` over words up to the smaller depth.
    pub fn pair(&self, other: &Self) -> Result<S> {
        self.check_dim(other)?;
        let depth = self.depth.min(other.depth);
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = S::zero();
        for (w, c) in &small.coeffs {
            if w.len() > depth {
                break;
            }
            if let Some(d) = large.coeffs.get(w) {
                acc = acc + c.clone() * d.clone();
            }
        }
        Ok(acc)
    }

    /// `⟨self, Σ_w m_w e_w⟩` for an integer-weighted word combination.
    pub fn pair_counts(&self, combo: &BTreeMap<Word, u64>) -> S {
        let mut acc = S::zero();
        for (w, m) in combo {
            if w.len() <= self.depth {
                if let Some(c) = self.coeffs.get(w) {
                    acc = acc + c.clone() * S::from_u64(*m).expect("count fits scalar");
                }
            }
        }
        acc
    }

    /// Unnormalized symmetrization: the coefficient of `w` becomes the sum
    /// of the coefficients of all letter permutations of `w`, counted over
    /// permutations of positions.
    pub fn symmetrize(&self) -> Self {
        let mut groups: BTreeMap<Vec<u16>, S> = BTreeMap::new();
        for (w, c) in &self.coeffs {
            let mut key = w.letters().to_vec();
            key.sort_unstable();
            let e = groups.entry(key).or_insert_with(S::zero);
            *e = e.clone() + c.clone();
        }
        let mut out = Self::zero(self.dim, self.depth);
        for (key, sum) in groups {
            let stab = S::from_u64(stabilizer_order(&key)).expect("factorial fits scalar");
            let total = sum * stab;
            for perm in distinct_permutations(&key) {
                out.add_term(Word(perm), total.clone());
            }
        }
        out
    }

    /// Coefficientwise comparison: `|a - b| <= tol · max(1, |a|, |b|)`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let keys: std::collections::BTreeSet<&Word> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .all(|w| crate::scalar::approx_eq(&self.coeff(w), &other.coeff(w), tol))
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&Word> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.into_iter()
            .map(|w| (self.coeff(w).as_f64() - other.coeff(w).as_f64()).abs())
            .fold(0.0, f64::max)
    }

    /// Converts the coefficients to another scalar type through `f64`.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FreeTensor<T> {
        let mut out = FreeTensor::zero(self.dim, self.depth);
        for (w, c) in &self.coeffs {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    /// Serializes to `{"dim":d,"depth":M,"coeffs":{"":1.0,"1,2":..}}` with
    /// keys in canonical word order.
    pub fn to_json(&self) -> Result<String> {
        let mut s = format!("{{\"dim\":{},\"depth\":{},\"coeffs\":{{", self.dim, self.depth);
        for (k, (w, c)) in self.coeffs.iter().enumerate() {
            let x = c.as_f64();
            if !x.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient at word {w}")));
            }
            if k > 0 {
                s.push(',');
            }
            let num = serde_json::to_string(&x).map_err(|e| Error::Parse(e.to_string()))?;
            s.push_str(&format!("\"{w}\":{num}"));
        }
        s.push_str("}}");
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Parse(format!("missing or invalid field {name:?}")))
        };
        let dim = field("dim")?;
        let depth = field("depth")?;
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("missing object field \"coeffs\"".into()))?;
        let mut t = Self::zero(dim, depth);
        for (k, c) in coeffs {
            let w: Word = k.parse()?;
            let x = c
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("coefficient of {k:?} is not a number")))?;
            let s = S::from_f64(x)
                .ok_or_else(|| Error::Parse(format!("coefficient of {k:?} not representable")))?;
            t.set(w, s)?;
        }
        Ok(t)
    }
}

fn stabilizer_order(sorted: &[u16]) -> u64 {
    let mut out = 1u64;
    let mut run = 0u64;
    for (k, l) in sorted.iter().enumerate() {
        if k > 0 && sorted[k - 1] == *l {
            run += 1;
        } else {
            run = 1;
        }
        out *= run;
    }
    out
}

/// Distinct rearrangements of a sorted letter sequence, in lexicographic order.
fn distinct_permutations(sorted: &[u16]) -> Vec<Vec<u16>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}
