//! Symmetric means, polykays and signature polykays computed from i.i.d.
//! samples of signature features, with exact and asymptotic covariances.
//!
//! Estimators act on *groups* of words (see [`crate::moment_cumulant`]): a
//! partition of tuple positions is turned into the per-block groups of its
//! sub-words, and every nonempty sub-word is treated as one variable.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::combinatorics::moebius::{moebius, moebius_of_type};
use crate::combinatorics::ordered::orp_table;
use crate::combinatorics::partition::{for_each_partition, refinements, SetPartition};
use crate::error::{Error, Result};
use crate::moment_cumulant::{
    groups_cumulant, groups_moment, orp_moment_weight, CachedModel, TupleFamily,
};
use crate::report::{fmt_f64, fmt_opt, Record};
use crate::scalar::Scalar;
use crate::tensor_algebra::{FreeTensor, Word};

/// Per-block word groups of a partition.
pub type Groups = Vec<Vec<Word>>;

/// Sorts words within groups and groups among themselves.
pub fn canonical_groups(groups: &[Vec<Word>]) -> Groups {
    let mut g: Groups = groups
        .iter()
        .map(|grp| {
            let mut grp = grp.clone();
            grp.sort();
            grp
        })
        .collect();
    g.sort();
    g
}

/// Signature coordinates `⟨X_l, e_w⟩` of `n` samples, stored by word.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleFeatures<S> {
    n: usize,
    index: HashMap<Word, usize>,
    columns: Vec<Vec<S>>,
}

impl<S: Scalar> SampleFeatures<S> {
    /// Builds features from named columns of equal length `n ≥ 1`.
    pub fn from_columns(columns: impl IntoIterator<Item = (Word, Vec<S>)>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut cols = Vec::new();
        let mut n = None;
        for (w, c) in columns {
            let len = *n.get_or_insert(c.len());
            if c.len() != len {
                return Err(Error::InvalidArgument(format!(
                    "column {w} has {} samples, expected {len}",
                    c.len()
                )));
            }
            if w.is_empty() {
                continue;
            }
            index.insert(w, cols.len());
            cols.push(c);
        }
        let n = n.unwrap_or(0);
        if n == 0 {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        Ok(SampleFeatures {
            n,
            index,
            columns: cols,
        })
    }

    /// Every word up to the smallest sample depth, read from sample tensors.
    pub fn from_tensors(samples: &[FreeTensor<S>]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
        let dim = first.dim();
        if let Some(t) = samples.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, t.dim()));
        }
        let depth = samples.iter().map(FreeTensor::depth).min().unwrap_or(0);
        Self::from_columns(
            Word::all(dim, depth)
                .into_iter()
                .skip(1)
                .map(|w| {
                    let col = samples.iter().map(|t| t.coeff(&w)).collect();
                    (w, col)
                }),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_word(&self, w: &Word) -> bool {
        w.is_empty() || self.index.contains_key(w)
    }

    pub fn column(&self, w: &Word) -> Result<&[S]> {
        self.index
            .get(w)
            .map(|&k| self.columns[k].as_slice())
            .ok_or_else(|| Error::InvalidWord {
                word: w.to_string(),
                reason: "no feature column for this word".into(),
            })
    }

    /// `⟨X_l, e_w⟩`; the empty word gives one.
    pub fn value(&self, l: usize, w: &Word) -> Result<S> {
        if w.is_empty() {
            return Ok(S::one());
        }
        Ok(self.column(w)?[l].clone())
    }

    /// Features of the samples listed in `rows` (repetitions allowed).
    pub fn select(&self, rows: &[usize]) -> Self {
        SampleFeatures {
            n: rows.len(),
            index: self.index.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r].clone()).collect())
                .collect(),
        }
    }
}

/// `(n)_k = n (n-1) ⋯ (n-k+1)`.
pub fn falling_factorial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n as i64 - i as i64)
    })
}

/// Symmetric means and polykays over one sample, with memoized power sums
/// `Σ_l ∏_w ⟨X_l, e_w⟩` keyed by the sorted word multiset.
pub struct UStatistics<'a, S> {
    features: &'a SampleFeatures<S>,
    power_sums: RefCell<HashMap<Vec<Word>, S>>,
    means: RefCell<HashMap<Groups, S>>,
    kays: RefCell<HashMap<Groups, S>>,
}

impl<'a, S: Scalar> UStatistics<'a, S> {
    pub fn new(features: &'a SampleFeatures<S>) -> Self {
        UStatistics {
            features,
            power_sums: RefCell::new(HashMap::new()),
            means: RefCell::new(HashMap::new()),
            kays: RefCell::new(HashMap::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.features.n()
    }

    pub fn features(&self) -> &SampleFeatures<S> {
        self.features
    }

    fn power_sum(&self, mut words: Vec<Word>) -> Result<S> {
        words.sort();
        if let Some(v) = self.power_sums.borrow().get(&words) {
            return Ok(v.clone());
        }
        let cols = words
            .iter()
            .filter(|w| !w.is_empty())
            .map(|w| self.features.column(w))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = S::zero();
        for l in 0..self.n() {
            let mut p = S::one();
            for c in &cols {
                p = p * c[l].clone();
            }
            acc = acc + p;
        }
        self.power_sums.borrow_mut().insert(words, acc.clone());
        Ok(acc)
    }

    /// `μ̂_n(a) = (1/(n)_k) Σ^{≠}_{i_1..i_k} ∏_j F_j(X_{i_j})` for the groups
    /// `F_j` of `a`, by inclusion–exclusion over index coincidences.
    pub fn symmetric_mean(&self, groups: &[Vec<Word>]) -> Result<S> {
        let key = canonical_groups(groups);
        if let Some(v) = self.means.borrow().get(&key) {
            return Ok(v.clone());
        }
        let k = key.len();
        if self.n() < k {
            return Err(Error::InsufficientSamples {
                needed: k,
                got: self.n(),
            });
        }
        let mut total = S::zero();
        let mut err = None;
        for_each_partition(k, |pi| {
            if err.is_some() {
                return;
            }
            let blocks = pi.blocks();
            let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
            let mut term = S::from_int(moebius_of_type(&sizes));
            for b in &blocks {
                let words: Vec<Word> = b.iter().flat_map(|&j| key[j].iter().cloned()).collect();
                match self.power_sum(words) {
                    Ok(p) => term = term * p,
                    Err(e) => err = Some(e),
                }
            }
            total = total.clone() + term;
        });
        if let Some(e) = err {
            return Err(e);
        }
        let denom = S::from_rational(&BigRational::from_integer(falling_factorial(self.n(), k)));
        let v = total / denom;
        self.means.borrow_mut().insert(key, v.clone());
        Ok(v)
    }

    /// The same symmetric mean by direct summation over distinct index
    /// tuples; `O(n^k)`, used as an oracle.
    pub fn symmetric_mean_naive(&self, groups: &[Vec<Word>]) -> Result<S> {
        let k = groups.len();
        let n = self.n();
        if n < k {
            return Err(Error::InsufficientSamples { needed: k, got: n });
        }
        let vals: Vec<Vec<S>> = groups
            .iter()
            .map(|g| {
                (0..n)
                    .map(|l| {
                        g.iter()
                            .try_fold(S::one(), |acc, w| Ok(acc * self.features.value(l, w)?))
                    })
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<_>>()?;
        fn rec<S: Scalar>(j: usize, used: &mut Vec<bool>, prod: S, vals: &[Vec<S>], acc: &mut S) {
            if j == vals.len() {
                *acc = acc.clone() + prod;
                return;
            }
            for l in 0..used.len() {
                if !used[l] {
                    used[l] = true;
                    rec(j + 1, used, prod.clone() * vals[j][l].clone(), vals, acc);
                    used[l] = false;
                }
            }
        }
        let mut acc = S::zero();
        rec(0, &mut vec![false; n], S::one(), &vals, &mut acc);
        Ok(acc / S::from_rational(&BigRational::from_integer(falling_factorial(n, k))))
    }

    /// Polykay `k̂_n(a) = Σ_{b ≤ a} m(b, a) μ̂_n(b)` where `b` ranges over the
    /// partitions of the variables (all words of all groups) refining the
    /// groups. Unbiased for `∏_groups κ(group)`.
    pub fn polykay(&self, groups: &[Vec<Word>]) -> Result<S> {
        let key = canonical_groups(groups);
        if let Some(v) = self.kays.borrow().get(&key) {
            return Ok(v.clone());
        }
        let (vars, a) = flatten_groups(&key);
        if self.n() < vars.len() {
            return Err(Error::InsufficientSamples {
                needed: vars.len(),
                got: self.n(),
            });
        }
        let mut acc = S::zero();
        for b in refinements(&a) {
            let m = moebius(&b, &a)?;
            acc = acc + S::from_int(m) * self.symmetric_mean(&groups_of(&vars, &b))?;
        }
        self.kays.borrow_mut().insert(key, acc.clone());
        Ok(acc)
    }

    /// Signature polykay `κ̂_n(τ)`, unbiased for `⟨κ_X, e_{τ1} ⧢ ⋯ ⧢ e_{τk}⟩`.
    pub fn signature_polykay(&self, tf: &TupleFamily, form: PolykayForm) -> Result<S> {
        if self.n() < tf.positions() {
            return Err(Error::InsufficientSamples {
                needed: tf.positions(),
                got: self.n(),
            });
        }
        let lengths: Vec<usize> = tf.tuples().iter().map(Word::len).collect();
        let table = orp_table(&lengths)?;
        let mut acc = S::zero();
        for entry in table.iter() {
            let groups = tf.block_words(&entry.partition)?;
            let term = match form {
                PolykayForm::SymmetricMeans => {
                    S::from_rational(&orp_moment_weight(entry.factorial, entry.partition.len()))
                        * self.symmetric_mean(&groups)?
                }
                PolykayForm::BoundaryPolykays => {
                    if entry.boundary.is_zero() {
                        continue;
                    }
                    S::from_rational(&entry.boundary) * self.polykay(&groups)?
                }
            };
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Symmetric mean of the one-block partition: the sample mean of
    /// `∏_j ⟨X, e_{τj}⟩`.
    pub fn mixed_moment_estimate(&self, tf: &TupleFamily) -> Result<S> {
        self.symmetric_mean(&[tf.tuples().to_vec()])
    }
}

/// Which of the two equivalent expressions of the signature polykay to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolykayForm {
    /// `Σ_a (-1)^{|a|-1} (a!/|a|) μ̂_n(a)`; the reference form.
    SymmetricMeans,
    /// `Σ_a ∂(a) k̂_n(a)`.
    BoundaryPolykays,
}

/// Flattens groups into a variable list and the partition of variable
/// indices given by group membership.
pub fn flatten_groups(groups: &[Vec<Word>]) -> (Vec<Word>, SetPartition) {
    let mut vars = Vec::new();
    let mut labels = Vec::new();
    for (g, grp) in groups.iter().enumerate() {
        for w in grp {
            vars.push(w.clone());
            labels.push(g);
        }
    }
    (vars, SetPartition::from_labels(&labels))
}

/// The groups of words induced by a partition of variable indices.
pub fn groups_of(vars: &[Word], p: &SetPartition) -> Groups {
    p.blocks()
        .into_iter()
        .map(|b| b.into_iter().map(|i| vars[i].clone()).collect())
        .collect()
}

/// Provider of generalized cumulants and moments of word groups: either a
/// model (exact) or sample estimates (plug-in).
pub trait CumulantSource<S> {
    /// `∏_groups κ(group)`.
    fn cumulant(&self, groups: &[Vec<Word>]) -> Result<S>;
    /// `∏_groups E[∏ group]`.
    fn moment(&self, groups: &[Vec<Word>]) -> Result<S>;
}

impl<S: Scalar> CumulantSource<S> for CachedModel<'_, S> {
    fn cumulant(&self, groups: &[Vec<Word>]) -> Result<S> {
        groups_cumulant(self, groups)
    }
    fn moment(&self, groups: &[Vec<Word>]) -> Result<S> {
        groups_moment(self, groups)
    }
}

impl<S: Scalar> CumulantSource<S> for UStatistics<'_, S> {
    fn cumulant(&self, groups: &[Vec<Word>]) -> Result<S> {
        self.polykay(groups)
    }
    fn moment(&self, groups: &[Vec<Word>]) -> Result<S> {
        self.symmetric_mean(groups)
    }
}

/// Two word-group partitions on disjoint variable sets `S1`, `S2`.
/// Variables `0..s1` belong to `S1`, the rest to `S2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovarianceQuery {
    vars: Vec<Word>,
    s1: usize,
    a1: SetPartition,
    a2: SetPartition,
}

impl CovarianceQuery {
    pub fn new(groups1: &[Vec<Word>], groups2: &[Vec<Word>]) -> Self {
        let (mut vars, a1) = flatten_groups(groups1);
        let (v2, a2) = flatten_groups(groups2);
        let s1 = vars.len();
        vars.extend(v2);
        CovarianceQuery { vars, s1, a1, a2 }
    }

    pub fn vars(&self) -> &[Word] {
        &self.vars
    }

    pub fn a1(&self) -> &SetPartition {
        &self.a1
    }

    pub fn a2(&self) -> &SetPartition {
        &self.a2
    }

    fn split(&self, c: &SetPartition) -> (SetPartition, SetPartition) {
        let s1: Vec<usize> = (0..self.s1).collect();
        let s2: Vec<usize> = (self.s1..self.vars.len()).collect();
        (c.restrict(&s1), c.restrict(&s2))
    }

    /// `V(a1, a2)`: partitions of `S1 ∪ S2` restricting to `a1` and `a2`
    /// that merge exactly one block of `a1` with one block of `a2`.
    pub fn merged_partitions(&self) -> Vec<SetPartition> {
        let mut out = Vec::new();
        for i in 0..self.a1.len() {
            for j in 0..self.a2.len() {
                let labels: Vec<usize> = (0..self.vars.len())
                    .map(|v| {
                        if v < self.s1 {
                            self.a1.block_of(v)
                        } else {
                            let b = self.a2.block_of(v - self.s1);
                            if b == j {
                                i
                            } else {
                                self.a1.len() + b
                            }
                        }
                    })
                    .collect();
                out.push(SetPartition::from_labels(&labels));
            }
        }
        out
    }
}

/// Exact `Cov(k̂_n(a1), k̂_n(a2)) = Σ_b c(b) κ(b) − κ(a1) κ(a2)` with
/// `c(b) = Σ_{c ≥ b} (n)_{|c|} / ((n)_{|c1|} (n)_{|c2|}) m(c1, a1) m(c2, a2)`,
/// where `c` ranges over partitions of `S1 ∪ S2` with `c ∩ S_i ≤ a_i`.
pub fn polykay_cov_exact<S: Scalar>(
    q: &CovarianceQuery,
    n: usize,
    src: &dyn CumulantSource<S>,
) -> Result<S> {
    let r1 = q.s1;
    let r2 = q.vars.len() - q.s1;
    let needed = r1.max(r2);
    if n < needed {
        return Err(Error::InsufficientSamples { needed, got: n });
    }
    let mut coef: BTreeMap<SetPartition, BigRational> = BTreeMap::new();
    let mut err = None;
    for_each_partition(q.vars.len(), |c| {
        if err.is_some() {
            return;
        }
        let (c1, c2) = q.split(c);
        if !c1.refines(&q.a1).unwrap_or(false) || !c2.refines(&q.a2).unwrap_or(false) {
            return;
        }
        let ratio = BigRational::new(
            falling_factorial(n, c.len()),
            falling_factorial(n, c1.len()) * falling_factorial(n, c2.len()),
        );
        let m = match (moebius(&c1, &q.a1), moebius(&c2, &q.a2)) {
            (Ok(x), Ok(y)) => x * y,
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                return;
            }
        };
        let w = ratio * BigRational::from_integer(m.into());
        if w.is_zero() {
            return;
        }
        for b in refinements(c) {
            let e = coef.entry(b).or_insert_with(BigRational::zero);
            *e += &w;
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut acc = S::zero();
    for (b, w) in &coef {
        if !w.is_zero() {
            acc = acc + S::from_rational(w) * src.cumulant(&groups_of(&q.vars, b))?;
        }
    }
    let k1 = src.cumulant(&groups_of(&q.vars[..q.s1], &q.a1))?;
    let k2 = src.cumulant(&groups_of(&q.vars[q.s1..], &q.a2))?;
    Ok(acc - k1 * k2)
}

/// Leading coefficient `𝒱(a1, a2) = lim n·Cov(k̂_n(a1), k̂_n(a2))`.
///
/// For each block `A` of `a1` and `B` of `a2`, sums `κ` over the
/// partitions of `A ∪ B` whose every block meets both `A` and `B`, times the
/// cumulants of the remaining blocks of `a1` and `a2`.
pub fn polykay_cov_asymptotic<S: Scalar>(
    q: &CovarianceQuery,
    src: &dyn CumulantSource<S>,
) -> Result<S> {
    let blocks1 = q.a1.blocks();
    let blocks2: Vec<Vec<usize>> = q
        .a2
        .blocks()
        .into_iter()
        .map(|b| b.into_iter().map(|v| v + q.s1).collect())
        .collect();
    let mut acc = S::zero();
    for (i, ba) in blocks1.iter().enumerate() {
        for (j, bb) in blocks2.iter().enumerate() {
            let rest: Groups = blocks1
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, b)| b)
                .chain(blocks2.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, b)| b))
                .map(|b| b.iter().map(|&v| q.vars[v].clone()).collect())
                .collect();
            let union: Vec<usize> = ba.iter().chain(bb).copied().collect();
            let mut err = None;
            for_each_partition(union.len(), |p| {
                if err.is_some() {
                    return;
                }
                let blocks = p.blocks();
                let connected = blocks
                    .iter()
                    .all(|blk| blk.iter().any(|&t| t < ba.len()) && blk.iter().any(|&t| t >= ba.len()));
                if !connected {
                    return;
                }
                let mut groups = rest.clone();
                groups.extend(
                    blocks
                        .iter()
                        .map(|blk| blk.iter().map(|&t| q.vars[union[t]].clone()).collect()),
                );
                match src.cumulant(&groups) {
                    Ok(v) => acc = acc.clone() + v,
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    Ok(acc)
}

/// The same leading coefficient through moments:
/// `Σ_c m(c1, a1) m(c2, a2) r(c) μ(c)` with `r(c) = 1` when `c` merges one
/// pair of blocks across `S1`, `S2`, `r(c) = -|c1||c2|` when it merges none,
/// and `0` otherwise (the `1/n` coefficient of the falling-factorial ratio).
pub fn polykay_cov_asymptotic_via_moments<S: Scalar>(
    q: &CovarianceQuery,
    src: &dyn CumulantSource<S>,
) -> Result<S> {
    let mut acc = S::zero();
    let mut err = None;
    for_each_partition(q.vars.len(), |c| {
        if err.is_some() {
            return;
        }
        let (c1, c2) = q.split(c);
        if !c1.refines(&q.a1).unwrap_or(false) || !c2.refines(&q.a2).unwrap_or(false) {
            return;
        }
        let merged = c1.len() + c2.len() - c.len();
        let r = match merged {
            0 => -((c1.len() * c2.len()) as i64),
            1 => 1,
            _ => return,
        };
        let m = moebius(&c1, &q.a1).unwrap() * moebius(&c2, &q.a2).unwrap();
        match src.moment(&groups_of(&q.vars, c)) {
            Ok(v) => acc = acc.clone() + S::from_int(m * r) * v,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// `𝒱(τ1, τ2) = Σ_{a1, a2} ∂(a1) ∂(a2) 𝒱(a1, a2)`, the asymptotic covariance
/// of `√n κ̂_n(τ1)` and `√n κ̂_n(τ2)`.
pub fn signature_polykay_asymptotic_cov<S: Scalar>(
    tf1: &TupleFamily,
    tf2: &TupleFamily,
    src: &dyn CumulantSource<S>,
) -> Result<S> {
    let t1 = orp_table(&tf1.tuples().iter().map(Word::len).collect::<Vec<_>>())?;
    let t2 = orp_table(&tf2.tuples().iter().map(Word::len).collect::<Vec<_>>())?;
    let mut acc = S::zero();
    for e1 in t1.iter().filter(|e| !e.boundary.is_zero()) {
        let g1 = tf1.block_words(&e1.partition)?;
        for e2 in t2.iter().filter(|e| !e.boundary.is_zero()) {
            let g2 = tf2.block_words(&e2.partition)?;
            let w = S::from_rational(&(&e1.boundary * &e2.boundary));
            acc = acc + w * polykay_cov_asymptotic(&CovarianceQuery::new(&g1, &g2), src)?;
        }
    }
    Ok(acc)
}

fn check_gap_args(i: usize, j: usize, b: &[f64], sigma: &[Vec<f64>], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = b.len();
    if sigma.len() != d || sigma.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidModel("σ must be a d×d matrix".into()));
    }
    if i == 0 || j == 0 || i > d || j > d {
        return Err(Error::InvalidArgument(format!("entry ({i},{j}) outside 1..={d}")));
    }
    Ok(())
}

/// `c_ij` as printed for the drift-diffusion example: the claimed value of
/// `Var(⟨μ̂², e_ij⟩) − Var(⟨κ̂², e_ij⟩)` for `N` unit-window samples, indices
/// 1-based. See [`driftbm_variance_gap_exact`] for the value that the
/// estimators actually have.
pub fn driftbm_variance_gap(
    i: usize,
    j: usize,
    b: &[f64],
    sigma: &[Vec<f64>],
    n: usize,
) -> Result<f64> {
    check_gap_args(i, j, b, sigma, n)?;
    let (bi, bj) = (b[i - 1], b[j - 1]);
    let s = |x: usize, y: usize| sigma[x - 1][y - 1];
    let nf = n as f64;
    Ok((2.0 * bi * bi * bj * bj
        + bi * bj * (s(i, j) + s(j, i))
        + bi * bi * s(j, j)
        + bj * bj * s(i, i)
        + 4.0 * bi * bj * s(i, j))
        / (4.0 * nf)
        - (s(i, i) * s(j, j) + s(i, j) * s(i, j)) / (4.0 * nf * (nf - 1.0)))
}

/// Exact `Var(⟨μ̂², e_ij⟩) − Var(⟨κ̂², e_ij⟩)` for the drift-diffusion model:
/// `(1/4N)[b_i b_j (σ_ij + σ_ji) + b_i² σ_jj + b_j² σ_ii]
///  − (σ_ii σ_jj + σ_ij²) / (4N(N−1))`.
///
/// The area part of the level-2 signature is uncorrelated with the
/// increment, so only the symmetric part `½ X^i X^j` contributes to the
/// cross covariance.
pub fn driftbm_variance_gap_exact(
    i: usize,
    j: usize,
    b: &[f64],
    sigma: &[Vec<f64>],
    n: usize,
) -> Result<f64> {
    check_gap_args(i, j, b, sigma, n)?;
    let (bi, bj) = (b[i - 1], b[j - 1]);
    let s = |x: usize, y: usize| sigma[x - 1][y - 1];
    let nf = n as f64;
    Ok((bi * bj * (s(i, j) + s(j, i)) + bi * bi * s(j, j) + bj * bj * s(i, i)) / (4.0 * nf)
        - (s(i, i) * s(j, j) + s(i, j) * s(i, j)) / (4.0 * nf * (nf - 1.0)))
}

/// One line of an estimate report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub tuple_family: String,
    pub estimate: f64,
    pub asymptotic_std: Option<f64>,
    pub n: usize,
}

impl Record for EstimateRow {
    const HEADER: &'static [&'static str] = &["tuple_family", "estimate", "asymptotic_std", "n"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.tuple_family.clone(),
            fmt_f64(self.estimate),
            fmt_opt(self.asymptotic_std),
            self.n.to_string(),
        ]
    }
}

/// Plug-in standard error `sqrt(𝒱/n)`; `None` when the variance estimate is
/// not positive.
pub fn standard_error(v: f64, n: usize) -> Option<f64> {
    (v > 0.0 && v.is_finite()).then(|| (v / n as f64).sqrt())
}

/// What an estimate report estimates for each tuple family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    /// `E[∏_j ⟨X, e_{τj}⟩]` by the sample mean.
    Moment,
    /// `⟨κ_X, e_{τ1} ⧢ ⋯ ⧢ e_{τk}⟩` by the signature polykay.
    Cumulant,
}

/// One row per tuple family. With `with_std`, adds the plug-in standard
/// error: `𝒱(τ, τ)` for cumulants, the unbiased variance of the product for
/// moments.
pub fn estimate_table(
    u: &UStatistics<'_, f64>,
    families: &[TupleFamily],
    mode: EstimateMode,
    with_std: bool,
) -> Result<Vec<EstimateRow>> {
    families
        .iter()
        .map(|tf| {
            let (estimate, var) = match mode {
                EstimateMode::Moment => {
                    let est = u.mixed_moment_estimate(tf)?;
                    let var = if with_std {
                        let g = tf.tuples().to_vec();
                        let doubled: Vec<Word> = g.iter().chain(&g).cloned().collect();
                        Some(u.symmetric_mean(&[doubled])? - u.symmetric_mean(&[g.clone(), g])?)
                    } else {
                        None
                    };
                    (est, var)
                }
                EstimateMode::Cumulant => {
                    let est = u.signature_polykay(tf, PolykayForm::SymmetricMeans)?;
                    let var = if with_std {
                        Some(signature_polykay_asymptotic_cov(tf, tf, u)?)
                    } else {
                        None
                    };
                    (est, var)
                }
            };
            Ok(EstimateRow {
                tuple_family: tf.to_string(),
                estimate,
                asymptotic_std: var.and_then(|v| standard_error(v, u.n())),
                n: u.n(),
            })
        })
        .collect()
}
