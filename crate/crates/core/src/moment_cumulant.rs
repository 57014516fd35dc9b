//! Signature moments and cumulants, generalized moments and cumulants over
//! partitions of tuple positions, and the ordered-partition expansions that
//! connect them.
//!
//! A *group* is a list of words whose signature coordinates are multiplied
//! (for moments) or taken as the arguments of one joint cumulant. The
//! generalized moment or cumulant of a partition is the product over its
//! blocks, each block contributing the group of its per-tuple sub-words.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::combinatorics::ordered::{orp_table, same_on_chains};
use crate::combinatorics::partition::{for_each_partition, refinements};
use crate::combinatorics::{ChainFamily, SetPartition};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor_algebra::{shuffle_many, shuffle_words, FreeTensor, Word};

/// Source of exact expectations `E[⟨T, e_{w1}⟩ ⋯ ⟨T, e_{wm}⟩]`.
pub trait DistributionModel<S> {
    fn dim(&self) -> usize;

    /// Longest word whose coordinate the model can evaluate.
    fn max_word_len(&self) -> usize;

    /// Mixed moment of the listed coordinates; the empty list gives one.
    fn mixed_moment(&self, words: &[Word]) -> Result<S>;
}

impl<S, M: DistributionModel<S> + ?Sized> DistributionModel<S> for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn max_word_len(&self) -> usize {
        (**self).max_word_len()
    }
    fn mixed_moment(&self, words: &[Word]) -> Result<S> {
        (**self).mixed_moment(words)
    }
}

/// Memoizes mixed moments (keyed by the sorted word list) of a model.
pub struct CachedModel<'m, S> {
    inner: &'m dyn DistributionModel<S>,
    moments: RefCell<HashMap<Vec<Word>, S>>,
    cumulants: RefCell<HashMap<Vec<Word>, S>>,
}

impl<'m, S: Scalar> CachedModel<'m, S> {
    pub fn new(inner: &'m dyn DistributionModel<S>) -> Self {
        CachedModel {
            inner,
            moments: RefCell::new(HashMap::new()),
            cumulants: RefCell::new(HashMap::new()),
        }
    }

    /// Joint cumulant of the listed coordinates, memoized.
    pub fn joint_cumulant(&self, words: &[Word]) -> Result<S> {
        let mut key = words.to_vec();
        key.sort();
        if let Some(v) = self.cumulants.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = joint_cumulant(self, &key)?;
        self.cumulants.borrow_mut().insert(key, v.clone());
        Ok(v)
    }
}

impl<S: Scalar> DistributionModel<S> for CachedModel<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn max_word_len(&self) -> usize {
        self.inner.max_word_len()
    }
    fn mixed_moment(&self, words: &[Word]) -> Result<S> {
        let mut key = words.to_vec();
        key.sort();
        if let Some(v) = self.moments.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = self.inner.mixed_moment(&key)?;
        self.moments.borrow_mut().insert(key, v.clone());
        Ok(v)
    }
}

fn check_words<S>(model: &dyn DistributionModel<S>, words: &[Word]) -> Result<()> {
    for w in words {
        w.validate(model.dim())?;
        if w.len() > model.max_word_len() {
            return Err(Error::DepthShortfall {
                requested: w.len(),
                available: model.max_word_len(),
            });
        }
    }
    Ok(())
}

/// `(-1)^{k-1} (k-1)!`, the Möbius value `m(0̂, 1̂)` on `P([k])`.
pub(crate) fn full_merge_moebius(k: usize) -> i64 {
    let f: i64 = (1..k as i64).product();
    if k % 2 == 1 {
        f
    } else {
        -f
    }
}

/// Classical joint cumulant of the listed coordinates via the partition
/// lattice: `Σ_π (-1)^{|π|-1} (|π|-1)! ∏_{B ∈ π} E[∏_{w ∈ B} ⟨T, e_w⟩]`.
pub fn joint_cumulant<S: Scalar>(model: &dyn DistributionModel<S>, words: &[Word]) -> Result<S> {
    check_words(model, words)?;
    let mut acc = S::zero();
    let mut err = None;
    for_each_partition(words.len(), |pi| {
        if err.is_some() {
            return;
        }
        let mut term = S::from_int(full_merge_moebius(pi.len()));
        for block in pi.blocks() {
            let ws: Vec<Word> = block.iter().map(|&i| words[i].clone()).collect();
            match model.mixed_moment(&ws) {
                Ok(m) => term = term * m,
                Err(e) => err = Some(e),
            }
        }
        acc = acc.clone() + term;
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// `∏_groups E[∏_{w ∈ group} ⟨T, e_w⟩]`.
pub fn groups_moment<S: Scalar>(model: &dyn DistributionModel<S>, groups: &[Vec<Word>]) -> Result<S> {
    let mut acc = S::one();
    for g in groups {
        check_words(model, g)?;
        acc = acc * model.mixed_moment(g)?;
    }
    Ok(acc)
}

/// `∏_groups κ(⟨T, e_w⟩ : w ∈ group)`.
pub fn groups_cumulant<S: Scalar>(model: &CachedModel<'_, S>, groups: &[Vec<Word>]) -> Result<S> {
    let mut acc = S::one();
    for g in groups {
        acc = acc * model.joint_cumulant(g)?;
    }
    Ok(acc)
}

/// Tuples `(τ1, .., τk)` of nonempty words together with their position
/// poset `P_(|τ1|, .., |τk|)`; position `(j, p)` carries letter `τj[p]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleFamily {
    tuples: Vec<Word>,
    family: ChainFamily,
}

impl TupleFamily {
    pub fn new(tuples: Vec<Word>) -> Result<Self> {
        if tuples.is_empty() {
            return Err(Error::InvalidArgument("tuple family is empty".into()));
        }
        if tuples.iter().any(Word::is_empty) {
            return Err(Error::InvalidArgument("tuples must be nonempty words".into()));
        }
        let family = ChainFamily::new(tuples.iter().map(Word::len).collect())?;
        Ok(TupleFamily { tuples, family })
    }

    pub fn single(word: Word) -> Result<Self> {
        Self::new(vec![word])
    }

    pub fn tuples(&self) -> &[Word] {
        &self.tuples
    }

    pub fn family(&self) -> &ChainFamily {
        &self.family
    }

    /// Total number of positions.
    pub fn positions(&self) -> usize {
        self.family.len()
    }

    pub fn letter(&self, e: usize) -> u16 {
        let (j, p) = self.family.locate(e);
        self.tuples[j].letters()[p]
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.tuples.iter().try_for_each(|w| w.validate(dim))
    }

    /// Per-block groups of sub-words `a_i^j = a_i ∩ τ_j` (nonempty ones, in
    /// tuple order, letters in position order).
    pub fn block_words(&self, a: &SetPartition) -> Result<Vec<Vec<Word>>> {
        if a.ground_size() != self.positions() {
            return Err(Error::InvalidPartition(format!(
                "partition of {} elements for {} positions",
                a.ground_size(),
                self.positions()
            )));
        }
        let chains = self.family.chains();
        let mut out = vec![Vec::new(); a.len()];
        for (block, group) in out.iter_mut().enumerate() {
            for (j, chain) in chains.iter().enumerate() {
                let letters: Vec<u16> = chain
                    .iter()
                    .filter(|&&e| a.block_of(e) == block)
                    .map(|&e| self.tuples[j].letters()[e - chain[0]])
                    .collect();
                if !letters.is_empty() {
                    group.push(Word::new(letters));
                }
            }
        }
        Ok(out)
    }

    /// `e_{τ1} ⧢ ⋯ ⧢ e_{τk}` as word multiplicities.
    pub fn shuffle(&self) -> std::collections::BTreeMap<Word, u64> {
        shuffle_many(&self.tuples)
    }
}

impl fmt::Display for TupleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tuples.iter().map(Word::to_string).collect();
        f.write_str(&parts.join(";"))
    }
}

impl FromStr for TupleFamily {
    type Err = Error;

    /// Parses `"1,2;3"`: tuples separated by `;`, letters by `,`.
    fn from_str(s: &str) -> Result<Self> {
        let tuples = s
            .split(';')
            .map(|t| t.parse::<Word>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(tuples)
    }
}

/// `μ_X`: the coefficient of every word up to `depth` is its expectation.
pub fn signature_moments<S: Scalar>(
    model: &dyn DistributionModel<S>,
    depth: usize,
) -> Result<FreeTensor<S>> {
    if depth > model.max_word_len() {
        return Err(Error::DepthShortfall {
            requested: depth,
            available: model.max_word_len(),
        });
    }
    let mut terms = Vec::new();
    for w in Word::all(model.dim(), depth) {
        let m = model.mixed_moment(std::slice::from_ref(&w))?;
        terms.push((w, m));
    }
    FreeTensor::from_terms(model.dim(), depth, terms)
}

/// `κ_X = log μ_X`.
pub fn signature_cumulants<S: Scalar>(mu: &FreeTensor<S>) -> Result<FreeTensor<S>> {
    mu.log()
}

/// `μ_T(a)`: product over blocks of the mixed moment of the block's sub-words.
pub fn generalized_moment<S: Scalar>(
    model: &dyn DistributionModel<S>,
    tf: &TupleFamily,
    a: &SetPartition,
) -> Result<S> {
    groups_moment(model, &tf.block_words(a)?)
}

/// `κ_T(a)`: product over blocks of the joint cumulant of the block's sub-words.
pub fn generalized_cumulant<S: Scalar>(
    model: &CachedModel<'_, S>,
    tf: &TupleFamily,
    a: &SetPartition,
) -> Result<S> {
    groups_cumulant(model, &tf.block_words(a)?)
}

/// `Σ κ_T(b)` over `b ≤ a` that agree with `a` on every tuple; this equals
/// `μ_T(a)` for every partition `a`.
pub fn moment_from_gen_cumulants<S: Scalar>(
    model: &CachedModel<'_, S>,
    tf: &TupleFamily,
    a: &SetPartition,
) -> Result<S> {
    let p = tf.family().poset();
    let mut acc = S::zero();
    for b in refinements(a) {
        if same_on_chains(a, &b, p) {
            acc = acc + generalized_cumulant(model, tf, &b)?;
        }
    }
    Ok(acc)
}

/// Weights used to expand the shuffle cumulant over ordered partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionWeights {
    /// `Σ_a (-1)^{|a|-1} (a!/|a|) μ_X(a)`.
    OrpFactorial,
    /// `Σ_a ∂(a) κ_X(a)`.
    Boundary,
}

/// `(-1)^{|a|-1} a! / |a|` as an exact rational.
pub fn orp_moment_weight(factorial: u64, blocks: usize) -> BigRational {
    let sign = if blocks % 2 == 1 { 1 } else { -1 };
    BigRational::new(BigInt::from(sign) * BigInt::from(factorial), BigInt::from(blocks))
}

/// `⟨κ_X, e_{τ1} ⧢ ⋯ ⧢ e_{τk}⟩` expanded over `Orp(τ)` from generalized
/// moments or generalized cumulants of the model.
pub fn kappa_shuffle_via_moments<S: Scalar>(
    model: &CachedModel<'_, S>,
    tf: &TupleFamily,
    weights: ExpansionWeights,
) -> Result<S> {
    tf.validate(model.dim())?;
    let need = tf.tuples().iter().map(Word::len).max().unwrap_or(0);
    if need > model.max_word_len() {
        return Err(Error::DepthShortfall {
            requested: need,
            available: model.max_word_len(),
        });
    }
    let lengths: Vec<usize> = tf.tuples().iter().map(Word::len).collect();
    let table = orp_table(&lengths)?;
    let mut acc = S::zero();
    for entry in table.iter() {
        let (w, val) = match weights {
            ExpansionWeights::OrpFactorial => (
                orp_moment_weight(entry.factorial, entry.partition.len()),
                generalized_moment(model, tf, &entry.partition),
            ),
            ExpansionWeights::Boundary => {
                if num_traits::Zero::is_zero(&entry.boundary) {
                    continue;
                }
                (
                    entry.boundary.clone(),
                    generalized_cumulant(model, tf, &entry.partition),
                )
            }
        };
        acc = acc + S::from_rational(&w) * val?;
    }
    Ok(acc)
}

/// `⟨κ, e_{τ1} ⧢ ⋯ ⧢ e_{τk}⟩` read off a cumulant tensor.
pub fn shuffle_cumulant<S: Scalar>(kappa: &FreeTensor<S>, tf: &TupleFamily) -> Result<S> {
    tf.validate(kappa.dim())?;
    let total = tf.positions();
    if total > kappa.depth() {
        return Err(Error::DepthShortfall {
            requested: total,
            available: kappa.depth(),
        });
    }
    Ok(kappa.pair_counts(&tf.shuffle()))
}

/// `⟨μ, e_τ⟩ = Σ_{a ∈ Orp(τ)} (1/|a|!) ∏_i ⟨κ, e_{a_i}⟩`, where `a` runs over
/// the splittings of `τ` into consecutive sub-words.
pub fn moment_from_signature_cumulants<S: Scalar>(kappa: &FreeTensor<S>, tau: &Word) -> Result<S> {
    tau.validate(kappa.dim())?;
    if tau.len() > kappa.depth() {
        return Err(Error::DepthShortfall {
            requested: tau.len(),
            available: kappa.depth(),
        });
    }
    if tau.is_empty() {
        return Ok(S::one());
    }
    let tf = TupleFamily::single(tau.clone())?;
    let table = orp_table(&[tau.len()])?;
    let mut acc = S::zero();
    for entry in table.iter() {
        let k = entry.partition.len();
        let mut term = S::one() / S::from_u64((1..=k as u64).product()).expect("small factorial");
        for group in tf.block_words(&entry.partition)? {
            term = term * kappa.coeff(&group[0]);
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// Classical cumulant tensor `π_Sym(log E[exp(X)])` of an `R^d`-valued
/// variable whose coordinates are the single-letter words of `model`.
pub fn classical_cumulant_tensor<S: Scalar>(
    model: &dyn DistributionModel<S>,
    depth: usize,
) -> Result<FreeTensor<S>> {
    let d = model.dim();
    let mut terms = Vec::new();
    for w in Word::all(d, depth) {
        let fact = S::from_u64((1..=w.len() as u64).product()).expect("small factorial");
        let letters: Vec<Word> = w.letters().iter().map(|&l| Word::letter(l)).collect();
        terms.push((w, model.mixed_moment(&letters)? / fact));
    }
    let m = FreeTensor::from_terms(d, depth, terms)?;
    Ok(m.log()?.symmetrize())
}

/// Classical joint cumulant `κ(X_{i1}, .., X_{im})` of level-1 coordinates.
pub fn classical_joint_cumulant<S: Scalar>(
    model: &dyn DistributionModel<S>,
    letters: &[u16],
) -> Result<S> {
    let words: Vec<Word> = letters.iter().map(|&l| Word::letter(l)).collect();
    joint_cumulant(model, &words)
}

/// One entry of an independence-defect table.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectRow<S> {
    pub tau1: Word,
    pub tau2: Word,
    pub value: S,
}

/// Nonempty words over `letters` of length at most `max_len`, canonical order.
pub fn words_over(letters: &[u16], max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut level = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for &l in letters {
                next.push(w.concat(&Word::letter(l)));
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out.sort();
    out
}

/// Pairs `(τ1, τ2)` with `τ1 ∈ I*`, `τ2 ∈ J*` nonempty and
/// `|τ1| + |τ2| ≤ depth`, ordered by `(|τ1| + |τ2|, τ1, τ2)`.
pub fn cross_pairs(left: &[u16], right: &[u16], depth: usize) -> Result<Vec<(Word, Word)>> {
    if let Some(l) = left.iter().find(|l| right.contains(l)) {
        return Err(Error::InvalidArgument(format!(
            "letter {l} appears in both coordinate groups"
        )));
    }
    if left.is_empty() || right.is_empty() {
        return Err(Error::InvalidArgument("coordinate groups must be nonempty".into()));
    }
    let mut out = Vec::new();
    for t1 in words_over(left, depth.saturating_sub(1)) {
        for t2 in words_over(right, depth.saturating_sub(t1.len())) {
            out.push((t1.clone(), t2));
        }
    }
    out.sort_by(|a, b| {
        (a.0.len() + a.1.len(), &a.0, &a.1).cmp(&(b.0.len() + b.1.len(), &b.0, &b.1))
    });
    Ok(out)
}

/// Independence defects `⟨log μ, e_{τ1} ⧢ e_{τ2}⟩` for all cross pairs up to
/// `depth`. Vanishing defects imply independence of the two coordinate
/// groups only when their joint law is determined by its signature moments.
pub fn independence_defect<S: Scalar>(
    mu: &FreeTensor<S>,
    left: &[u16],
    right: &[u16],
    depth: usize,
) -> Result<Vec<DefectRow<S>>> {
    if depth > mu.depth() {
        return Err(Error::DepthShortfall {
            requested: depth,
            available: mu.depth(),
        });
    }
    for &l in left.iter().chain(right) {
        Word::letter(l).validate(mu.dim())?;
    }
    let kappa = mu.log()?;
    cross_pairs(left, right, depth)?
        .into_iter()
        .map(|(tau1, tau2)| {
            let value = kappa.pair_counts(&shuffle_words(&tau1, &tau2));
            Ok(DefectRow { tau1, tau2, value })
        })
        .collect()
}

/// Renders a defect table as CSV with columns `tau1,tau2,value`.
pub fn defects_to_csv<S: Scalar>(rows: &[DefectRow<S>]) -> String {
    let mut out = String::from("tau1,tau2,value\n");
    for r in rows {
        out.push_str(&format!(
            "\"{}\",\"{}\",{:.16e}\n",
            r.tau1,
            r.tau2,
            r.value.as_f64()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Point mass at a fixed tensor.
    struct Dirac(FreeTensor<f64>);

    impl DistributionModel<f64> for Dirac {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn max_word_len(&self) -> usize {
            self.0.depth()
        }
        fn mixed_moment(&self, words: &[Word]) -> Result<f64> {
            Ok(words.iter().map(|w| self.0.coeff(w)).product())
        }
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn exp_tensor(v: &[f64], depth: usize) -> FreeTensor<f64> {
        FreeTensor::from_vector(v, depth).exp().unwrap()
    }

    #[test]
    fn dirac_moments_and_cumulants() {
        let s = exp_tensor(&[0.3, -1.2], 3);
        let model = Dirac(s.clone());
        let mu = signature_moments(&model, 3).unwrap();
        assert!(mu.approx_eq(&s, 1e-15));
        let kappa = signature_cumulants(&mu).unwrap();
        assert!(kappa.approx_eq(&FreeTensor::from_vector(&[0.3, -1.2], 3), 1e-14));
        assert!(kappa.exp().unwrap().approx_eq(&mu, 1e-14));
    }

    #[test]
    fn block_words_follow_position_order() {
        let tf: TupleFamily = "1,2,3,4;5,6,7".parse().unwrap();
        let labels = tf.family().poset().labels().to_vec();
        let a = SetPartition::parse("c1.1,c1.2,c1.3,c2.1|c2.2,c2.3|c1.4", &labels).unwrap();
        let groups = tf.block_words(&a).unwrap();
        assert_eq!(
            groups,
            vec![vec![w("1,2,3"), w("5")], vec![w("4")], vec![w("6,7")]]
        );
    }

    #[test]
    fn joint_cumulant_of_two_words_is_covariance() {
        let model = Dirac(exp_tensor(&[1.0, 2.0], 2));
        let c = joint_cumulant(&model, &[w("1"), w("2")]).unwrap();
        assert!(c.abs() < 1e-15);
        assert_eq!(joint_cumulant(&model, &[w("1,2")]).unwrap(), 1.0);
    }

    #[test]
    fn tuple_family_parsing() {
        let tf: TupleFamily = "1,2;3".parse().unwrap();
        assert_eq!(tf.tuples(), &[w("1,2"), w("3")]);
        assert_eq!(tf.to_string(), "1,2;3");
        assert!("1;".parse::<TupleFamily>().is_err());
    }

    #[test]
    fn cross_pairs_order_and_count() {
        let pairs = cross_pairs(&[1, 2], &[3], 1).unwrap();
        assert!(pairs.is_empty());
        let pairs = cross_pairs(&[1, 2], &[3], 2).unwrap();
        assert_eq!(pairs.len(), 2);
        let pairs = cross_pairs(&[1], &[2], 3).unwrap();
        assert_eq!(
            pairs,
            vec![
                (w("1"), w("2")),
                (w("1"), w("2,2")),
                (w("1,1"), w("2")),
            ]
        );
        assert!(cross_pairs(&[1, 2], &[2], 2).is_err());
    }

    #[test]
    fn l_shaped_defects() {
        let s = exp_tensor(&[1.0, 0.0], 4)
            .concat_product(&exp_tensor(&[0.0, 1.0], 4))
            .unwrap();
        let rows = independence_defect(&s, &[1], &[2], 4).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].tau1, w("1"));
        // A point mass is independent of everything: log S is a Lie element
        // and vanishes on every nontrivial shuffle.
        assert!(rows.iter().all(|r| r.value.abs() < 1e-14), "{rows:?}");
    }

    #[test]
    fn coin_cumulant_tensor() {
        struct Coin;
        impl DistributionModel<f64> for Coin {
            fn dim(&self) -> usize {
                1
            }
            fn max_word_len(&self) -> usize {
                1
            }
            fn mixed_moment(&self, words: &[Word]) -> Result<f64> {
                Ok(if words.len() % 2 == 0 { 1.0 } else { 0.0 })
            }
        }
        let k = classical_cumulant_tensor(&Coin, 4).unwrap();
        assert!(k.coeff_of(&[1]).abs() < 1e-15);
        assert!((k.coeff_of(&[1, 1]) - 1.0).abs() < 1e-14);
        assert!((k.coeff_of(&[1, 1, 1, 1]) + 2.0).abs() < 1e-13);
        assert!((classical_joint_cumulant(&Coin, &[1, 1, 1, 1]).unwrap() + 2.0).abs() < 1e-13);
    }
}
