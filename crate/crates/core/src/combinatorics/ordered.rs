use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::partition::{coarsenings, for_each_partition, SetPartition, DEFAULT_CAP};
use super::poset::{ChainFamily, LabeledPoset};
use crate::error::{Error, Result};

/// A partition together with the poset it is ordered with respect to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    partition: SetPartition,
    poset: Rc<LabeledPoset>,
}

impl OrderedPartition {
    pub fn new(partition: SetPartition, poset: Rc<LabeledPoset>) -> Result<Self> {
        if !is_ordered(&partition, &poset)? {
            return Err(Error::NotOrdered);
        }
        Ok(OrderedPartition { partition, poset })
    }

    pub fn partition(&self) -> &SetPartition {
        &self.partition
    }

    pub fn poset(&self) -> &LabeledPoset {
        &self.poset
    }

    /// `a!`
    pub fn factorial(&self) -> u64 {
        orp_factorial(&self.partition, &self.poset).expect("validated on construction")
    }

    /// `A(a)`
    pub fn ancestry(&self) -> Vec<OrderedPartition> {
        antichain_ancestry(&self.partition, &self.poset)
            .expect("validated on construction")
            .into_iter()
            .map(|b| OrderedPartition {
                partition: b,
                poset: self.poset.clone(),
            })
            .collect()
    }

    /// `∂(a)`
    pub fn boundary(&self) -> BigRational {
        boundary_weight(&self.partition, &self.poset).expect("validated on construction")
    }

    pub fn render(&self) -> String {
        self.partition.render(self.poset.labels())
    }
}

fn check_ground(a: &SetPartition, p: &LabeledPoset) -> Result<()> {
    if a.ground_size() != p.len() {
        return Err(Error::InvalidPartition(format!(
            "partition of {} elements for a poset of {}",
            a.ground_size(),
            p.len()
        )));
    }
    Ok(())
}

/// Predecessor bitmasks of the block digraph: bit `j` of `pred[i]` is set when
/// some element of block `j` lies strictly below some element of block `i`.
fn block_predecessors(a: &SetPartition, p: &LabeledPoset) -> Vec<u64> {
    let mut pred = vec![0u64; a.len()];
    for x in 0..p.len() {
        for y in 0..p.len() {
            if p.lt(x, y) {
                let (bx, by) = (a.block_of(x), a.block_of(y));
                if bx != by {
                    pred[by] |= 1 << bx;
                }
            }
        }
    }
    pred
}

/// True iff the block digraph of `a` is acyclic, i.e. `a` is the kernel of
/// some order-preserving map `P → N`.
pub fn is_ordered(a: &SetPartition, p: &LabeledPoset) -> Result<bool> {
    check_ground(a, p)?;
    let pred = block_predecessors(a, p);
    let mut placed = 0u64;
    for _ in 0..a.len() {
        match (0..a.len()).find(|&j| placed & (1 << j) == 0 && pred[j] & !placed == 0) {
            Some(j) => placed |= 1 << j,
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Orderedness through closed walks: `a` is ordered iff every closed walk
/// that steps along `<` or within blocks stays inside one block.
pub fn is_ordered_by_cycles(a: &SetPartition, p: &LabeledPoset) -> Result<bool> {
    check_ground(a, p)?;
    let n = p.len();
    let step = |x: usize, y: usize| x != y && (p.lt(x, y) || a.same_block(x, y));
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for y in 0..n {
                    if step(x, y) && !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            seen
        })
        .collect();
    for x in 0..n {
        for y in 0..n {
            if !a.same_block(x, y) && reach[x][y] && reach[y][x] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All ordered partitions of `p`, in canonical RGS order.
pub fn enumerate_orp(p: &LabeledPoset) -> Result<Vec<SetPartition>> {
    if p.len() > DEFAULT_CAP {
        return Err(Error::CapExceeded {
            size: p.len(),
            cap: DEFAULT_CAP,
        });
    }
    let mut out = Vec::new();
    for_each_partition(p.len(), |a| {
        if is_ordered(a, p).expect("same ground set") {
            out.push(a.clone());
        }
    });
    Ok(out)
}

/// Calls `f` on every order-preserving map `p → [n]` (values `1..=n`,
/// indexed by element).
pub fn for_each_hom(p: &LabeledPoset, n: usize, mut f: impl FnMut(&[usize])) {
    let order = p.linear_extension();
    let mut vals = vec![0usize; p.len()];
    fn rec(
        k: usize,
        order: &[usize],
        p: &LabeledPoset,
        n: usize,
        vals: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if k == order.len() {
            f(vals);
            return;
        }
        let x = order[k];
        let lo = order[..k]
            .iter()
            .filter(|&&y| p.lt(y, x))
            .map(|&y| vals[y])
            .max()
            .unwrap_or(1);
        for v in lo..=n {
            vals[x] = v;
            rec(k + 1, order, p, n, vals, f);
        }
    }
    rec(0, &order, p, n, &mut vals, &mut f);
}

/// Ordered partitions collected as kernels of surjective order-preserving
/// maps `p → [q]`, `q = 1..=|p|`.
pub fn orp_via_hom_kernels(p: &LabeledPoset) -> Result<Vec<SetPartition>> {
    if p.len() > DEFAULT_CAP {
        return Err(Error::CapExceeded {
            size: p.len(),
            cap: DEFAULT_CAP,
        });
    }
    let mut out = BTreeSet::new();
    for q in 1..=p.len() {
        for_each_hom(p, q, |vals| {
            if is_onto(vals, q) {
                out.insert(SetPartition::from_labels(vals));
            }
        });
    }
    Ok(out.into_iter().collect())
}

fn is_onto(vals: &[usize], q: usize) -> bool {
    let mut hit = vec![false; q + 1];
    for &v in vals {
        hit[v] = true;
    }
    hit[1..].iter().all(|&h| h)
}

/// `a!`: the number of order-preserving maps `p → [|a|]` with kernel `a`,
/// i.e. the number of linear extensions of the block digraph.
pub fn orp_factorial(a: &SetPartition, p: &LabeledPoset) -> Result<u64> {
    if !is_ordered(a, p)? {
        return Err(Error::NotOrdered);
    }
    let k = a.len();
    let pred = block_predecessors(a, p);
    let mut ways = vec![0u64; 1 << k];
    ways[0] = 1;
    for mask in 0..(1usize << k) {
        if ways[mask] == 0 {
            continue;
        }
        for (j, &pj) in pred.iter().enumerate() {
            if mask & (1 << j) == 0 && pj & !(mask as u64) == 0 {
                ways[mask | (1 << j)] += ways[mask];
            }
        }
    }
    Ok(ways[(1 << k) - 1])
}

/// `a!` by exhaustive enumeration of order-preserving maps.
pub fn orp_factorial_by_enumeration(a: &SetPartition, p: &LabeledPoset) -> Result<u64> {
    if !is_ordered(a, p)? {
        return Err(Error::NotOrdered);
    }
    let mut count = 0;
    for_each_hom(p, a.len(), |vals| {
        if SetPartition::from_labels(vals) == *a {
            count += 1;
        }
    });
    Ok(count)
}

/// `|a|! / ∏ |a ∩ C_i|!` when no block of `a` meets two chains.
pub fn orp_factorial_closed_form(a: &SetPartition, family: &ChainFamily) -> Option<u64> {
    let chains = family.chains();
    let mut per_chain = Vec::new();
    for c in &chains {
        per_chain.push(a.restrict(c).len());
    }
    if per_chain.iter().sum::<usize>() != a.len() {
        return None;
    }
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    Some(fact(a.len()) / per_chain.into_iter().map(fact).product::<u64>())
}

/// True iff `b` merges no comparable pair that `a` keeps apart, and vice
/// versa; equivalently `b ∩ C = a ∩ C` for every chain `C`.
pub fn same_on_chains(a: &SetPartition, b: &SetPartition, p: &LabeledPoset) -> bool {
    (0..p.len()).all(|x| {
        (0..p.len()).all(|y| !p.lt(x, y) || a.same_block(x, y) == b.same_block(x, y))
    })
}

/// `A(a)`: ordered coarsenings of `a` agreeing with `a` on every chain.
pub fn antichain_ancestry(a: &SetPartition, p: &LabeledPoset) -> Result<Vec<SetPartition>> {
    if !is_ordered(a, p)? {
        return Err(Error::NotOrdered);
    }
    Ok(coarsenings(a)
        .into_iter()
        .filter(|b| same_on_chains(a, b, p) && is_ordered(b, p).expect("same ground set"))
        .collect())
}

/// `∂(a) = Σ_{b ∈ A(a)} (-1)^{|b|-1} b! / |b|`, exactly.
pub fn boundary_weight(a: &SetPartition, p: &LabeledPoset) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for b in antichain_ancestry(a, p)? {
        acc += signed_factorial_weight(&b, p)?;
    }
    Ok(acc)
}

/// `(-1)^{|b|-1} b! / |b|`.
pub fn signed_factorial_weight(b: &SetPartition, p: &LabeledPoset) -> Result<BigRational> {
    let f = orp_factorial(b, p)?;
    let sign = if b.len() % 2 == 1 { 1 } else { -1 };
    Ok(BigRational::new(
        BigInt::from(sign) * BigInt::from(f),
        BigInt::from(b.len()),
    ))
}

/// Counts of order-preserving maps `P → [n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderPolynomial {
    /// `Ω(n, P) = #Hom(P, [n])`.
    pub omega: u64,
    /// Order-preserving maps onto `[n]`.
    pub surjective: u64,
    /// Strictly order-preserving maps (`x < y ⇒ f(x) < f(y)`).
    pub strict: u64,
}

pub fn order_polynomial(p: &LabeledPoset, n: usize) -> Result<OrderPolynomial> {
    if p.len() > DEFAULT_CAP {
        return Err(Error::CapExceeded {
            size: p.len(),
            cap: DEFAULT_CAP,
        });
    }
    let (mut omega, mut surjective, mut strict) = (0, 0, 0);
    for_each_hom(p, n, |vals| {
        omega += 1;
        if is_onto(vals, n) {
            surjective += 1;
        }
        let is_strict = (0..p.len())
            .all(|x| (0..p.len()).all(|y| !p.lt(x, y) || vals[x] < vals[y]));
        if is_strict {
            strict += 1;
        }
    });
    Ok(OrderPolynomial {
        omega,
        surjective,
        strict,
    })
}

/// An ordered partition of a chain family with its statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrpEntry {
    pub partition: SetPartition,
    pub factorial: u64,
    pub boundary: BigRational,
}

thread_local! {
    static ORP_TABLES: RefCell<HashMap<Vec<usize>, Rc<Vec<OrpEntry>>>> =
        RefCell::new(HashMap::new());
}

/// `Orp(P_(n1,..,nk))` with `a!` and `∂(a)` for every entry, cached per
/// thread by chain lengths.
pub fn orp_table(lengths: &[usize]) -> Result<Rc<Vec<OrpEntry>>> {
    if let Some(t) = ORP_TABLES.with(|m| m.borrow().get(lengths).cloned()) {
        return Ok(t);
    }
    let family = ChainFamily::new(lengths.to_vec())?;
    let p = family.poset();
    let mut entries = Vec::new();
    for a in enumerate_orp(p)? {
        entries.push(OrpEntry {
            factorial: orp_factorial(&a, p)?,
            boundary: boundary_weight(&a, p)?,
            partition: a,
        });
    }
    let t = Rc::new(entries);
    ORP_TABLES.with(|m| m.borrow_mut().insert(lengths.to_vec(), t.clone()));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::partition::enumerate_partitions;

    fn p22() -> ChainFamily {
        ChainFamily::new(vec![2, 2]).unwrap()
    }

    fn part(f: &ChainFamily, s: &str) -> SetPartition {
        SetPartition::parse(s, f.poset().labels()).unwrap()
    }

    #[test]
    fn crossing_partition_is_not_ordered() {
        let f = p22();
        assert!(is_ordered(&part(&f, "c1.1,c2.1|c1.2,c2.2"), f.poset()).unwrap());
        assert!(!is_ordered(&part(&f, "c1.1,c2.2|c1.2,c2.1"), f.poset()).unwrap());
        assert_eq!(enumerate_orp(f.poset()).unwrap().len(), 14);
    }

    #[test]
    fn antichain_partitions_are_all_ordered() {
        let p = LabeledPoset::antichain(4);
        assert_eq!(enumerate_orp(&p).unwrap(), enumerate_partitions(4).unwrap());
    }

    #[test]
    fn chain_orp_are_compositions() {
        for n in 1..=6 {
            let p = LabeledPoset::chain(n);
            assert_eq!(enumerate_orp(&p).unwrap().len(), 1 << (n - 1));
        }
        assert_eq!(enumerate_orp(&LabeledPoset::antichain(2)).unwrap().len(), 2);
    }

    #[test]
    fn factorial_examples() {
        let f = p22();
        let s = SetPartition::singletons(4);
        assert_eq!(orp_factorial(&s, f.poset()).unwrap(), 6);
        assert_eq!(orp_factorial_closed_form(&s, &f), Some(6));
        assert_eq!(orp_factorial(&SetPartition::one_block(4), f.poset()).unwrap(), 1);
        let anti = LabeledPoset::antichain(4);
        for a in enumerate_partitions(4).unwrap() {
            let k = a.len() as u64;
            assert_eq!(orp_factorial(&a, &anti).unwrap(), (1..=k).product::<u64>());
        }
        assert_eq!(
            orp_factorial(&part(&f, "c1.1,c2.2|c1.2,c2.1"), f.poset()),
            Err(Error::NotOrdered)
        );
    }

    #[test]
    fn boundary_examples() {
        let anti = LabeledPoset::antichain(3);
        for a in enumerate_partitions(3).unwrap() {
            let expected = if a.len() == 1 { 1 } else { 0 };
            assert_eq!(boundary_weight(&a, &anti).unwrap(), BigRational::from_integer(expected.into()));
        }
        let p11 = ChainFamily::new(vec![1, 1]).unwrap();
        let s = SetPartition::singletons(2);
        assert_eq!(antichain_ancestry(&s, p11.poset()).unwrap().len(), 2);
        assert!(boundary_weight(&s, p11.poset()).unwrap().is_zero());
        let one = SetPartition::one_block(4);
        assert_eq!(antichain_ancestry(&one, p22().poset()).unwrap(), vec![one]);
    }

    #[test]
    fn order_polynomial_examples() {
        let binom = |n: u64, k: u64| -> u64 {
            if k > n {
                0
            } else {
                (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
            }
        };
        for m in 1..=4u64 {
            let p = LabeledPoset::chain(m as usize);
            for n in 1..=5u64 {
                let op = order_polynomial(&p, n as usize).unwrap();
                assert_eq!(op.omega, binom(n + m - 1, m));
                assert_eq!(op.strict, binom(n, m));
                assert_eq!(op.surjective, binom(m - 1, n - 1));
            }
        }
        let p11 = ChainFamily::new(vec![1, 1]).unwrap();
        assert_eq!(order_polynomial(p11.poset(), 2).unwrap().omega, 4);
    }

    #[test]
    fn orp_table_caches() {
        let t1 = orp_table(&[2, 2]).unwrap();
        let t2 = orp_table(&[2, 2]).unwrap();
        assert!(Rc::ptr_eq(&t1, &t2));
        assert_eq!(t1.len(), 14);
    }
}
