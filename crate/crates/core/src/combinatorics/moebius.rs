use std::cell::RefCell;
use std::collections::HashMap;

use super::partition::{for_each_partition, SetPartition};
use crate::error::{Error, Result};

thread_local! {
    static MEMO: RefCell<HashMap<Vec<usize>, i64>> = RefCell::new(HashMap::new());
}

/// Möbius function `m(a, b)` of the partition lattice, from the recursion
/// `m(a, a) = 1`, `m(a, b) = -Σ_{a ≤ c < b} m(a, c)`.
///
/// The interval `[a, b]` is isomorphic to a product of full partition
/// lattices, one per block of `b`, so values are memoized by the multiset of
/// block counts.
pub fn moebius(a: &SetPartition, b: &SetPartition) -> Result<i64> {
    if !a.refines(b)? {
        return Err(Error::NotRefinement);
    }
    let mut ty = a.interval_type(b);
    ty.sort_unstable();
    Ok(moebius_of_type(&ty))
}

/// `m(0̂, 1̂)` on the product lattice `P([k1]) × .. × P([kr])`.
pub fn moebius_of_type(ty: &[usize]) -> i64 {
    let mut key: Vec<usize> = ty.iter().copied().filter(|&k| k > 1).collect();
    key.sort_unstable();
    if key.is_empty() {
        return 1;
    }
    if let Some(v) = MEMO.with(|m| m.borrow().get(&key).copied()) {
        return v;
    }
    // Elements c of the interval are tuples of partitions of each factor;
    // the subinterval [0̂, c] has type = all block sizes of c.
    let mut total = 0i64;
    let factors: Vec<Vec<SetPartition>> = key
        .iter()
        .map(|&k| {
            let mut v = Vec::new();
            for_each_partition(k, |p| v.push(p.clone()));
            v
        })
        .collect();
    let mut idx = vec![0usize; factors.len()];
    loop {
        let is_top = idx
            .iter()
            .zip(&factors)
            .all(|(&i, f)| f[i].len() == 1);
        if !is_top {
            let mut sub = Vec::new();
            for (&i, f) in idx.iter().zip(&factors) {
                for b in f[i].blocks() {
                    sub.push(b.len());
                }
            }
            total += moebius_of_type(&sub);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                let v = -total;
                MEMO.with(|m| m.borrow_mut().insert(key, v));
                return v;
            }
            idx[k] += 1;
            if idx[k] < factors[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Closed form `∏_B (-1)^{k_B - 1} (k_B - 1)!`.
pub fn moebius_closed_form(a: &SetPartition, b: &SetPartition) -> Result<i64> {
    if !a.refines(b)? {
        return Err(Error::NotRefinement);
    }
    Ok(a.interval_type(b)
        .into_iter()
        .map(|k| {
            let f: i64 = (1..k as i64).product();
            if k % 2 == 0 {
                -f
            } else {
                f
            }
        })
        .product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::partition::enumerate_partitions;

    #[test]
    fn small_values() {
        let a = SetPartition::singletons(2);
        assert_eq!(moebius(&a, &a).unwrap(), 1);
        assert_eq!(moebius(&a, &SetPartition::one_block(2)).unwrap(), -1);
        assert_eq!(
            moebius(&SetPartition::singletons(3), &SetPartition::one_block(3)).unwrap(),
            2
        );
        let x = SetPartition::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let y = SetPartition::from_blocks(3, &[vec![0, 2], vec![1]]).unwrap();
        assert_eq!(moebius(&x, &y), Err(Error::NotRefinement));
    }

    #[test]
    fn recursion_matches_closed_form() {
        for n in 1..=5 {
            let all = enumerate_partitions(n).unwrap();
            for a in &all {
                for b in &all {
                    if a.refines(b).unwrap() {
                        assert_eq!(moebius(a, b).unwrap(), moebius_closed_form(a, b).unwrap());
                    }
                }
            }
        }
    }
}
