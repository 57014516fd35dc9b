mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use common::chain_shapes;
use sigcum::combinatorics::ordered::{
    is_ordered_by_cycles, orp_factorial_by_enumeration, orp_factorial_closed_form,
    orp_via_hom_kernels,
};
use sigcum::combinatorics::partition::{bell_number, refinements};
use sigcum::combinatorics::{
    enumerate_orp, enumerate_partitions, is_ordered, moebius, moebius_closed_form,
    order_polynomial, orp_factorial, orp_table, ChainFamily, LabeledPoset, SetPartition,
};
use sigcum::{Error, Rational};

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Random DAG on `n` vertices with edges only from lower to higher index.
fn arb_poset(max_n: usize) -> impl Strategy<Value = LabeledPoset> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut pairs = Vec::new();
            let mut k = 0;
            for x in 0..n {
                for y in x + 1..n {
                    if bits[k] {
                        pairs.push((x, y));
                    }
                    k += 1;
                }
            }
            LabeledPoset::from_relations((0..n).map(|i| format!("v{i}")).collect(), &pairs).unwrap()
        })
    })
}

fn arb_chain_family() -> impl Strategy<Value = ChainFamily> {
    prop::collection::vec(1usize..=3, 1..=3)
        .prop_filter("at most 6 elements", |l| l.iter().sum::<usize>() <= 6)
        .prop_map(|l| ChainFamily::new(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn acyclic_blocks_iff_no_cross_block_cycle(p in arb_poset(6)) {
        for a in enumerate_partitions(p.len()).unwrap() {
            prop_assert_eq!(is_ordered(&a, &p).unwrap(), is_ordered_by_cycles(&a, &p).unwrap());
        }
    }

    #[test]
    fn ordered_partitions_are_hom_kernels(p in arb_poset(6)) {
        prop_assert_eq!(enumerate_orp(&p).unwrap(), orp_via_hom_kernels(&p).unwrap());
    }

    #[test]
    fn factorial_dp_matches_enumeration(fam in arb_chain_family()) {
        let p = fam.poset();
        for a in enumerate_orp(p).unwrap() {
            let dp = orp_factorial(&a, p).unwrap();
            prop_assert_eq!(dp, orp_factorial_by_enumeration(&a, p).unwrap());
            if let Some(cf) = orp_factorial_closed_form(&a, &fam) {
                prop_assert_eq!(dp, cf);
            }
        }
    }

    #[test]
    fn moebius_inverts_zeta(n in 1usize..=5, vals in prop::collection::vec(-20i64..20, 52)) {
        let parts = enumerate_partitions(n).unwrap();
        let f: HashMap<SetPartition, i64> = parts.iter().cloned().zip(vals).collect();
        let g = |a: &SetPartition| refinements(a).iter().map(|b| f[b]).sum::<i64>();
        for a in &parts {
            let back: i64 = refinements(a).iter().map(|b| moebius(b, a).unwrap() * g(b)).sum();
            prop_assert_eq!(back, f[a]);
        }
    }
}

#[test]
fn moebius_closed_form_agrees() {
    for n in 1..=5 {
        let parts = enumerate_partitions(n).unwrap();
        for a in &parts {
            for b in refinements(a) {
                assert_eq!(moebius(&b, a).unwrap(), moebius_closed_form(&b, a).unwrap());
            }
        }
        assert_eq!(parts.len() as u64, bell_number(n));
    }
    let top = SetPartition::one_block(4);
    assert_eq!(moebius(&SetPartition::singletons(4), &top).unwrap(), -6);
    assert_eq!(moebius(&top, &SetPartition::singletons(4)), Err(Error::NotRefinement));
}

#[test]
fn chain_order_polynomials() {
    for k in 1..=4usize {
        let p = LabeledPoset::chain(k);
        for n in 1..=5usize {
            let op = order_polynomial(&p, n).unwrap();
            assert_eq!(op.omega, binom((n + k - 1) as u64, k as u64), "k={k} n={n}");
            assert_eq!(op.strict, binom(n as u64, k as u64), "k={k} n={n}");
        }
    }
    let anti = LabeledPoset::antichain(3);
    assert_eq!(order_polynomial(&anti, 4).unwrap().omega, 64);
}

#[test]
fn order_polynomial_counts_kernels_by_factorial() {
    // Each map P → [n] factors uniquely as its kernel a, a surjection onto
    // [|a|] with kernel a, and an increasing injection [|a|] → [n].
    for shape in chain_shapes(4) {
        let fam = ChainFamily::new(shape.clone()).unwrap();
        let p = fam.poset();
        let orp = enumerate_orp(p).unwrap();
        for n in 1..=4usize {
            let sum: u64 = orp
                .iter()
                .map(|a| orp_factorial(a, p).unwrap() * binom(n as u64, a.len() as u64))
                .sum();
            assert_eq!(sum, order_polynomial(p, n).unwrap().omega, "{shape:?} n={n}");
        }
    }
}

#[test]
fn single_chain_orp_counts() {
    // Ordered partitions of a k-chain are its compositions, each with a! = 1.
    for k in 1..=6 {
        let t = orp_table(&[k]).unwrap();
        assert_eq!(t.len(), 1 << (k - 1));
        assert!(t.iter().all(|e| e.factorial == 1));
    }
}

#[test]
fn boundary_weights_of_two_points() {
    // Two incomparable points: {12} has ∂ = 1, and {1|2} has
    // ∂ = −2/2 + 1 = 0 over its ancestry {1|2}, {12}.
    let t = orp_table(&[1, 1]).unwrap();
    let find = |blocks: usize| t.iter().find(|e| e.partition.len() == blocks).unwrap();
    assert_eq!(find(1).boundary, Rational::from_integer(1.into()));
    assert_eq!(find(1).factorial, 1);
    assert_eq!(find(2).factorial, 2);
    assert_eq!(find(2).boundary, Rational::from_integer(0.into()));
}

#[test]
fn unordered_partitions_are_rejected() {
    let fam = ChainFamily::new(vec![2, 2]).unwrap();
    let p = fam.poset();
    // 1 < 2 and 3 < 4; {1,4} {2,3} forces 1 < 2 ~ 3 < 4 ~ 1.
    let a = SetPartition::from_blocks(4, &[vec![0, 3], vec![1, 2]]).unwrap();
    assert!(!is_ordered(&a, p).unwrap());
    assert_eq!(orp_factorial(&a, p), Err(Error::NotOrdered));
}
