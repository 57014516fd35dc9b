mod common;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{rational_mixture, tuple_families, w};
use sigcum::combinatorics::partition::refinements;
use sigcum::estimators::{
    falling_factorial, polykay_cov_asymptotic, polykay_cov_asymptotic_via_moments,
    polykay_cov_exact, CovarianceQuery, CumulantSource, Groups, PolykayForm, SampleFeatures,
    UStatistics,
};
use sigcum::experiments::{window_estimates, DriftBmModel};
use sigcum::moment_cumulant::{CachedModel, TupleFamily};
use sigcum::{Rational, Word};

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn g(groups: &[&[&str]]) -> Groups {
    groups.iter().map(|b| b.iter().map(|s| w(s)).collect()).collect()
}

fn random_features(rng: &mut ChaCha8Rng, words: &[&str], n: usize) -> SampleFeatures<f64> {
    SampleFeatures::from_columns(
        words
            .iter()
            .map(|s| (w(s), (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())),
    )
    .unwrap()
}

fn rational_features(rng: &mut ChaCha8Rng, words: &[&str], n: usize) -> SampleFeatures<Rational> {
    SampleFeatures::from_columns(
        words
            .iter()
            .map(|s| (w(s), (0..n).map(|_| r(rng.random_range(-3..=3))).collect())),
    )
    .unwrap()
}

const GROUP_SHAPES: &[&[&[&str]]] = &[
    &[&["1"]],
    &[&["1", "2"]],
    &[&["1"], &["2"]],
    &[&["1"], &["1"]],
    &[&["1", "1"], &["2"]],
    &[&["1"], &["2"], &["1,2"]],
    &[&["1", "2", "1,2"]],
    &[&["1"], &["1"], &["2", "2"]],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_symmetric_mean_matches_naive(seed in any::<u64>(), n in 3usize..8, shape in 0..GROUP_SHAPES.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_features(&mut rng, &["1", "2", "1,2"], n);
        let u = UStatistics::new(&f);
        let groups = g(GROUP_SHAPES[shape]);
        let fast = u.symmetric_mean(&groups).unwrap();
        let naive = u.symmetric_mean_naive(&groups).unwrap();
        prop_assert!((fast - naive).abs() <= 1e-10 * (1.0 + naive.abs()));
    }

    #[test]
    fn polykays_are_permutation_invariant(seed in any::<u64>(), n in 4usize..8, shape in 0..GROUP_SHAPES.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = rational_features(&mut rng, &["1", "2", "1,2"], n);
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        let p = f.select(&rows);
        let groups = g(GROUP_SHAPES[shape]);
        prop_assert_eq!(
            UStatistics::new(&f).polykay(&groups).unwrap(),
            UStatistics::new(&p).polykay(&groups).unwrap()
        );
    }
}

#[test]
fn falling_factorial_convention() {
    assert_eq!(falling_factorial(5, 0), 1.into());
    assert_eq!(falling_factorial(5, 2), 20.into());
    assert_eq!(falling_factorial(5, 5), 120.into());
    assert_eq!(falling_factorial(3, 4), 0.into());
}

#[test]
fn both_polykay_forms_agree_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let words: Vec<String> = Word::all(2, 4).into_iter().skip(1).map(|x| x.to_string()).collect();
    let refs: Vec<&str> = words.iter().map(String::as_str).collect();
    let f = rational_features(&mut rng, &refs, 9);
    let u = UStatistics::new(&f);
    for tf in tuple_families(2, 4) {
        assert_eq!(
            u.signature_polykay(&tf, PolykayForm::SymmetricMeans).unwrap(),
            u.signature_polykay(&tf, PolykayForm::BoundaryPolykays).unwrap(),
            "{tf}"
        );
    }
}

#[test]
fn second_cumulant_polykay_is_unbiased_sample_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = rational_features(&mut rng, &["1"], 7);
    let xs = f.column(&w("1")).unwrap().to_vec();
    let n = r(xs.len() as i64);
    let mean = xs.iter().fold(Rational::zero(), |a, x| a + x) / &n;
    let var = xs.iter().fold(Rational::zero(), |a, x| a + (x - &mean) * (x - &mean)) / (n - r(1));
    let u = UStatistics::new(&f);
    assert_eq!(u.polykay(&g(&[&["1", "1"]])).unwrap(), var);
    assert_eq!(u.polykay(&g(&[&["1"]])).unwrap(), mean);
}

#[test]
fn level_two_polykay_matches_window_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 12;
    let f = random_features(&mut rng, &["1", "2", "1,1", "1,2", "2,1", "2,2"], n);
    let level1: Vec<Vec<f64>> = (0..n)
        .map(|l| vec![f.value(l, &w("1")).unwrap(), f.value(l, &w("2")).unwrap()])
        .collect();
    let level2: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|l| {
            (1..=2)
                .map(|i| (1..=2).map(|j| f.value(l, &w(&format!("{i},{j}"))).unwrap()).collect())
                .collect()
        })
        .collect();
    let est = window_estimates(&level1, &level2).unwrap();
    let u = UStatistics::new(&f);
    for i in 1..=2 {
        for j in 1..=2 {
            let tf = TupleFamily::single(w(&format!("{i},{j}"))).unwrap();
            let k = u.signature_polykay(&tf, PolykayForm::SymmetricMeans).unwrap();
            assert!((k - est.kappa2[i - 1][j - 1]).abs() < 1e-12);
            let m = u.mixed_moment_estimate(&tf).unwrap();
            assert!((m - est.mu2[i - 1][j - 1]).abs() < 1e-12);
        }
    }
}

#[test]
fn variance_of_a_sample_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = rational_mixture(&mut rng, 4, 2, 3);
    let cm = CachedModel::new(&model);
    let q = CovarianceQuery::new(&g(&[&["1,2"]]), &g(&[&["1,2"]]));
    let kappa2 = cm.cumulant(&g(&[&["1,2", "1,2"]])).unwrap();
    for n in [1usize, 2, 5, 17] {
        assert_eq!(polykay_cov_exact(&q, n, &cm).unwrap(), &kappa2 / r(n as i64));
    }
}

const COV_CASES: &[(&[&[&str]], &[&[&str]])] = &[
    (&[&["1"]], &[&["2"]]),
    (&[&["1"], &["2"]], &[&["1,2"]]),
    (&[&["1"], &["2"]], &[&["1"], &["2"]]),
    (&[&["1", "2"]], &[&["1"], &["2"]]),
    (&[&["1", "2"], &["2"]], &[&["1,1"]]),
    (&[&["1"], &["2"], &["1"]], &[&["2", "1"]]),
];

#[test]
fn connected_rule_matches_moment_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let model = rational_mixture(&mut rng, 3, 2, 2);
        let cm = CachedModel::new(&model);
        for (a1, a2) in COV_CASES {
            let q = CovarianceQuery::new(&g(a1), &g(a2));
            assert_eq!(
                polykay_cov_asymptotic(&q, &cm).unwrap(),
                polykay_cov_asymptotic_via_moments(&q, &cm).unwrap()
            );
        }
    }
}

#[test]
fn exact_covariance_has_the_asymptotic_leading_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let model = rational_mixture(&mut rng, 3, 2, 2);
    let cm = CachedModel::new(&model);
    for (a1, a2) in COV_CASES {
        let q = CovarianceQuery::new(&g(a1), &g(a2));
        let asym = polykay_cov_asymptotic(&q, &cm).unwrap();
        // n·Cov − 𝒱 is O(1/n), so n²·Cov − n·𝒱 stays bounded.
        let rem = |n: usize| {
            let nn = r(n as i64);
            polykay_cov_exact(&q, n, &cm).unwrap() * &nn * &nn - asym.clone() * nn
        };
        let (r1, r2) = (rem(1_000), rem(1_000_000));
        assert!((r1.clone() - r2.clone()).abs() * r(100) <= r1.abs() + r(1), "{a1:?} {a2:?}");
    }
}

/// The covariance rule read literally: for each `c` merging one block of
/// `a1` with one of `a2`, sum `κ(b)` over `b ≤ c` with no block of `b`
/// a proper subset of a block of `a1` or `a2`.
fn literal_merge_rule(q: &CovarianceQuery, cm: &CachedModel<'_, Rational>) -> Rational {
    let s1 = q.a1().ground_size();
    let mut parent_blocks = q.a1().blocks();
    parent_blocks.extend(
        q.a2()
            .blocks()
            .into_iter()
            .map(|b| b.into_iter().map(|v| v + s1).collect::<Vec<_>>()),
    );
    let proper_subset = |x: &[usize], y: &[usize]| x.len() < y.len() && x.iter().all(|e| y.contains(e));
    let mut acc = Rational::zero();
    for c in q.merged_partitions() {
        for b in refinements(&c) {
            let blocks = b.blocks();
            if blocks
                .iter()
                .any(|blk| parent_blocks.iter().any(|p| proper_subset(blk, p)))
            {
                continue;
            }
            let groups: Groups = blocks
                .iter()
                .map(|blk| blk.iter().map(|&v| q.vars()[v].clone()).collect())
                .collect();
            acc += cm.cumulant(&groups).unwrap();
        }
    }
    acc
}

#[test]
fn literal_merge_rule_overcounts_for_sample_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = rational_mixture(&mut rng, 4, 2, 2);
    let cm = CachedModel::new(&model);
    let q = CovarianceQuery::new(&g(&[&["1"]]), &g(&[&["2"]]));
    let truth = polykay_cov_asymptotic(&q, &cm).unwrap();
    assert_eq!(truth, cm.cumulant(&g(&[&["1", "2"]])).unwrap());
    let literal = literal_merge_rule(&q, &cm);
    assert_eq!(literal - &truth, cm.cumulant(&g(&[&["1"], &["2"]])).unwrap());
}

fn k(cm: &CachedModel<'_, Rational>, groups: &[&[&str]]) -> Rational {
    cm.cumulant(&g(groups)).unwrap()
}

#[test]
fn product_and_mean_covariance_display() {
    // Cov(κ̂(a1|a2), κ̂(a3)) has leading coefficient κ(a1|a2a3) + κ(a2|a1a3).
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..3 {
        let model = rational_mixture(&mut rng, 4, 2, 2);
        let cm = CachedModel::new(&model);
        let (a1, a2, a3) = ("1", "2", "1,2");
        let q = CovarianceQuery::new(&g(&[&[a1], &[a2]]), &g(&[&[a3]]));
        let corrected = k(&cm, &[&[a1], &[a2, a3]]) + k(&cm, &[&[a2], &[a1, a3]]);
        assert_eq!(polykay_cov_asymptotic(&q, &cm).unwrap(), corrected);
        let printed = corrected.clone() + r(2) * k(&cm, &[&[a1], &[a2], &[a3]]);
        if !k(&cm, &[&[a1], &[a2], &[a3]]).is_zero() {
            assert_ne!(polykay_cov_asymptotic(&q, &cm).unwrap(), printed);
        }
    }
}

#[test]
fn product_variance_display_for_gaussian_coordinates() {
    // Level-1 coordinates of drift BM are jointly Gaussian, so the exact
    // variance of κ̂(a1|a2) has only the displayed 1/N and 1/(N(N−1)) terms.
    let model = DriftBmModel::new(vec![0.7, -0.4], vec![vec![1.3, 0.5], vec![0.5, 0.9]]).unwrap();
    let cm = CachedModel::new(&model);
    let kf = |groups: &[&[&str]]| cm.cumulant(&g(groups)).unwrap();
    let q = CovarianceQuery::new(&g(&[&["1"], &["2"]]), &g(&[&["1"], &["2"]]));
    let lead = kf(&[&["1"], &["1"], &["2", "2"]])
        + kf(&[&["2"], &["2"], &["1", "1"]])
        + 2.0 * kf(&[&["1"], &["2"], &["1", "2"]]);
    let second = kf(&[&["1", "1"], &["2", "2"]]) + kf(&[&["1", "2"], &["1", "2"]]);
    assert!((polykay_cov_asymptotic(&q, &cm).unwrap() - lead).abs() < 1e-12);
    for n in [2usize, 3, 10, 50] {
        let nf = n as f64;
        let display = lead / nf + second / (nf * (nf - 1.0));
        let exact = polykay_cov_exact(&q, n, &cm).unwrap();
        assert!((exact - display).abs() < 1e-12, "N={n}: {exact} vs {display}");
    }
}

/// Leading covariance coefficient of a partition into blocks of size one
/// or two with itself, with every pair of blocks `(A_i, A_j)` contributing
/// its connected cumulants times `κ` of the other blocks of both copies.
fn pair_block_variance(cm: &CachedModel<'_, Rational>, blocks: &[Vec<Word>]) -> Rational {
    let kb = |b: &Vec<Word>| cm.cumulant(std::slice::from_ref(b)).unwrap();
    let mut acc = Rational::zero();
    for (i, bi) in blocks.iter().enumerate() {
        for (j, bj) in blocks.iter().enumerate() {
            let rest = blocks
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != i)
                .chain(blocks.iter().enumerate().filter(|&(l, _)| l != j))
                .fold(Rational::one(), |p, (_, b)| p * kb(b));
            let pair = |x: &Word, y: &Word| cm.cumulant(&[vec![x.clone(), y.clone()]]).unwrap();
            let mut union = bi.clone();
            union.extend(bj.iter().cloned());
            let mut connected = cm.cumulant(&[union]).unwrap();
            if bi.len() == 2 && bj.len() == 2 {
                connected += pair(&bi[0], &bj[0]) * pair(&bi[1], &bj[1])
                    + pair(&bi[0], &bj[1]) * pair(&bi[1], &bj[0]);
            }
            acc += connected * rest;
        }
    }
    acc
}

#[test]
fn pair_block_variance_display() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cases: &[&[&[&str]]] = &[
        &[&["1", "2"]],
        &[&["1", "2"], &["1,2"]],
        &[&["1", "1"], &["2", "1,2"]],
        &[&["1"], &["2", "2,1"], &["1,1"]],
    ];
    for _ in 0..2 {
        let model = rational_mixture(&mut rng, 4, 2, 2);
        let cm = CachedModel::new(&model);
        for case in cases {
            let groups = g(case);
            let q = CovarianceQuery::new(&groups, &groups);
            assert_eq!(
                polykay_cov_asymptotic(&q, &cm).unwrap(),
                pair_block_variance(&cm, &groups),
                "{case:?}"
            );
        }
    }
}

#[test]
fn plug_in_covariance_tracks_the_model_value() {
    let model = DriftBmModel::with_grid(vec![0.5, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], 50, 1.0)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 4000;
    let sigs: Vec<_> = (0..n).map(|_| model.simulate_signature(2, &mut rng)).collect();
    let f = SampleFeatures::from_tensors(&sigs).unwrap();
    let u = UStatistics::new(&f);
    let cm = CachedModel::new(&model);
    let q = CovarianceQuery::new(&g(&[&["1"], &["2"]]), &g(&[&["1,2"]]));
    let plug = polykay_cov_asymptotic(&q, &u).unwrap();
    let truth = polykay_cov_asymptotic(&q, &cm).unwrap();
    assert!((plug - truth).abs() < 0.15, "{plug} vs {truth}");
}

#[test]
fn too_few_samples_is_a_resource_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_features(&mut rng, &["1", "2"], 2);
    let u = UStatistics::new(&f);
    let err = u.polykay(&g(&[&["1"], &["2"], &["1"]])).unwrap_err();
    assert!(err.is_resource());
    let q = CovarianceQuery::new(&g(&[&["1"], &["2"]]), &g(&[&["1"]]));
    let model = rational_mixture(&mut rng, 2, 2, 1);
    let cm = CachedModel::new(&model);
    assert!(polykay_cov_exact(&q, 1, &cm).unwrap_err().is_resource());
}
