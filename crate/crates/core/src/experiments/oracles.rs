use crate::error::{Error, Result};
use crate::estimators::{Groups, PolykayForm, SampleFeatures, UStatistics};
use crate::moment_cumulant::TupleFamily;
use crate::scalar::Scalar;

use super::models::DiscreteMixtureModel;

/// Largest number of sample tuples enumerated by the exact-expectation oracle.
pub const ENUMERATION_CAP: usize = 1 << 20;

/// Estimators understood by [`exact_estimator_expectation`].
#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorSpec {
    SymmetricMean(Groups),
    Polykay(Groups),
    SignaturePolykay(TupleFamily, PolykayForm),
    MixedMoment(TupleFamily),
}

impl EstimatorSpec {
    pub fn evaluate<S: Scalar>(&self, u: &UStatistics<'_, S>) -> Result<S> {
        match self {
            EstimatorSpec::SymmetricMean(g) => u.symmetric_mean(g),
            EstimatorSpec::Polykay(g) => u.polykay(g),
            EstimatorSpec::SignaturePolykay(tf, form) => u.signature_polykay(tf, *form),
            EstimatorSpec::MixedMoment(tf) => u.mixed_moment_estimate(tf),
        }
    }
}

/// `E[f(X_1, .., X_n)]` for i.i.d. draws from the mixture, by summing over
/// all `|support|^n` sample tuples with product weights.
pub fn exact_expectation_with<S: Scalar>(
    model: &DiscreteMixtureModel<S>,
    n: usize,
    mut f: impl FnMut(&UStatistics<'_, S>) -> Result<S>,
) -> Result<S> {
    let k = model.support().len();
    let size = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(k));
    match size {
        Some(s) if s <= ENUMERATION_CAP => {}
        _ => {
            return Err(Error::CapExceeded {
                size: size.unwrap_or(usize::MAX),
                cap: ENUMERATION_CAP,
            })
        }
    }
    let atoms: Vec<_> = model.support().iter().map(|(t, _)| t.clone()).collect();
    let all = SampleFeatures::from_tensors(&atoms)?;
    let mut idx = vec![0usize; n];
    let mut acc = S::zero();
    loop {
        let weight = idx
            .iter()
            .fold(S::one(), |w, &i| w * model.support()[i].1.clone());
        let sample = all.select(&idx);
        acc = acc + weight * f(&UStatistics::new(&sample))?;
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(acc);
            }
            idx[pos] += 1;
            if idx[pos] < k {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact expectation of an estimator over `n` i.i.d. draws.
pub fn exact_estimator_expectation<S: Scalar>(
    model: &DiscreteMixtureModel<S>,
    spec: &EstimatorSpec,
    n: usize,
) -> Result<S> {
    exact_expectation_with(model, n, |u| spec.evaluate(u))
}

/// Child seed of `master` for the stream identified by `path`
/// (splitmix64 finalizer folded over the path).
pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(master), |h, &p| mix(h ^ mix(p)))
}

/// `E[X^k]` for `X ~ N(μ, σ²)` by pairing the centred factors (Isserlis):
/// `Σ_j C(k, 2j) μ^{k-2j} σ^{2j} (2j-1)!!`.
pub fn gaussian_raw_moment(k: u32, mu: f64, sigma2: f64) -> f64 {
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut dfact = 1.0;
    for j in 0..=k / 2 {
        if j > 0 {
            let (a, b) = (k - 2 * j + 2, k - 2 * j + 1);
            binom *= (a * b) as f64 / ((2 * j - 1) * 2 * j) as f64;
            dfact *= (2 * j - 1) as f64;
        }
        acc += binom * mu.powi((k - 2 * j) as i32) * sigma2.powi(j as i32) * dfact;
    }
    acc
}

/// `Var((1/N) Σ X_i²) − Var(s²)` for `N` i.i.d. `N(μ, σ²)` draws, where
/// `s²` is the unbiased sample variance; both variances are assembled from
/// Gaussian moments.
pub fn gaussian_variance_gap(mu: f64, sigma2: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let var_moment =
        (gaussian_raw_moment(4, mu, sigma2) - gaussian_raw_moment(2, mu, sigma2).powi(2)) / nf;
    let m4 = gaussian_raw_moment(4, 0.0, sigma2);
    let var_cumulant = (m4 - (nf - 3.0) / (nf - 1.0) * sigma2 * sigma2) / nf;
    Ok(var_moment - var_cumulant)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_raw_moment(0, 2.0, 3.0), 1.0);
        assert_eq!(gaussian_raw_moment(1, 2.0, 3.0), 2.0);
        assert!((gaussian_raw_moment(2, 2.0, 3.0) - 7.0).abs() < 1e-12);
        assert!((gaussian_raw_moment(4, 0.0, 2.0) - 12.0).abs() < 1e-12);
        // μ⁴ + 6μ²σ² + 3σ⁴
        assert!((gaussian_raw_moment(4, 3.0, 1.0) - (81.0 + 54.0 + 3.0)).abs() < 1e-12);
        assert!((gaussian_raw_moment(6, 0.0, 1.0) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn warmup_gap_matches_hand_derivation() {
        let g = gaussian_variance_gap(3.0, 1.0, 50).unwrap();
        let hand = (4.0 * 9.0 - 2.0 / 49.0) / 50.0;
        assert!((g - hand).abs() < 1e-13);
        assert!(g > 0.0);
    }

    #[test]
    fn child_seeds_differ() {
        let a = child_seed(7, &[100, 0]);
        assert_eq!(a, child_seed(7, &[100, 0]));
        assert_ne!(a, child_seed(7, &[100, 1]));
        assert_ne!(a, child_seed(8, &[100, 0]));
        assert_ne!(child_seed(7, &[1, 0]), child_seed(7, &[0, 1]));
    }
}
