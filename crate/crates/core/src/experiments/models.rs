use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::moment_cumulant::DistributionModel;
use crate::path_signatures::{is_grouplike, signature, DenseSignature, PiecewiseLinearPath};
use crate::scalar::Scalar;
use crate::tensor_algebra::{shuffle_many, FreeTensor, Word};

/// Finite mixture of point masses on group-like tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMixtureModel<S: Scalar> {
    atoms: Vec<(FreeTensor<S>, S)>,
    dim: usize,
    depth: usize,
}

impl<S: Scalar> DiscreteMixtureModel<S> {
    pub fn new(atoms: Vec<(FreeTensor<S>, S)>) -> Result<Self> {
        let (first, _) = atoms
            .first()
            .ok_or_else(|| Error::InvalidModel("mixture has no atoms".into()))?;
        let dim = first.dim();
        let mut total = S::zero();
        for (t, p) in &atoms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch(dim, t.dim()));
            }
            if *p <= S::zero() {
                return Err(Error::InvalidModel("atom probabilities must be positive".into()));
            }
            if !is_grouplike(t, 1e-9) {
                return Err(Error::InvalidModel("atom is not group-like".into()));
            }
            total = total + p.clone();
        }
        if (total.as_f64() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "probabilities sum to {}, expected 1",
                total.as_f64()
            )));
        }
        let depth = atoms.iter().map(|(t, _)| t.depth()).min().unwrap_or(0);
        Ok(DiscreteMixtureModel { atoms, dim, depth })
    }

    /// Mixture of the signatures of the given paths.
    pub fn from_paths(paths: &[(PiecewiseLinearPath<S>, S)], depth: usize) -> Result<Self> {
        Self::new(
            paths
                .iter()
                .map(|(p, w)| (signature(p, depth), w.clone()))
                .collect(),
        )
    }

    pub fn support(&self) -> &[(FreeTensor<S>, S)] {
        &self.atoms
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `E[S] = Σ p · atom`.
    pub fn expected_signature(&self) -> FreeTensor<S> {
        let mut acc = FreeTensor::zero(self.dim, self.depth);
        for (t, p) in &self.atoms {
            acc = acc.add(&t.truncate(self.depth).scale(p)).expect("same shape");
        }
        acc
    }
}

impl<S: Scalar> DistributionModel<S> for DiscreteMixtureModel<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_word_len(&self) -> usize {
        self.depth
    }

    fn mixed_moment(&self, words: &[Word]) -> Result<S> {
        if let Some(w) = words.iter().find(|w| w.len() > self.depth) {
            return Err(Error::DepthShortfall {
                requested: w.len(),
                available: self.depth,
            });
        }
        let mut acc = S::zero();
        for (t, p) in &self.atoms {
            let mut prod = p.clone();
            for w in words {
                prod = prod * t.coeff(w);
            }
            acc = acc + prod;
        }
        Ok(acc)
    }
}

/// Mixture of signatures of random piecewise-linear paths with small integer
/// increments and random positive weights; handy for identity checks.
pub fn random_mixture<R: Rng + ?Sized>(
    rng: &mut R,
    atoms: usize,
    dim: usize,
    depth: usize,
) -> DiscreteMixtureModel<f64> {
    let mut raw: Vec<f64> = (0..atoms).map(|_| rng.random_range(1..=4) as f64).collect();
    let total: f64 = raw.iter().sum();
    raw.iter_mut().for_each(|w| *w /= total);
    let paths = raw
        .into_iter()
        .map(|w| {
            let steps = rng.random_range(1..=3);
            let mut pt = vec![0.0; dim];
            let mut pts = vec![pt.clone()];
            for _ in 0..steps {
                for x in pt.iter_mut() {
                    *x += rng.random_range(-2..=2) as f64 * 0.5;
                }
                pts.push(pt.clone());
            }
            (PiecewiseLinearPath::new(pts, None).expect("valid path"), w)
        })
        .collect::<Vec<_>>();
    DiscreteMixtureModel::from_paths(&paths, depth).expect("valid mixture")
}

/// Law of `(P, Q)` for independent `P ~ Σ π_i δ_{p_i}` and `Q ~ Σ ρ_j δ_{q_j}`.
///
/// Each path is a list of points on a common uniform grid; `P` occupies
/// letters `1..=d_P` of the joint path, `Q` the following ones.
pub fn product_mixture(
    left: &[(Vec<Vec<f64>>, f64)],
    right: &[(Vec<Vec<f64>>, f64)],
    depth: usize,
) -> Result<DiscreteMixtureModel<f64>> {
    let mut atoms = Vec::new();
    for (p, pi) in left {
        for (q, rho) in right {
            if p.len() != q.len() {
                return Err(Error::InvalidPath(format!(
                    "grid lengths differ: {} vs {}",
                    p.len(),
                    q.len()
                )));
            }
            let pts = p
                .iter()
                .zip(q)
                .map(|(x, y)| x.iter().chain(y).copied().collect())
                .collect();
            atoms.push((PiecewiseLinearPath::new(pts, None)?, pi * rho));
        }
    }
    DiscreteMixtureModel::from_paths(&atoms, depth)
}

/// Brownian motion with drift, `X_t = b t + Λ B_t` with `Λ Λᵀ = σ`.
#[derive(Debug)]
pub struct DriftBmModel {
    b: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    lambda: Vec<Vec<f64>>,
    steps_per_unit: usize,
    horizon: f64,
    expected: Mutex<HashMap<usize, FreeTensor<f64>>>,
}

impl Clone for DriftBmModel {
    fn clone(&self) -> Self {
        DriftBmModel {
            b: self.b.clone(),
            sigma: self.sigma.clone(),
            lambda: self.lambda.clone(),
            steps_per_unit: self.steps_per_unit,
            horizon: self.horizon,
            expected: Mutex::new(HashMap::new()),
        }
    }
}

pub const DEFAULT_STEPS_PER_UNIT: usize = 1000;

impl DriftBmModel {
    /// Unit-horizon model on the default grid.
    pub fn new(b: Vec<f64>, sigma: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_grid(b, sigma, DEFAULT_STEPS_PER_UNIT, 1.0)
    }

    pub fn with_grid(
        b: Vec<f64>,
        sigma: Vec<Vec<f64>>,
        steps_per_unit: usize,
        horizon: f64,
    ) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidModel("drift vector is empty".into()));
        }
        if steps_per_unit == 0 {
            return Err(Error::InvalidModel("steps_per_unit must be at least 1".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidModel("horizon must be positive".into()));
        }
        let lambda = psd_factor(&sigma, b.len())?;
        Ok(DriftBmModel {
            b,
            sigma,
            lambda,
            steps_per_unit,
            horizon,
            expected: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn drift(&self) -> &[f64] {
        &self.b
    }

    pub fn sigma(&self) -> &[Vec<f64>] {
        &self.sigma
    }

    /// Lower-triangular `Λ` with `Λ Λᵀ = σ`.
    pub fn factor(&self) -> &[Vec<f64>] {
        &self.lambda
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    pub fn steps(&self) -> usize {
        ((self.steps_per_unit as f64 * self.horizon).round() as usize).max(1)
    }

    /// `E[S(X)_{0,T}] = exp(T (b + σ/2))`.
    pub fn expected_signature(&self, depth: usize) -> FreeTensor<f64> {
        if let Some(t) = self.expected.lock().unwrap().get(&depth) {
            return t.clone();
        }
        let d = self.dim();
        let mut gen = FreeTensor::zero(d, depth);
        if depth >= 1 {
            for (i, bi) in self.b.iter().enumerate() {
                gen.set(Word::letter(i as u16 + 1), bi * self.horizon).unwrap();
            }
        }
        if depth >= 2 {
            for i in 0..d {
                for j in 0..d {
                    let w = Word::new(vec![i as u16 + 1, j as u16 + 1]);
                    gen.set(w, 0.5 * self.sigma[i][j] * self.horizon).unwrap();
                }
            }
        }
        let t = gen.exp().expect("level 0 is zero");
        self.expected.lock().unwrap().insert(depth, t.clone());
        t
    }

    /// Signature of the piecewise-linear interpolation of one simulated
    /// window on the step grid.
    pub fn simulate_signature<R: Rng + ?Sized>(&self, depth: usize, rng: &mut R) -> FreeTensor<f64> {
        self.simulate_dense(depth, rng).to_tensor()
    }

    pub fn simulate_dense<R: Rng + ?Sized>(&self, depth: usize, rng: &mut R) -> DenseSignature<f64> {
        let d = self.dim();
        let steps = self.steps();
        let dt = self.horizon / steps as f64;
        let sq = dt.sqrt();
        let mut sig = DenseSignature::identity(d, depth);
        let mut z = vec![0.0; d];
        let mut delta = vec![0.0; d];
        for _ in 0..steps {
            for zi in z.iter_mut() {
                *zi = rng.sample::<f64, _>(StandardNormal) * sq;
            }
            for i in 0..d {
                let mut x = self.b[i] * dt;
                for (k, zk) in z.iter().enumerate().take(i + 1) {
                    x += self.lambda[i][k] * zk;
                }
                delta[i] = x;
            }
            sig.push_increment(&delta);
        }
        sig
    }
}

impl DistributionModel<f64> for DriftBmModel {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn max_word_len(&self) -> usize {
        usize::MAX
    }

    /// `E ∏ ⟨S, e_w⟩ = ⟨E S, ⧢_w e_w⟩`, by shuffle multiplicativity.
    fn mixed_moment(&self, words: &[Word]) -> Result<f64> {
        for w in words {
            w.validate(self.dim())?;
        }
        let depth: usize = words.iter().map(Word::len).sum();
        Ok(self.expected_signature(depth).pair_counts(&shuffle_many(words)))
    }
}

/// Lower-triangular factor of a symmetric positive semidefinite matrix.
pub fn psd_factor(sigma: &[Vec<f64>], d: usize) -> Result<Vec<Vec<f64>>> {
    if sigma.len() != d || sigma.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidModel(format!("σ must be {d}×{d}")));
    }
    let scale = sigma
        .iter()
        .flatten()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    if sigma.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidModel("σ has non-finite entries".into()));
    }
    let tol = 1e-10 * scale;
    for i in 0..d {
        for j in 0..i {
            if (sigma[i][j] - sigma[j][i]).abs() > tol {
                return Err(Error::InvalidModel("σ is not symmetric".into()));
            }
        }
    }
    let mut l = vec![vec![0.0; d]; d];
    for j in 0..d {
        let diag = sigma[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if diag < -tol {
            return Err(Error::InvalidModel("σ is not positive semidefinite".into()));
        }
        let ljj = diag.max(0.0).sqrt();
        l[j][j] = ljj;
        for i in j + 1..d {
            let r = sigma[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if ljj > tol.sqrt() {
                l[i][j] = r / ljj;
            } else if r.abs() > tol.sqrt() {
                return Err(Error::InvalidModel("σ is not positive semidefinite".into()));
            }
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn mixture_moments() {
        let p = PiecewiseLinearPath::new(vec![vec![0.0, 0.0], vec![1.0, 2.0]], None).unwrap();
        let q = PiecewiseLinearPath::new(vec![vec![0.0, 0.0], vec![3.0, -1.0]], None).unwrap();
        let single = DiscreteMixtureModel::from_paths(&[(p.clone(), 1.0)], 2).unwrap();
        assert_eq!(single.mixed_moment(&[w("1"), w("2")]).unwrap(), 2.0);
        assert_eq!(single.mixed_moment(&[]).unwrap(), 1.0);
        let two = DiscreteMixtureModel::from_paths(&[(p, 0.5), (q, 0.5)], 2).unwrap();
        assert_eq!(two.mixed_moment(&[w("1")]).unwrap(), 2.0);
        assert!(matches!(
            two.mixed_moment(&[w("1,1,1")]),
            Err(Error::DepthShortfall { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn mixture_validation() {
        let t = FreeTensor::from_vector(&[1.0, 0.0], 2).exp().unwrap();
        assert!(DiscreteMixtureModel::new(vec![(t.clone(), 0.4)]).is_err());
        assert!(DiscreteMixtureModel::new(vec![(t.clone(), 0.5), (t.clone(), -0.5)]).is_err());
        let bad = FreeTensor::from_vector(&[1.0, 0.0], 2).add(&FreeTensor::one(2, 2)).unwrap();
        assert!(DiscreteMixtureModel::new(vec![(bad, 1.0)]).is_err());
    }

    #[test]
    fn driftbm_expected_signature() {
        let zero = DriftBmModel::new(vec![0.0, 0.0], vec![vec![0.0; 2]; 2]).unwrap();
        assert!(zero.expected_signature(3).approx_eq(&FreeTensor::one(2, 3), 0.0));
        let m = DriftBmModel::new(vec![1.0, -0.5], vec![vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let mu = m.expected_signature(2);
        assert_eq!(mu.coeff(&w("1")), 1.0);
        assert!((mu.coeff(&w("1,2")) - 0.5 * (-0.5 + 0.3)).abs() < 1e-15);
        let kappa = mu.log().unwrap();
        assert!((kappa.coeff(&w("2,1")) - 0.15).abs() < 1e-15);
        assert!((kappa.coeff(&w("2")) + 0.5).abs() < 1e-15);
        let l = m.factor();
        assert!((l[1][0] * l[1][0] + l[1][1] * l[1][1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psd_checks() {
        assert!(psd_factor(&[vec![1.0, 2.0], vec![2.0, 1.0]], 2).is_err());
        assert!(psd_factor(&[vec![1.0, 0.5], vec![0.0, 1.0]], 2).is_err());
        let l = psd_factor(&[vec![1.0, 1.0], vec![1.0, 1.0]], 2).unwrap();
        assert_eq!(l, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn zero_noise_gives_straight_line() {
        let m = DriftBmModel::with_grid(vec![1.0, 2.0], vec![vec![0.0; 2]; 2], 10, 1.0).unwrap();
        let s = m.simulate_signature(3, &mut ChaCha8Rng::seed_from_u64(1));
        let line = FreeTensor::from_vector(&[1.0, 2.0], 3).exp().unwrap();
        assert!(s.approx_eq(&line, 1e-12));
    }
}
