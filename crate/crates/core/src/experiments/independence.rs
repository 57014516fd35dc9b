use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    signature_polykay_asymptotic_cov, standard_error, PolykayForm, SampleFeatures, UStatistics,
};
use crate::moment_cumulant::{cross_pairs, TupleFamily};
use crate::path_signatures::DenseSignature;
use crate::report::{fmt_f64, fmt_opt, Record};
use crate::tensor_algebra::Word;

use super::models::DriftBmModel;
use super::oracles::child_seed;

/// Grid used by the independence experiment. Independence of the two
/// halves holds exactly on any grid, so a coarse one suffices.
pub const INDEPENDENCE_STEPS_PER_UNIT: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// The two halves are independent copies.
    Independent,
    /// The second half repeats the first.
    Identical,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::Independent => "independent",
            Coupling::Identical => "identical",
        }
    }
}

/// Paired drift-BM windows: letters `1..=m` carry one copy of the base
/// model, letters `m+1..=2m` the other.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceConfig {
    pub b: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub n: usize,
    pub replicates: usize,
    pub depth: usize,
    pub steps_per_unit: usize,
    pub seed: u64,
}

/// Estimated cross defect and plug-in z-score of one pair in one replicate.
/// `z` is `None` when the plug-in variance is not positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZRow {
    pub coupling: Coupling,
    pub replicate: usize,
    pub child_seed: u64,
    pub tau1: String,
    pub tau2: String,
    pub estimate: f64,
    pub variance: f64,
    pub z: Option<f64>,
}

impl Record for ZRow {
    const HEADER: &'static [&'static str] = &[
        "coupling",
        "replicate",
        "child_seed",
        "tau1",
        "tau2",
        "estimate",
        "variance",
        "z",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.coupling.name().into(),
            self.replicate.to_string(),
            self.child_seed.to_string(),
            self.tau1.clone(),
            self.tau2.clone(),
            fmt_f64(self.estimate),
            fmt_f64(self.variance),
            fmt_opt(self.z),
        ]
    }
}

/// Rejection rates of one pair under one coupling. Rates are over all
/// replicates; replicates without a z-score count as non-rejections.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSummary {
    pub coupling: Coupling,
    pub tau1: String,
    pub tau2: String,
    pub rate_abs_z_gt_2: f64,
    pub rate_abs_z_gt_3: f64,
    pub mean_z: Option<f64>,
    pub undefined: usize,
}

impl Record for PairSummary {
    const HEADER: &'static [&'static str] = &[
        "coupling",
        "tau1",
        "tau2",
        "rate_abs_z_gt_2",
        "rate_abs_z_gt_3",
        "mean_z",
        "undefined",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.coupling.name().into(),
            self.tau1.clone(),
            self.tau2.clone(),
            fmt_f64(self.rate_abs_z_gt_2),
            fmt_f64(self.rate_abs_z_gt_3),
            fmt_opt(self.mean_z),
            self.undefined.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub master_seed: u64,
    pub detail: Vec<ZRow>,
    pub summary: Vec<PairSummary>,
    /// Per coupling, the largest `|z|` over pairs in each replicate.
    pub max_abs_z: Vec<(Coupling, Vec<f64>)>,
}

impl IndependenceReport {
    pub fn max_abs_z(&self, c: Coupling) -> &[f64] {
        self.max_abs_z
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| v.as_slice())
            .unwrap_or(&[])
    }
}

/// Cross-defect estimates `κ̂_n(τ1, τ2)` with plug-in standard errors
/// `sqrt(𝒱̂/n)`, one row per pair from [`cross_pairs`].
pub fn defect_z_scores(
    features: &SampleFeatures<f64>,
    left: &[u16],
    right: &[u16],
    depth: usize,
) -> Result<Vec<(Word, Word, f64, f64, Option<f64>)>> {
    let pairs = cross_pairs(left, right, depth)?;
    let needed = 2 * pairs.iter().map(|(a, b)| a.len() + b.len()).max().unwrap_or(0);
    if features.n() < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: features.n(),
        });
    }
    let u = UStatistics::new(features);
    pairs
        .into_iter()
        .map(|(t1, t2)| {
            let tf = TupleFamily::new(vec![t1.clone(), t2.clone()])?;
            let est = u.signature_polykay(&tf, PolykayForm::SymmetricMeans)?;
            let var = signature_polykay_asymptotic_cov(&tf, &tf, &u)?;
            let z = standard_error(var, features.n()).map(|se| est / se);
            Ok((t1, t2, est, var, z))
        })
        .collect()
}

fn shift_word(w: &Word, by: u16) -> Word {
    Word::new(w.letters().iter().map(|l| l + by).collect())
}

fn dense_columns(sigs: &[DenseSignature<f64>], shift: u16, depth: usize, m: usize) -> Vec<(Word, Vec<f64>)> {
    Word::all(m, depth)
        .into_iter()
        .skip(1)
        .map(|w| {
            let idx = w
                .letters()
                .iter()
                .fold(0usize, |acc, &l| acc * m + (l as usize - 1));
            let col = sigs.iter().map(|s| s.level(w.len())[idx]).collect();
            (shift_word(&w, shift), col)
        })
        .collect()
}

/// Signature features of `n` paired windows under the given coupling.
pub fn paired_features(
    model: &DriftBmModel,
    coupling: Coupling,
    n: usize,
    depth: usize,
    seed: u64,
) -> Result<SampleFeatures<f64>> {
    let m = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left: Vec<_> = (0..n).map(|_| model.simulate_dense(depth, &mut rng)).collect();
    let right: Vec<_> = match coupling {
        Coupling::Independent => (0..n).map(|_| model.simulate_dense(depth, &mut rng)).collect(),
        Coupling::Identical => left.clone(),
    };
    let mut cols = dense_columns(&left, 0, depth, m);
    cols.extend(dense_columns(&right, m as u16, depth, m));
    SampleFeatures::from_columns(cols)
}

/// Runs both couplings for `R` replicates and tabulates z-scores of all
/// cross defects up to the configured depth.
pub fn independence_experiment(cfg: &IndependenceConfig) -> Result<IndependenceReport> {
    let model = DriftBmModel::with_grid(cfg.b.clone(), cfg.sigma.clone(), cfg.steps_per_unit, 1.0)?;
    if cfg.depth < 2 {
        return Err(Error::InvalidArgument("cross pairs need depth ≥ 2".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidArgument("at least 1 replicate is required".into()));
    }
    let m = model.dim() as u16;
    let left: Vec<u16> = (1..=m).collect();
    let right: Vec<u16> = (m + 1..=2 * m).collect();
    let needed = 2 * cfg.depth;
    if cfg.n < needed {
        return Err(Error::InsufficientSamples { needed, got: cfg.n });
    }
    let mut detail = Vec::new();
    let mut summary = Vec::new();
    let mut max_abs_z = Vec::new();
    for (ci, coupling) in [Coupling::Independent, Coupling::Identical].into_iter().enumerate() {
        let mut maxes = Vec::with_capacity(cfg.replicates);
        let first = detail.len();
        for r in 0..cfg.replicates {
            let seed = child_seed(cfg.seed, &[ci as u64, cfg.n as u64, r as u64]);
            let feats = paired_features(&model, coupling, cfg.n, cfg.depth, seed)?;
            let rows = defect_z_scores(&feats, &left, &right, cfg.depth)?;
            let mut mx = 0.0f64;
            for (t1, t2, estimate, variance, z) in rows {
                if let Some(z) = z {
                    mx = mx.max(z.abs());
                }
                detail.push(ZRow {
                    coupling,
                    replicate: r,
                    child_seed: seed,
                    tau1: t1.to_string(),
                    tau2: t2.to_string(),
                    estimate,
                    variance,
                    z,
                });
            }
            maxes.push(mx);
        }
        let rows = &detail[first..];
        let mut pairs: Vec<(String, String)> = Vec::new();
        for r in rows.iter().filter(|r| r.replicate == 0) {
            pairs.push((r.tau1.clone(), r.tau2.clone()));
        }
        let rf = cfg.replicates as f64;
        for (t1, t2) in pairs {
            let zs: Vec<Option<f64>> = rows
                .iter()
                .filter(|r| r.tau1 == t1 && r.tau2 == t2)
                .map(|r| r.z)
                .collect();
            let valid: Vec<f64> = zs.iter().flatten().copied().collect();
            summary.push(PairSummary {
                coupling,
                rate_abs_z_gt_2: valid.iter().filter(|z| z.abs() > 2.0).count() as f64 / rf,
                rate_abs_z_gt_3: valid.iter().filter(|z| z.abs() > 3.0).count() as f64 / rf,
                mean_z: (!valid.is_empty()).then(|| valid.iter().sum::<f64>() / valid.len() as f64),
                undefined: zs.len() - valid.len(),
                tau1: t1,
                tau2: t2,
            });
        }
        max_abs_z.push((coupling, maxes));
    }
    Ok(IndependenceReport {
        master_seed: cfg.seed,
        detail,
        summary,
        max_abs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_shapes() {
        let cfg = IndependenceConfig {
            b: vec![1.0, 0.0],
            sigma: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            n: 40,
            replicates: 2,
            depth: 2,
            steps_per_unit: 10,
            seed: 5,
        };
        let rep = independence_experiment(&cfg).unwrap();
        assert_eq!(rep.summary.len(), 2 * 4);
        assert_eq!(rep.detail.len(), 2 * 2 * 4);
        assert_eq!(rep, independence_experiment(&cfg).unwrap());
        let too_small = IndependenceConfig { n: 3, ..cfg };
        assert!(matches!(
            independence_experiment(&too_small),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn identical_coupling_duplicates_features() {
        let model = DriftBmModel::with_grid(vec![0.5], vec![vec![1.0]], 5, 1.0).unwrap();
        let f = paired_features(&model, Coupling::Identical, 4, 2, 9).unwrap();
        assert_eq!(
            f.column(&"1,1".parse().unwrap()).unwrap(),
            f.column(&"2,2".parse().unwrap()).unwrap()
        );
    }
}
