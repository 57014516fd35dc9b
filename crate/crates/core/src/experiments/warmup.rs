use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{fmt_f64, Record};

use super::figure2::paired_variance_gap;
use super::oracles::{child_seed, gaussian_variance_gap};

/// Second-moment and variance estimates of one replicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarmupDetailRow {
    pub replicate: usize,
    pub child_seed: u64,
    pub moment_estimate: f64,
    pub cumulant_estimate: f64,
}

impl Record for WarmupDetailRow {
    const HEADER: &'static [&'static str] =
        &["replicate", "child_seed", "moment_estimate", "cumulant_estimate"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.replicate.to_string(),
            self.child_seed.to_string(),
            fmt_f64(self.moment_estimate),
            fmt_f64(self.cumulant_estimate),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarmupSummary {
    pub mu: f64,
    pub sigma2: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub replicates: usize,
    pub mean_moment: f64,
    pub mean_cumulant: f64,
    pub target_moment: f64,
    pub target_cumulant: f64,
    pub var_moment: f64,
    pub var_cumulant: f64,
    pub var_gap_empirical: f64,
    pub var_gap_theory: f64,
    pub mc_stderr: f64,
}

impl Record for WarmupSummary {
    const HEADER: &'static [&'static str] = &[
        "mu",
        "sigma2",
        "N",
        "replicates",
        "mean_moment",
        "mean_cumulant",
        "target_moment",
        "target_cumulant",
        "var_moment",
        "var_cumulant",
        "var_gap_empirical",
        "var_gap_theory",
        "mc_stderr",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.mu),
            fmt_f64(self.sigma2),
            self.n.to_string(),
            self.replicates.to_string(),
            fmt_f64(self.mean_moment),
            fmt_f64(self.mean_cumulant),
            fmt_f64(self.target_moment),
            fmt_f64(self.target_cumulant),
            fmt_f64(self.var_moment),
            fmt_f64(self.var_cumulant),
            fmt_f64(self.var_gap_empirical),
            fmt_f64(self.var_gap_theory),
            fmt_f64(self.mc_stderr),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarmupReport {
    pub master_seed: u64,
    pub detail: Vec<WarmupDetailRow>,
    pub summary: WarmupSummary,
}

/// Compares `μ̂² = (1/N) Σ X²` with `κ̂² = (1/(N−1)) Σ (X − X̄)²` on
/// `N(μ, σ²)` samples.
pub fn gaussian_warmup(mu: f64, sigma2: f64, n: usize, replicates: usize, seed: u64) -> Result<WarmupReport> {
    if !(sigma2 > 0.0 && sigma2.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidArgument("need finite μ and σ² > 0".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if replicates < 2 {
        return Err(Error::InvalidArgument("at least 2 replicates are required".into()));
    }
    let normal = Normal::new(mu, sigma2.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let nf = n as f64;
    let mut xs = vec![0.0; n];
    let detail: Vec<WarmupDetailRow> = (0..replicates)
        .map(|r| {
            let s = child_seed(seed, &[n as u64, r as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            xs.iter_mut().for_each(|x| *x = normal.sample(&mut rng));
            let mean = xs.iter().sum::<f64>() / nf;
            WarmupDetailRow {
                replicate: r,
                child_seed: s,
                moment_estimate: xs.iter().map(|x| x * x).sum::<f64>() / nf,
                cumulant_estimate: xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0),
            }
        })
        .collect();
    let m: Vec<f64> = detail.iter().map(|r| r.moment_estimate).collect();
    let k: Vec<f64> = detail.iter().map(|r| r.cumulant_estimate).collect();
    let (gap, se) = paired_variance_gap(&m, &k);
    let rf = replicates as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / rf;
    let var = |v: &[f64]| {
        let c = mean(v);
        v.iter().map(|x| (x - c) * (x - c)).sum::<f64>() / (rf - 1.0)
    };
    let summary = WarmupSummary {
        mu,
        sigma2,
        n,
        replicates,
        mean_moment: mean(&m),
        mean_cumulant: mean(&k),
        target_moment: mu * mu + sigma2,
        target_cumulant: sigma2,
        var_moment: var(&m),
        var_cumulant: var(&k),
        var_gap_empirical: gap,
        var_gap_theory: gaussian_variance_gap(mu, sigma2, n)?,
        mc_stderr: se,
    };
    Ok(WarmupReport {
        master_seed: seed,
        detail,
        summary,
    })
}
