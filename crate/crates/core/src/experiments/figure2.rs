use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{driftbm_variance_gap, driftbm_variance_gap_exact};
use crate::report::{fmt_f64, fmt_opt, Record};

use super::models::DriftBmModel;
use super::oracles::child_seed;

/// Settings of the level-1/level-2 estimator comparison on drift-BM windows.
#[derive(Clone, Debug, PartialEq)]
pub struct Figure2Config {
    pub b: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub steps_per_unit: usize,
    pub seed: u64,
}

/// Errors of one replicate at one entry. `entry_j = 0` marks a level-1
/// entry, `entry_i = entry_j = 0` the Frobenius norm over level 2.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetailRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub replicate: usize,
    pub child_seed: u64,
    pub entry_i: usize,
    pub entry_j: usize,
    pub abs_err_moment: f64,
    pub abs_err_cumulant: f64,
}

impl Record for DetailRow {
    const HEADER: &'static [&'static str] = &[
        "N",
        "replicate",
        "child_seed",
        "entry_i",
        "entry_j",
        "abs_err_moment",
        "abs_err_cumulant",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.replicate.to_string(),
            self.child_seed.to_string(),
            self.entry_i.to_string(),
            self.entry_j.to_string(),
            fmt_f64(self.abs_err_moment),
            fmt_f64(self.abs_err_cumulant),
        ]
    }
}

/// Per-`N` aggregate at one entry. Variance columns are empty for the
/// Frobenius row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub entry_i: usize,
    pub entry_j: usize,
    pub mean_abs_err_moment: f64,
    pub mean_abs_err_cumulant: f64,
    pub var_gap_empirical: Option<f64>,
    pub var_gap_theory: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub var_gap_exact: Option<f64>,
}

impl Record for SummaryRow {
    const HEADER: &'static [&'static str] = &[
        "N",
        "entry_i",
        "entry_j",
        "mean_abs_err_moment",
        "mean_abs_err_cumulant",
        "var_gap_empirical",
        "var_gap_theory",
        "mc_stderr",
        "var_gap_exact",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.entry_i.to_string(),
            self.entry_j.to_string(),
            fmt_f64(self.mean_abs_err_moment),
            fmt_f64(self.mean_abs_err_cumulant),
            fmt_opt(self.var_gap_empirical),
            fmt_opt(self.var_gap_theory),
            fmt_opt(self.mc_stderr),
            fmt_opt(self.var_gap_exact),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub master_seed: u64,
    pub detail: Vec<DetailRow>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn summary_at(&self, n: usize, i: usize, j: usize) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.n == n && r.entry_i == i && r.entry_j == j)
    }
}

/// Level-1 and level-2 moment and cumulant estimates from `N` windows.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowEstimates {
    pub mu1: Vec<f64>,
    pub mu2: Vec<Vec<f64>>,
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<Vec<f64>>,
}

/// `μ̂¹ = κ̂¹ = (1/N) Σ X¹`, `μ̂² = (1/N) Σ X²` and
/// `κ̂² = μ̂² − (1/(2N(N−1))) Σ_{l≠m} X¹_l ⊗ X¹_m`.
pub fn window_estimates(level1: &[Vec<f64>], level2: &[Vec<Vec<f64>>]) -> Result<WindowEstimates> {
    let n = level1.len();
    if n < 2 || level2.len() != n {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = level1[0].len();
    let nf = n as f64;
    let mut sum1 = vec![0.0; d];
    let mut sum2 = vec![vec![0.0; d]; d];
    let mut diag = vec![vec![0.0; d]; d];
    for (x1, x2) in level1.iter().zip(level2) {
        for i in 0..d {
            sum1[i] += x1[i];
            for j in 0..d {
                sum2[i][j] += x2[i][j];
                diag[i][j] += x1[i] * x1[j];
            }
        }
    }
    let mu1: Vec<f64> = sum1.iter().map(|s| s / nf).collect();
    let mu2: Vec<Vec<f64>> = sum2.iter().map(|r| r.iter().map(|s| s / nf).collect()).collect();
    let kappa2 = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| mu2[i][j] - (sum1[i] * sum1[j] - diag[i][j]) / (2.0 * nf * (nf - 1.0)))
                .collect()
        })
        .collect();
    Ok(WindowEstimates {
        kappa1: mu1.clone(),
        mu1,
        mu2,
        kappa2,
    })
}

fn simulate_windows(model: &DriftBmModel, n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l1 = Vec::with_capacity(n);
    let mut l2 = Vec::with_capacity(n);
    for _ in 0..n {
        let s = model.simulate_dense(2, &mut rng);
        l1.push(s.level(1).to_vec());
        l2.push(s.level(2).chunks(d).map(<[f64]>::to_vec).collect());
    }
    (l1, l2)
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Empirical `Var(x) − Var(y)` over paired replicates and its standard
/// error from the per-replicate contributions.
pub fn paired_variance_gap(x: &[f64], y: &[f64]) -> (f64, f64) {
    let r = x.len() as f64;
    let mx = x.iter().sum::<f64>() / r;
    let my = y.iter().sum::<f64>() / r;
    let u: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| ((a - mx).powi(2) - (b - my).powi(2)) * r / (r - 1.0))
        .collect();
    let gap = u.iter().sum::<f64>() / r;
    (gap, (sample_var(&u) / r).sqrt())
}

/// Simulates `R` replicates of `N` independent unit windows for every `N`
/// in the grid and compares the moment and cumulant estimators with
/// `μ = exp(b + σ/2)` and `κ = b + σ/2`.
pub fn run_figure2(cfg: &Figure2Config) -> Result<ExperimentReport> {
    let model = DriftBmModel::with_grid(cfg.b.clone(), cfg.sigma.clone(), cfg.steps_per_unit, 1.0)?;
    if cfg.replicates < 2 {
        return Err(Error::InvalidArgument("at least 2 replicates are required".into()));
    }
    if cfg.n_grid.is_empty() {
        return Err(Error::InvalidArgument("N grid is empty".into()));
    }
    if let Some(&n) = cfg.n_grid.iter().find(|&&n| n < 2) {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = model.dim();
    let b = &cfg.b;
    let mu2: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| 0.5 * (b[i] * b[j] + cfg.sigma[i][j])).collect())
        .collect();
    let kappa2: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| 0.5 * cfg.sigma[i][j]).collect())
        .collect();
    let mut detail = Vec::new();
    let mut summary = Vec::new();
    for &n in &cfg.n_grid {
        let mut est = Vec::with_capacity(cfg.replicates);
        for r in 0..cfg.replicates {
            let seed = child_seed(cfg.seed, &[n as u64, r as u64]);
            let (l1, l2) = simulate_windows(&model, n, seed);
            let e = window_estimates(&l1, &l2)?;
            for i in 0..d {
                detail.push(DetailRow {
                    n,
                    replicate: r,
                    child_seed: seed,
                    entry_i: i + 1,
                    entry_j: 0,
                    abs_err_moment: (e.mu1[i] - b[i]).abs(),
                    abs_err_cumulant: (e.kappa1[i] - b[i]).abs(),
                });
            }
            let (mut fro_m, mut fro_k) = (0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    let em = e.mu2[i][j] - mu2[i][j];
                    let ek = e.kappa2[i][j] - kappa2[i][j];
                    fro_m += em * em;
                    fro_k += ek * ek;
                    detail.push(DetailRow {
                        n,
                        replicate: r,
                        child_seed: seed,
                        entry_i: i + 1,
                        entry_j: j + 1,
                        abs_err_moment: em.abs(),
                        abs_err_cumulant: ek.abs(),
                    });
                }
            }
            detail.push(DetailRow {
                n,
                replicate: r,
                child_seed: seed,
                entry_i: 0,
                entry_j: 0,
                abs_err_moment: fro_m.sqrt(),
                abs_err_cumulant: fro_k.sqrt(),
            });
            est.push(e);
        }
        let rows: Vec<&DetailRow> = detail.iter().filter(|r| r.n == n).collect();
        let mean_err = |i: usize, j: usize| {
            let sel: Vec<_> = rows.iter().filter(|r| r.entry_i == i && r.entry_j == j).collect();
            let k = sel.len() as f64;
            (
                sel.iter().map(|r| r.abs_err_moment).sum::<f64>() / k,
                sel.iter().map(|r| r.abs_err_cumulant).sum::<f64>() / k,
            )
        };
        for i in 0..d {
            let (m, k) = mean_err(i + 1, 0);
            summary.push(SummaryRow {
                n,
                entry_i: i + 1,
                entry_j: 0,
                mean_abs_err_moment: m,
                mean_abs_err_cumulant: k,
                var_gap_empirical: Some(0.0),
                var_gap_theory: Some(0.0),
                mc_stderr: Some(0.0),
                var_gap_exact: Some(0.0),
            });
        }
        for i in 0..d {
            for j in 0..d {
                let (m, k) = mean_err(i + 1, j + 1);
                let xm: Vec<f64> = est.iter().map(|e| e.mu2[i][j]).collect();
                let xk: Vec<f64> = est.iter().map(|e| e.kappa2[i][j]).collect();
                let (gap, se) = paired_variance_gap(&xm, &xk);
                summary.push(SummaryRow {
                    n,
                    entry_i: i + 1,
                    entry_j: j + 1,
                    mean_abs_err_moment: m,
                    mean_abs_err_cumulant: k,
                    var_gap_empirical: Some(gap),
                    var_gap_theory: Some(driftbm_variance_gap(i + 1, j + 1, b, &cfg.sigma, n)?),
                    mc_stderr: Some(se),
                    var_gap_exact: Some(driftbm_variance_gap_exact(i + 1, j + 1, b, &cfg.sigma, n)?),
                });
            }
        }
        let (m, k) = mean_err(0, 0);
        summary.push(SummaryRow {
            n,
            entry_i: 0,
            entry_j: 0,
            mean_abs_err_moment: m,
            mean_abs_err_cumulant: k,
            var_gap_empirical: None,
            var_gap_theory: None,
            mc_stderr: None,
            var_gap_exact: None,
        });
    }
    Ok(ExperimentReport {
        master_seed: cfg.seed,
        detail,
        summary,
    })
}

/// `K` log-spaced integers from `start` to `stop`, deduplicated.
pub fn log_grid(start: usize, stop: usize, k: usize) -> Result<Vec<usize>> {
    if start == 0 || stop < start || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid grid {start}:{stop}:log{k}"
        )));
    }
    if k == 1 {
        return Ok(vec![start]);
    }
    let ratio = (stop as f64 / start as f64).ln();
    let mut out: Vec<usize> = (0..k)
        .map(|i| (start as f64 * (ratio * i as f64 / (k - 1) as f64).exp()).round() as usize)
        .collect();
    out.dedup();
    Ok(out)
}

/// Parses `start:stop:logK` or a comma-separated list of sizes.
pub fn parse_n_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("invalid N grid '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, k] => {
            let k = k.strip_prefix("log").ok_or_else(bad)?;
            log_grid(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                k.trim().parse().map_err(|_| bad())?,
            )
        }
        [list] => list
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}
