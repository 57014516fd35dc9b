//! Distribution models, exact-expectation oracles and the simulation
//! studies built on them.
//!
//! Every replicate draws from its own ChaCha8 stream seeded by
//! [`child_seed`], so reports depend only on the master seed.

mod figure2;
mod independence;
mod models;
mod oracles;
mod warmup;

pub use figure2::{
    log_grid, paired_variance_gap, parse_n_grid, run_figure2, window_estimates, DetailRow,
    ExperimentReport, Figure2Config, SummaryRow, WindowEstimates,
};
pub use independence::{
    defect_z_scores, independence_experiment, paired_features, Coupling, IndependenceConfig,
    IndependenceReport, PairSummary, ZRow, INDEPENDENCE_STEPS_PER_UNIT,
};
pub use models::{
    product_mixture, psd_factor, random_mixture, DiscreteMixtureModel, DriftBmModel,
    DEFAULT_STEPS_PER_UNIT,
};
pub use oracles::{
    child_seed, exact_estimator_expectation, exact_expectation_with, gaussian_raw_moment,
    gaussian_variance_gap, EstimatorSpec, ENUMERATION_CAP,
};
pub use warmup::{gaussian_warmup, WarmupDetailRow, WarmupReport, WarmupSummary};
