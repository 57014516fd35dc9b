use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use sigcum::Error;

use crate::io::Format;

#[derive(Parser)]
#[command(name = "sigcum", version, about = "Signature moments, cumulants and polykay estimators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Truncated signatures of piecewise-linear paths given as CSV.
    Signature {
        /// Path CSV files (header row, optional `t` column).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        depth: usize,
        /// Append time as the last coordinate before integrating.
        #[arg(long)]
        time_augment: bool,
        /// Directory for one `<stem>.json` per input; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric means or signature polykays from sample signatures.
    Estimate {
        /// Tensor JSON files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Tuple family such as `1,2;3`; repeat for several.
        #[arg(long = "tuples", required = true)]
        tuples: Vec<String>,
        #[arg(long, value_enum, default_value_t = Mode::Cumulant)]
        mode: Mode,
        /// Add plug-in asymptotic standard errors.
        #[arg(long)]
        std: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimated cross defects between two letter groups with z-scores.
    Independence {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Population cross defects of a moment tensor.
    Defects {
        input: PathBuf,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averages tensors and converts between moments and cumulants.
    Transform {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum)]
        from: Kind,
        #[arg(long, value_enum)]
        to: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulation studies.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Ordered partitions of a disjoint union of chains.
    Orp {
        /// Chain lengths, e.g. `2,2`.
        #[arg(long)]
        chains: String,
        #[arg(value_enum, default_value_t = OrpAction::Enumerate)]
        action: OrpAction,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum Experiment {
    /// Moment versus cumulant estimator errors for drift Brownian motion.
    Figure2 {
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        b: String,
        /// `identity` or rows such as `1,0;0,1`.
        #[arg(long, default_value = "identity")]
        sigma: String,
        /// Sample sizes: `start:stop:logK` or a comma list.
        #[arg(long = "N", default_value = "25:2000:log8")]
        n: String,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long)]
        steps_per_unit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Directory for detail and summary files; summary to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gaussian second-moment versus variance estimator.
    Warmup {
        #[arg(long, allow_hyphen_values = true, default_value_t = 3.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long = "N", default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-defect z-scores under independent and identical couplings.
    Independence {
        #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
        b: String,
        #[arg(long, default_value = "identity")]
        sigma: String,
        #[arg(long = "N", default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        replicates: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        steps_per_unit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    Moment,
    Cumulant,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Moments,
    Cumulants,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrpAction {
    Enumerate,
    Factorial,
    Ancestry,
    Boundary,
}

/// Comma-separated positive letters such as `1,2`.
pub fn parse_letters(text: &str) -> Result<Vec<u16>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u16>()
                .ok()
                .filter(|&l| l > 0)
                .ok_or_else(|| Error::Parse(format!("expected positive integers in {text:?}")))
        })
        .collect()
}

/// Comma-separated reals such as `1,-0.5`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Parse(format!("expected finite reals in {text:?}")))
        })
        .collect()
}

/// `identity` or `;`-separated rows; the matrix must be `dim × dim`.
pub fn parse_matrix(text: &str, dim: usize) -> Result<Vec<Vec<f64>>, Error> {
    if text.trim() == "identity" {
        return Ok((0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect());
    }
    let rows = text.split(';').map(parse_vector).collect::<Result<Vec<_>, _>>()?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be {dim}x{dim} to match b, got {text:?}"
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_and_matrices() {
        assert_eq!(parse_letters("1, 12").unwrap(), vec![1, 12]);
        assert!(parse_letters("0").is_err());
        assert!(parse_letters("1,,2").is_err());
        assert_eq!(parse_vector("-1,0.5").unwrap(), vec![-1.0, 0.5]);
        assert_eq!(parse_matrix("identity", 2).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(parse_matrix("1,2;3,4", 2).unwrap()[1], vec![3.0, 4.0]);
        assert!(parse_matrix("1,2;3", 2).is_err());
        assert!(parse_matrix("1,0;0,1", 3).is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
