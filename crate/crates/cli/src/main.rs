//! `sigcum`: signatures, signature moments and cumulants, polykay estimates,
//! independence tables, ordered-partition tables and simulation studies.

mod args;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use sigcum::combinatorics::ordered::antichain_ancestry;
use sigcum::combinatorics::{boundary_weight, enumerate_orp, orp_factorial, ChainFamily};
use sigcum::estimators::{estimate_table, EstimateMode, SampleFeatures, UStatistics};
use sigcum::experiments::{
    defect_z_scores, gaussian_warmup, independence_experiment, parse_n_grid, run_figure2,
    Figure2Config, IndependenceConfig, DEFAULT_STEPS_PER_UNIT, INDEPENDENCE_STEPS_PER_UNIT,
};
use sigcum::moment_cumulant::{independence_defect, TupleFamily};
use sigcum::path_signatures::{parse_path_csv, signature, time_augment};
use sigcum::report::{fmt_f64, fmt_opt, Record};
use sigcum::{Error, Tensor};

use args::{
    parse_letters, parse_matrix, parse_vector, Cli, Command, Experiment, Kind, Mode, OrpAction,
};
use io::{emit, emit_columns, load_samples, read_text, write_text, CliError, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Signature {
            inputs,
            depth,
            time_augment: augment,
            out,
        } => cmd_signature(&inputs, depth, augment, out),
        Command::Estimate {
            inputs,
            tuples,
            mode,
            std,
            format,
            out,
        } => {
            let families = parse_families(&tuples)?;
            let samples = load_samples(&inputs)?;
            let features = SampleFeatures::from_tensors(&samples)?;
            for tf in &families {
                tf.validate(samples[0].dim())?;
            }
            let u = UStatistics::new(&features);
            let mode = match mode {
                Mode::Moment => EstimateMode::Moment,
                Mode::Cumulant => EstimateMode::Cumulant,
            };
            emit(&estimate_table(&u, &families, mode, std)?, format, out.as_deref())
        }
        Command::Independence {
            inputs,
            left,
            right,
            depth,
            format,
            out,
        } => {
            let (left, right) = (parse_letters(&left)?, parse_letters(&right)?);
            check_pair_depth(depth)?;
            let samples = load_samples(&inputs)?;
            let dim = samples[0].dim();
            check_letters(&left, &right, dim)?;
            let features = SampleFeatures::from_tensors(&samples)?;
            let rows: Vec<ZScoreRow> = defect_z_scores(&features, &left, &right, depth)?
                .into_iter()
                .map(|(t1, t2, estimate, variance, z)| ZScoreRow {
                    tau1: t1.to_string(),
                    tau2: t2.to_string(),
                    estimate,
                    variance,
                    z,
                })
                .collect();
            emit(&rows, format, out.as_deref())
        }
        Command::Defects {
            input,
            left,
            right,
            depth,
            format,
            out,
        } => {
            let (left, right) = (parse_letters(&left)?, parse_letters(&right)?);
            check_pair_depth(depth)?;
            let mu = read_tensor(&input)?;
            check_letters(&left, &right, mu.dim())?;
            let rows: Vec<DefectValueRow> = independence_defect(&mu, &left, &right, depth)?
                .into_iter()
                .map(|r| DefectValueRow {
                    tau1: r.tau1.to_string(),
                    tau2: r.tau2.to_string(),
                    value: r.value,
                })
                .collect();
            emit(&rows, format, out.as_deref())
        }
        Command::Transform {
            inputs,
            from,
            to,
            out,
        } => {
            let samples = load_samples(&inputs)?;
            let mean = mean_tensor(&samples)?;
            let result = match (from, to) {
                (Kind::Moments, Kind::Cumulants) => mean.log()?,
                (Kind::Cumulants, Kind::Moments) => mean.exp()?,
                _ => mean,
            };
            write_text(out.as_deref(), &(result.to_json()? + "\n"))
        }
        Command::Experiment(exp) => cmd_experiment(exp),
        Command::Orp {
            chains,
            action,
            format,
            out,
        } => cmd_orp(&chains, action, format, out),
    }
}

fn parse_families(tuples: &[String]) -> Result<Vec<TupleFamily>, CliError> {
    if tuples.is_empty() {
        return Err(Error::InvalidArgument("at least one --tuples family is required".into()).into());
    }
    Ok(tuples
        .iter()
        .map(|t| t.parse::<TupleFamily>())
        .collect::<Result<_, _>>()?)
}

fn check_letters(left: &[u16], right: &[u16], dim: usize) -> Result<(), CliError> {
    if let Some(l) = left.iter().chain(right).find(|&&l| l as usize > dim) {
        return Err(Error::InvalidArgument(format!("letter {l} exceeds the data dimension {dim}")).into());
    }
    Ok(())
}

/// `depth` bounds `|τ1| + |τ2|`, so the shortest pairs need depth 2.
fn check_pair_depth(depth: usize) -> Result<(), CliError> {
    if depth < 2 {
        return Err(Error::InvalidArgument(format!(
            "--depth bounds |tau1| + |tau2| and must be at least 2, got {depth}"
        ))
        .into());
    }
    Ok(())
}

fn read_tensor(path: &std::path::Path) -> Result<Tensor, CliError> {
    let text = read_text(path)?;
    Tensor::from_json(&text).map_err(|e| CliError::Lib(prefix(path, e)))
}

fn prefix(path: &std::path::Path, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn mean_tensor(samples: &[Tensor]) -> Result<Tensor, CliError> {
    let mut acc = Tensor::zero(samples[0].dim(), samples[0].depth());
    for s in samples {
        acc = acc.add(s)?;
    }
    Ok(acc.scale(&(1.0 / samples.len() as f64)))
}

fn cmd_signature(
    inputs: &[PathBuf],
    depth: usize,
    augment: bool,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut stdout = String::new();
    for input in inputs {
        let text = read_text(input)?;
        let mut path = parse_path_csv(&text, &input.display().to_string())?;
        if augment {
            path = time_augment(&path);
        }
        let json = signature(&path, depth).to_json()? + "\n";
        match &out {
            Some(dir) => {
                let stem = input
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "path".into());
                write_text(Some(&dir.join(format!("{stem}.json"))), &json)?;
            }
            None => stdout.push_str(&json),
        }
    }
    if out.is_none() {
        write_text(None, &stdout)?;
    }
    Ok(())
}

fn cmd_experiment(exp: Experiment) -> Result<(), CliError> {
    match exp {
        Experiment::Figure2 {
            b,
            sigma,
            n,
            replicates,
            steps_per_unit,
            seed,
            format,
            out,
        } => {
            let b = parse_vector(&b)?;
            let cfg = Figure2Config {
                sigma: parse_matrix(&sigma, b.len())?,
                b,
                n_grid: parse_n_grid(&n)?,
                replicates,
                steps_per_unit: steps_per_unit.unwrap_or(DEFAULT_STEPS_PER_UNIT),
                seed,
            };
            let rep = run_figure2(&cfg)?;
            emit_report("figure2", &rep.detail, &rep.summary, format, out)
        }
        Experiment::Warmup {
            mu,
            sigma2,
            n,
            replicates,
            seed,
            format,
            out,
        } => {
            let rep = gaussian_warmup(mu, sigma2, n, replicates, seed)?;
            emit_report("warmup", &rep.detail, &[rep.summary], format, out)
        }
        Experiment::Independence {
            b,
            sigma,
            n,
            replicates,
            depth,
            steps_per_unit,
            seed,
            format,
            out,
        } => {
            let b = parse_vector(&b)?;
            let cfg = IndependenceConfig {
                sigma: parse_matrix(&sigma, b.len())?,
                b,
                n,
                replicates,
                depth,
                steps_per_unit: steps_per_unit.unwrap_or(INDEPENDENCE_STEPS_PER_UNIT),
                seed,
            };
            let rep = independence_experiment(&cfg)?;
            emit_report("independence", &rep.detail, &rep.summary, format, out)
        }
    }
}

/// Writes `<name>_detail` and `<name>_summary` into `out`, or the summary
/// alone to stdout.
fn emit_report<D: Record + Serialize, S: Record + Serialize>(
    name: &str,
    detail: &[D],
    summary: &[S],
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let ext = format.extension();
            emit(detail, format, Some(&dir.join(format!("{name}_detail.{ext}"))))?;
            emit(summary, format, Some(&dir.join(format!("{name}_summary.{ext}"))))
        }
        None => emit(summary, format, None),
    }
}

fn cmd_orp(chains: &str, action: OrpAction, format: Format, out: Option<PathBuf>) -> Result<(), CliError> {
    let lengths: Vec<usize> = parse_letters(chains)?.into_iter().map(usize::from).collect();
    let family = ChainFamily::new(lengths)?;
    let p = family.poset();
    let chain_sets = family.chains();
    let mut rows = Vec::new();
    for a in enumerate_orp(p)? {
        let ancestry = antichain_ancestry(&a, p)?;
        let degenerate = chain_sets.len() > 1
            && a
                .blocks()
                .iter()
                .all(|b| chain_sets.iter().any(|c| b.iter().all(|e| c.contains(e))));
        rows.push(OrpRow {
            partition: a.render(p.labels()),
            blocks: a.len(),
            factorial: orp_factorial(&a, p)?,
            ancestry_size: ancestry.len(),
            ancestry: ancestry
                .iter()
                .map(|b| b.render(p.labels()))
                .collect::<Vec<_>>()
                .join(" "),
            boundary: boundary_weight(&a, p)?.to_string(),
            degenerate,
        });
    }
    let cols = OrpRow::columns(action);
    let table: Vec<Vec<Value>> = rows
        .iter()
        .map(|r| cols.iter().map(|c| r.value(c)).collect())
        .collect();
    emit_columns(cols, &table, format, out.as_deref())
}

#[derive(Serialize)]
struct ZScoreRow {
    tau1: String,
    tau2: String,
    estimate: f64,
    variance: f64,
    z: Option<f64>,
}

impl Record for ZScoreRow {
    const HEADER: &'static [&'static str] = &["tau1", "tau2", "estimate", "variance", "z"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.tau1.clone(),
            self.tau2.clone(),
            fmt_f64(self.estimate),
            fmt_f64(self.variance),
            fmt_opt(self.z),
        ]
    }
}

#[derive(Serialize)]
struct DefectValueRow {
    tau1: String,
    tau2: String,
    value: f64,
}

impl Record for DefectValueRow {
    const HEADER: &'static [&'static str] = &["tau1", "tau2", "value"];
    fn fields(&self) -> Vec<String> {
        vec![self.tau1.clone(), self.tau2.clone(), fmt_f64(self.value)]
    }
}

/// One ordered partition; the action selects the reported columns.
struct OrpRow {
    partition: String,
    blocks: usize,
    factorial: u64,
    ancestry_size: usize,
    ancestry: String,
    boundary: String,
    degenerate: bool,
}

impl OrpRow {
    fn columns(action: OrpAction) -> &'static [&'static str] {
        match action {
            OrpAction::Enumerate => &[
                "partition",
                "blocks",
                "factorial",
                "ancestry_size",
                "boundary",
                "degenerate",
            ],
            OrpAction::Factorial => &["partition", "blocks", "factorial"],
            OrpAction::Ancestry => &["partition", "factorial", "ancestry_size", "ancestry"],
            OrpAction::Boundary => &["partition", "ancestry_size", "boundary", "degenerate"],
        }
    }

    fn value(&self, col: &str) -> Value {
        match col {
            "partition" => self.partition.clone().into(),
            "blocks" => self.blocks.into(),
            "factorial" => self.factorial.into(),
            "ancestry_size" => self.ancestry_size.into(),
            "ancestry" => self.ancestry.clone().into(),
            "boundary" => self.boundary.clone().into(),
            "degenerate" => self.degenerate.into(),
            _ => unreachable!("unknown column {col}"),
        }
    }
}
