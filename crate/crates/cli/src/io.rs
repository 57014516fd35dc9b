use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use sigcum::report::{to_csv, Record};
use sigcum::{Error, Tensor};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_resource() => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Tensor JSON files, expanding directories to their `*.json` entries in
/// name order.
pub fn load_samples(inputs: &[PathBuf]) -> Result<Vec<Tensor>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(input)
                .map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(input.clone());
        }
    }
    files
        .iter()
        .map(|f| {
            Tensor::from_json(&read_text(f)?).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("{}: {m}", f.display())).into(),
                other => other.into(),
            })
        })
        .collect()
}

pub fn emit<R: Record + Serialize>(rows: &[R], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => to_csv(rows)?,
        Format::Json => json_array(rows)?,
    };
    write_text(out, &text)
}

/// Emits a table whose columns are chosen at run time.
pub fn emit_columns(
    cols: &[&str],
    rows: &[Vec<Value>],
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Io(format!("csv output: {e}"));
            w.write_record(cols).map_err(io)?;
            for r in rows {
                w.write_record(r.iter().map(|v| match v {
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                }))
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(format!("csv output: {e}")))?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
        Format::Json => {
            let objects: Vec<serde_json::Map<String, Value>> = rows
                .iter()
                .map(|r| cols.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect())
                .collect();
            json_array(&objects)?
        }
    };
    write_text(out, &text)
}

fn json_array<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    serde_json::to_string_pretty(rows)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(format!("json output: {e}")))
}
