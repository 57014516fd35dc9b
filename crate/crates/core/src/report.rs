//! CSV rendering shared by estimate, defect and experiment reports.

use crate::error::{Error, Result};

/// A report row with a fixed column layout.
pub trait Record {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Floats are written with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Missing values are written as empty fields.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn to_csv<R: Record>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
    w.write_record(R::HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
