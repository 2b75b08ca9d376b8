//! Report documents: one pretty-printed JSON object per run, plus an
//! optional CSV of per-seed evaluation rows.

use std::fs;
use std::path::Path;

use serde::Serialize;
use surprisal_core::metrics::EvalReport;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Document<'a, T> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub result: T,
}

pub fn render<T: Serialize>(command: &str, config: &RunConfig, result: T) -> CliResult<String> {
    let doc = Document { command, config, result };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(format!("cannot encode report: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Per-seed rows as CSV: a `seed` column then one column per metric in name
/// order. Undefined metrics are left empty.
pub fn eval_csv(report: &EvalReport) -> CliResult<String> {
    let names: Vec<&String> = report.means.keys().collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("seed").chain(names.iter().map(|s| s.as_str())).collect();
    let err = |e: csv::Error| CliError::Runtime(format!("cannot encode csv: {e}"));
    w.write_record(&header).map_err(err)?;
    for row in &report.rows {
        let mut rec = vec![row.seed.to_string()];
        for name in &names {
            rec.push(row.metrics.get(*name).copied().flatten().map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(format!("cannot encode csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}
