use std::io::Write;

use chainproof::report::RunReport;

use crate::error::{CliError, CliResult, ExitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

pub fn emit(report: &RunReport, format: Format) -> CliResult<()> {
    let text = match format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json() + "\n",
        Format::Csv => csv_rows(&[report.columns()])?,
    };
    write_stdout(&text)
}

/// Sweep output: one CSV row per point (the table format also uses CSV),
/// or a JSON array of reports.
pub fn emit_sweep(rows: &[(RunReport, Vec<(String, String)>)], format: Format) -> CliResult<()> {
    let text = match format {
        Format::Json => {
            let reports: Vec<&RunReport> = rows.iter().map(|(r, _)| r).collect();
            serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
        }
        Format::Table | Format::Csv => {
            let columns: Vec<Vec<(String, String)>> = rows.iter().map(|(_, c)| c.clone()).collect();
            csv_rows(&columns)?
        }
    };
    write_stdout(&text)
}

fn csv_rows(rows: &[Vec<(String, String)>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::new(ExitKind::Internal, e.to_string());
    if let Some(first) = rows.first() {
        w.write_record(first.iter().map(|(k, _)| k)).map_err(internal)?;
        for row in rows {
            let names: Vec<&String> = row.iter().map(|(k, _)| k).collect();
            if names != first.iter().map(|(k, _)| k).collect::<Vec<_>>() {
                return Err(CliError::new(ExitKind::Internal, "sweep rows have differing columns"));
            }
            w.write_record(row.iter().map(|(_, v)| v)).map_err(internal)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(ExitKind::Internal, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_text(text: &str) -> CliResult<()> {
    write_stdout(text)
}

fn write_stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::new(ExitKind::Io, format!("writing output: {e}")))
}

pub fn print_error(err: &CliError, format: Format) {
    if format == Format::Json {
        let value = serde_json::json!({
            "error": { "kind": err.kind.name(), "code": err.kind.code(), "message": err.message }
        });
        eprintln!("{value}");
    } else {
        eprintln!("chainproof: {err}");
    }
}
