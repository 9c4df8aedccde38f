use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::BenchmarkReport;
use crate::error::{Error, Result};
use crate::solvers::SolveResult;

pub const CSV_HEADER: &str = "method,problem,n,q,delta,seed,iterations,final_residual,wall_time_s,converged";
pub const TRACE_HEADER: &str = "iteration,residual_norm,cumulative_seconds";

/// Shortest decimal that parses back to `v`; exponent form outside
/// `[1e-5, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One CSV row per run, LF line endings.
pub fn write_csv<W: Write>(report: &BenchmarkReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (cell, run) in report.runs() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            cell.method.method.as_str(),
            report.problem,
            cell.n,
            cell.q,
            format_float(cell.method.delta),
            run.seed,
            run.iterations,
            format_float(run.final_residual),
            format_float(run.wall_time_s),
            run.converged
        )?;
    }
    out.flush()
}

pub fn export_csv(report: &BenchmarkReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(report, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// The recorded time samples of a solve.
pub fn write_trace<W: Write>(result: &SolveResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for s in &result.samples {
        writeln!(
            out,
            "{},{},{}",
            s.iteration,
            format_float(s.residual_norm),
            format_float(s.seconds)
        )?;
    }
    out.flush()
}

pub fn export_trace(result: &SolveResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(result, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Methods as rows, dimensions as columns; each cell shows mean iterations
/// over an `IT` line and mean seconds over a `CPU` line, or `--` when any
/// repetition failed to converge.
pub fn compare_table(report: &BenchmarkReport) -> String {
    let labels: Vec<String> = report.methods.iter().map(|m| m.label()).collect();
    let label_width = labels
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0)
        .max("Method".len());

    let mut cells = Vec::with_capacity(report.cells.len());
    for cell in &report.cells {
        cells.push(match (cell.converged(), cell.mean_iterations(), cell.mean_seconds()) {
            (true, Some(it), Some(cpu)) => (format!("{it:.0}"), format!("{cpu:.4}")),
            _ => ("--".to_string(), "--".to_string()),
        });
    }
    let headers: Vec<String> = report.dims.iter().map(|n| format!("n={n}")).collect();
    let width = headers
        .iter()
        .map(|h| h.len())
        .chain(cells.iter().flat_map(|(a, b)| [a.len(), b.len()]))
        .max()
        .unwrap_or(0);

    let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
    let mut out = String::new();
    let _ = write!(out, "{}      ", pad("Method", label_width));
    for h in &headers {
        let _ = write!(out, "  {h:>width$}");
    }
    out.push('\n');
    let cols = report.dims.len();
    for (mi, label) in labels.iter().enumerate() {
        for (kind, first) in [("IT ", true), ("CPU", false)] {
            let name = if first { label.as_str() } else { "" };
            let _ = write!(out, "{}  {kind} ", pad(name, label_width));
            for c in 0..cols {
                let (it, cpu) = &cells[mi * cols + c];
                let _ = write!(out, "  {:>width$}", if first { it } else { cpu });
            }
            out.push('\n');
        }
    }
    out
}
