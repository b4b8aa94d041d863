//! Run reports and file outputs shared by the sweep and compare commands.

use rfsweep_core::error::Result;
use rfsweep_core::metrics::relative_matrix_error;
use rfsweep_core::solvers::SolverOracle;
use rfsweep_core::sweep::{SweepResult, TestGrid};
use rfsweep_core::types::{Frequency, ResponseMatrix, SampleSet};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// One row of the comparison table / the body of report.json.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub input_samples: usize,
    pub solver_calls: usize,
    pub max_actual_error_db: f64,
    pub wall_time_s: f64,
    pub converged: bool,
}

/// Largest relative grid error of the sweep's final response against the
/// oracle, in dB (−∞ when the model is exact to the last bit).
pub fn grid_error_db(
    result: &SweepResult,
    grid: &TestGrid,
    oracle: &dyn SolverOracle,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (m, &f) in result.grid_response.iter().zip(grid.frequencies()) {
        let truth = oracle.query(f)?;
        worst = worst.max(relative_matrix_error(m, &truth)?);
    }
    Ok(if worst > 0.0 {
        20.0 * worst.log10()
    } else {
        f64::NEG_INFINITY
    })
}

/// Per-grid-point error curve against the oracle, in dB.
pub fn error_curve_db(
    result: &SweepResult,
    grid: &TestGrid,
    oracle: &dyn SolverOracle,
) -> Result<Vec<(Frequency, f64)>> {
    let mut out = Vec::with_capacity(grid.len());
    for (m, &f) in result.grid_response.iter().zip(grid.frequencies()) {
        let truth = oracle.query(f)?;
        let err = relative_matrix_error(m, &truth)?;
        let db = if err > 0.0 {
            20.0 * err.log10()
        } else {
            f64::NEG_INFINITY
        };
        out.push((f, db));
    }
    Ok(out)
}

fn matrix_columns(ports: usize, header: &mut String) {
    for i in 0..ports {
        for j in 0..ports {
            let _ = write!(header, ",S{}{}_re,S{}{}_im", i + 1, j + 1, i + 1, j + 1);
        }
    }
}

fn matrix_cells(m: &ResponseMatrix, row: &mut String) {
    for i in 0..m.ports() {
        for j in 0..m.ports() {
            let v = m.entry(i, j);
            let _ = write!(row, ",{},{}", v.re, v.im);
        }
    }
}

/// f_hz plus row-major S-parameter re/im columns.
pub fn response_csv(grid: &TestGrid, responses: &[ResponseMatrix]) -> String {
    let ports = responses[0].ports();
    let mut out = String::from("f_hz");
    matrix_columns(ports, &mut out);
    out.push('\n');
    for (&f, m) in grid.frequencies().iter().zip(responses) {
        let _ = write!(out, "{}", f.hz());
        matrix_cells(m, &mut out);
        out.push('\n');
    }
    out
}

pub fn error_csv(curve: &[(Frequency, f64)]) -> String {
    let mut out = String::from("f_hz,error_db\n");
    for (f, db) in curve {
        let _ = writeln!(out, "{},{}", f.hz(), db);
    }
    out
}

pub fn samples_csv(samples: &SampleSet) -> String {
    let ports = samples.ports();
    let mut out = String::from("f_hz");
    matrix_columns(ports, &mut out);
    out.push('\n');
    for (f, m) in samples.samples() {
        let _ = write!(out, "{}", f.hz());
        matrix_cells(m, &mut out);
        out.push('\n');
    }
    out
}

pub fn comparison_csv(rows: &[(RunReport, Option<String>)]) -> String {
    let mut out = String::from(
        "algorithm,input_samples,solver_calls,max_actual_error_db,wall_time_s,converged,note\n",
    );
    for (r, note) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.input_samples,
            r.solver_calls,
            r.max_actual_error_db,
            r.wall_time_s,
            r.converged,
            note.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn comparison_table(rows: &[(RunReport, Option<String>)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>7} {:>12} {:>9} {:>10}",
        "algorithm", "samples", "calls", "max_err_db", "time_s", "converged"
    );
    for (r, note) in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>7} {:>12.2} {:>9.3} {:>10}{}",
            r.algorithm,
            r.input_samples,
            r.solver_calls,
            r.max_actual_error_db,
            r.wall_time_s,
            r.converged,
            note.as_deref()
                .map(|n| format!("  ! {n}"))
                .unwrap_or_default()
        );
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}
