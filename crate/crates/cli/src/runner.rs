//! Evaluation of (mesh, β) cells and CSV output for custom runs.

use std::fmt;
use std::io::Write;

use advest_core::reconstruction::StructureCheck;
use advest_core::{efficiency_report, estimate, AdvectionProblem, EfficiencyReport, Method, Mesh1D};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

/// Tolerance for the reconstruction structure checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{cell}: {error}")]
    Core { cell: String, error: advest_core::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One discretization to run: method, degrees, element count and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub k: usize,
    pub kprime: usize,
    pub elements: usize,
    pub beta: f64,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} k={} k'={} elements={} beta={:e}",
            self.method, self.k, self.kprime, self.elements, self.beta
        )
    }
}

/// Estimator output and diagnostics for one cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub dof: usize,
    /// `‖u_h‖`, the scale of rounding in every difference with `u_h`.
    pub uh_norm: f64,
    pub eta_nc: f64,
    pub eta_osc: f64,
    pub estimator: f64,
    pub error: Option<f64>,
    pub i_eff: Option<f64>,
    pub orthogonality_ok: bool,
    pub max_orthogonality: f64,
    pub bound_holds: Option<bool>,
    pub structure: StructureCheck,
    pub efficiency: Option<EfficiencyReport>,
}

impl CellResult {
    pub fn structure_ok(&self) -> bool {
        self.structure.holds(STRUCTURE_TOL)
    }

    /// A failed bound in a run whose residual was hat-orthogonal.
    pub fn bound_violated(&self) -> bool {
        self.orthogonality_ok && self.bound_holds == Some(false)
    }
}

/// Solves, estimates and (when the exact solution is known) computes the
/// efficiency ratios for one cell.
pub fn evaluate(cell: Cell, problem: &AdvectionProblem, mesh: &Mesh1D) -> advest_core::Result<CellResult> {
    let uh = cell.method.solve(problem, mesh, cell.k)?;
    let report = estimate(&uh, problem, cell.kprime)?;
    let efficiency = if report.exact_error.is_some() {
        Some(efficiency_report(&uh, problem, &report)?)
    } else {
        None
    };
    Ok(CellResult {
        cell,
        dof: cell.method.dof_count(mesh.n_elements(), cell.k),
        uh_norm: uh.norm_l2(),
        eta_nc: report.eta_nc,
        eta_osc: report.eta_osc,
        estimator: report.estimator,
        error: report.exact_error,
        i_eff: report.i_eff.filter(|v| v.is_finite()),
        orthogonality_ok: report.orthogonality_ok,
        max_orthogonality: report.max_orthogonality(),
        bound_holds: report.bound_holds(uh.norm_l2()),
        structure: report.structure,
        efficiency,
    })
}

/// Evaluates a cell with the data, mesh family and constants of `config`.
pub fn run_cell(config: &RunConfig, cell: Cell) -> Result<CellResult, RunError> {
    let wrap = |error| RunError::Core {
        cell: cell.to_string(),
        error,
    };
    let problem = config.problem(cell.beta).map_err(wrap)?;
    let mesh = config.mesh(cell.elements).map_err(wrap)?;
    evaluate(cell, &problem, &mesh).map_err(wrap)
}

/// The (mesh, β) cells of a config, meshes outermost.
pub fn cells(config: &RunConfig) -> Vec<Cell> {
    config
        .elements
        .iter()
        .flat_map(|&elements| {
            config.betas.iter().map(move |&beta| Cell {
                method: config.method,
                k: config.k,
                kprime: config.kprime(),
                elements,
                beta,
            })
        })
        .collect()
}

/// Runs every cell of `config` in parallel; rows come back in [`cells`] order.
pub fn run_custom(config: &RunConfig) -> Result<Vec<CellResult>, RunError> {
    config.validate()?;
    cells(config).into_par_iter().map(|cell| run_cell(config, cell)).collect()
}

/// Four significant digits in scientific notation, e.g. `3.574e-2`.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Effectivity index with three decimals; empty when undefined.
pub fn fmt_ieff(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.3}"))
}

fn fmt_opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub const RUN_COLUMNS: [&str; 19] = [
    "method",
    "k",
    "kprime",
    "elements",
    "dof",
    "beta",
    "eta_nc",
    "eta_osc",
    "error",
    "estimator",
    "i_eff",
    "orthogonality_ok",
    "max_orthogonality",
    "bound_holds",
    "structure_ok",
    "max_jump",
    "max_local_ratio",
    "global_ratio",
    "global_hypothesis",
];

/// Writes one CSV row per result, with a header.
pub fn write_run_csv<W: Write>(rows: &[CellResult], out: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS)?;
    for r in rows {
        let eff = r.efficiency.as_ref();
        w.write_record([
            r.cell.method.to_string(),
            r.cell.k.to_string(),
            r.cell.kprime.to_string(),
            r.cell.elements.to_string(),
            r.dof.to_string(),
            format!("{:e}", r.cell.beta),
            fmt_sci(r.eta_nc),
            fmt_sci(r.eta_osc),
            r.error.map_or_else(String::new, fmt_sci),
            fmt_sci(r.estimator),
            fmt_ieff(r.i_eff),
            r.orthogonality_ok.to_string(),
            fmt_sci(r.max_orthogonality),
            fmt_opt(r.bound_holds),
            r.structure_ok().to_string(),
            fmt_sci(r.structure.max_jump),
            eff.map_or_else(String::new, |e| format!("{:.4}", e.max_local_ratio)),
            eff.map_or_else(String::new, |e| format!("{:.4}", e.global_ratio)),
            fmt_opt(eff.map(|e| e.global_hypothesis)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_csv(rows: &[CellResult]) -> String {
    let mut buf = Vec::new();
    write_run_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}
