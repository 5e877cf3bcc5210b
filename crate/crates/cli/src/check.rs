//! Randomized property suite: seeded random methods, degrees, meshes,
//! velocities and sources, checking the guaranteed bound and the
//! reconstruction structure on each.

use std::io::Write;

use advest_core::{AdvectionProblem, Method, Mesh1D, SourceTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::runner::{evaluate, fmt_ieff, fmt_sci, Cell, CellResult, RunError};
use crate::source::SourceSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum CaseSource {
    Spec(SourceSpec),
    /// One random polynomial per element.
    Piecewise(Vec<Vec<f64>>),
}

impl CaseSource {
    pub fn term(&self) -> SourceTerm {
        match self {
            CaseSource::Spec(s) => s.term(),
            CaseSource::Piecewise(p) => SourceTerm::Piecewise(p.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            CaseSource::Spec(s) => s.to_string(),
            CaseSource::Piecewise(_) => "piecewise".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckCase {
    pub index: usize,
    pub method: Method,
    pub k: usize,
    pub kprime: usize,
    pub vertices: Vec<f64>,
    pub beta: f64,
    pub source: CaseSource,
}

impl CheckCase {
    pub fn mesh(&self) -> advest_core::Result<Mesh1D> {
        Mesh1D::from_vertices(self.vertices.clone())
    }

    pub fn problem(&self) -> advest_core::Result<AdvectionProblem> {
        AdvectionProblem::new(self.beta, self.source.term())
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, max_degree: usize) -> Vec<f64> {
    let degree = rng.gen_range(0..=max_degree);
    (0..=degree).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

/// Draws case `index` from `rng`.
pub fn random_case(rng: &mut ChaCha8Rng, index: usize) -> CheckCase {
    let method = Method::ALL[rng.gen_range(0..3)];
    let k = rng.gen_range(method.min_degree()..=4);
    let kprime = k + rng.gen_range(0..=1);
    let n = rng.gen_range(1..=16);
    let start = rng.gen_range(-1.0..1.0);
    let length = rng.gen_range(0.5..2.0);
    let sizes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.25..1.0)).collect();
    let total: f64 = sizes.iter().sum();
    let mut vertices = vec![start];
    let mut x = start;
    for h in &sizes[..n - 1] {
        x += length * h / total;
        vertices.push(x);
    }
    vertices.push(start + length);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let beta = sign * 10f64.powf(rng.gen_range(-4.0..4.0));
    let source = match rng.gen_range(0..4) {
        0 => CaseSource::Spec(SourceSpec::Arctan),
        1 => CaseSource::Spec(SourceSpec::Table81),
        2 => CaseSource::Spec(SourceSpec::Poly(random_coeffs(rng, 6))),
        _ => CaseSource::Piecewise((0..n).map(|_| random_coeffs(rng, 4)).collect()),
    };
    CheckCase {
        index,
        method,
        k,
        kprime,
        vertices,
        beta,
        source,
    }
}

/// The `cases` configurations generated from `seed`.
pub fn random_cases(seed: u64, cases: usize) -> Vec<CheckCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases).map(|i| random_case(&mut rng, i)).collect()
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub case: CheckCase,
    pub result: CellResult,
}

#[derive(Debug, Clone)]
pub struct CheckSummary {
    pub seed: u64,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckSummary {
    pub fn orthogonal_cases(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.orthogonality_ok).count()
    }

    /// Cases where orthogonality held but `‖u - u_h‖ > η`.
    pub fn violations(&self) -> Vec<&CheckOutcome> {
        self.outcomes.iter().filter(|o| o.result.bound_violated()).collect()
    }

    pub fn structure_failures(&self) -> Vec<&CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.result.structure_ok()).collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty() && self.structure_failures().is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RunError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "case",
            "method",
            "k",
            "kprime",
            "elements",
            "shape_ratio",
            "beta",
            "source",
            "error",
            "estimator",
            "i_eff",
            "orthogonality_ok",
            "bound_holds",
            "structure_ok",
        ])?;
        for o in &self.outcomes {
            let (c, r) = (&o.case, &o.result);
            let kappa = Mesh1D::from_vertices(c.vertices.clone()).map_or(f64::NAN, |m| m.shape_ratio());
            w.write_record([
                c.index.to_string(),
                c.method.to_string(),
                c.k.to_string(),
                c.kprime.to_string(),
                (c.vertices.len() - 1).to_string(),
                format!("{kappa:.3}"),
                format!("{:.4e}", c.beta),
                c.source.label(),
                r.error.map_or_else(String::new, fmt_sci),
                fmt_sci(r.estimator),
                fmt_ieff(r.i_eff),
                r.orthogonality_ok.to_string(),
                r.bound_holds.map_or_else(String::new, |b| b.to_string()),
                r.structure_ok().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn run_case(case: CheckCase) -> Result<CheckOutcome, RunError> {
    let wrap = |error| RunError::Core {
        cell: format!("case {}", case.index),
        error,
    };
    let problem = case.problem().map_err(wrap)?;
    let mesh = case.mesh().map_err(wrap)?;
    let cell = Cell {
        method: case.method,
        k: case.k,
        kprime: case.kprime,
        elements: mesh.n_elements(),
        beta: case.beta,
    };
    let result = evaluate(cell, &problem, &mesh).map_err(wrap)?;
    Ok(CheckOutcome { case, result })
}

/// Generates and evaluates `cases` random configurations in parallel.
pub fn run_check(seed: u64, cases: usize) -> Result<CheckSummary, RunError> {
    let outcomes = random_cases(seed, cases)
        .into_par_iter()
        .map(run_case)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CheckSummary { seed, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible_and_valid() {
        let a = random_cases(7, 50);
        assert_eq!(a, random_cases(7, 50));
        assert_ne!(a, random_cases(8, 50));
        for c in &a {
            c.method.check_degree(c.k).unwrap();
            assert!(c.kprime == c.k || c.kprime == c.k + 1);
            c.mesh().unwrap();
            assert!(c.beta.abs() >= 1e-4 && c.beta.abs() <= 1e4);
        }
    }

    #[test]
    fn small_suite_passes() {
        let summary = run_check(3, 12).unwrap();
        assert_eq!(summary.outcomes.len(), 12);
        assert!(summary.passed());
    }
}
