//! The three discretizations: continuous-trial Petrov–Galerkin (PG1),
//! discontinuous-trial ultra-weak Petrov–Galerkin (PG2) and upwind dG.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::legendre;
use crate::linalg::{DenseMatrix, Dof, LinearSystem};
use crate::mesh::Mesh1D;
use crate::poly::BrokenPoly;
use crate::problem::AdvectionProblem;
use crate::quadrature::{gauss_rule, QuadRule};
use crate::space::{ContinuousSpace, ShapeTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// `u_h ∈ P_k ∩ H¹`, zero at inflow, tested against `P_{k-1}(T_h)`.
    Pg1,
    /// `u_h ∈ P_k(T_h)` tested in the ultra-weak form against continuous
    /// `P_{k+1}` functions vanishing at the outflow.
    Pg2,
    /// Upwind discontinuous Galerkin.
    Dg,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pg1, Method::Pg2, Method::Dg];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pg1 => "pg1",
            Method::Pg2 => "pg2",
            Method::Dg => "dg",
        }
    }

    pub fn min_degree(self) -> usize {
        match self {
            Method::Pg1 => 2,
            Method::Pg2 => 0,
            Method::Dg => 1,
        }
    }

    /// Number of unknowns on a mesh with `n` elements.
    pub fn dof_count(self, n: usize, k: usize) -> usize {
        match self {
            Method::Pg1 => n * k,
            Method::Pg2 | Method::Dg => n * (k + 1),
        }
    }

    pub fn check_degree(self, k: usize) -> Result<()> {
        if k < self.min_degree() {
            return Err(Error::UnsupportedDegree {
                method: self.name(),
                degree: k,
                minimum: self.min_degree(),
            });
        }
        if k + 2 > crate::quadrature::MAX_POINTS {
            return Err(Error::invalid("polynomial degree too large"));
        }
        Ok(())
    }

    pub fn assemble(self, problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<LinearSystem> {
        self.check_degree(k)?;
        problem.source().check_mesh(mesh)?;
        match self {
            Method::Pg1 => Ok(assemble_pg1(problem, mesh, k).0),
            Method::Pg2 => assemble_pg2(problem, mesh, k),
            Method::Dg => assemble_dg(problem, mesh, k),
        }
    }

    pub fn solve(self, problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<BrokenPoly> {
        match self {
            Method::Pg1 => solve_pg1(problem, mesh, k),
            Method::Pg2 => solve_pg2(problem, mesh, k),
            Method::Dg => solve_dg(problem, mesh, k),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pg1" => Ok(Method::Pg1),
            "pg2" => Ok(Method::Pg2),
            "dg" => Ok(Method::Dg),
            other => Err(Error::invalid(alloc::format!("unknown method '{other}'"))),
        }
    }
}

/// Orthonormal modal values `φ_j` at the nodes of `rule` on an element of size `h`.
struct ModalTable {
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl ModalTable {
    fn new(k: usize, rule: &QuadRule, h: f64) -> Self {
        let mut p = vec![0.0; k + 1];
        let mut d = vec![0.0; k + 1];
        let mut values = Vec::with_capacity(rule.len());
        let mut derivs = Vec::with_capacity(rule.len());
        for &xi in rule.nodes() {
            legendre::tabulate(xi, &mut p, &mut d);
            values.push((0..=k).map(|j| p[j] * legendre::normalization(j, h)).collect());
            derivs.push((0..=k).map(|j| d[j] * legendre::normalization(j, h) * 2.0 / h).collect());
        }
        Self { values, derivs }
    }
}

fn modal_dofs(n: usize, k: usize) -> Vec<Dof> {
    (0..n)
        .flat_map(|element| (0..=k).map(move |mode| Dof::Mode { element, mode }))
        .collect()
}

fn assemble_pg1(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> (LinearSystem, ContinuousSpace) {
    let beta = problem.velocity();
    let n = mesh.n_elements();
    let space = ContinuousSpace::new(mesh, k, beta > 0.0, beta < 0.0);
    let size = space.n_dofs();
    let mut a = DenseMatrix::zeros(size, size);
    let mut rhs = vec![0.0; size];
    let rule = gauss_rule(k + 1).expect("degree checked");
    let shapes = ShapeTable::new(k, &rule);
    let src_rule = problem.source_rule(k - 1);
    for e in 0..n {
        let (xa, xb) = mesh.element(e);
        let h = xb - xa;
        let modal = ModalTable::new(k - 1, &rule, h);
        for (q, &w) in rule.weights().iter().enumerate() {
            let jw = 0.5 * h * w;
            for local in 0..=k {
                let Some(col) = space.global(e, local) else { continue };
                let du = shapes.derivs[q][local] * 2.0 / h;
                for j in 0..k {
                    a.add(e * k + j, col, beta * du * modal.values[q][j] * jw);
                }
            }
        }
        let src_modal = ModalTable::new(k - 1, &src_rule, h);
        for (q, (x, w)) in src_rule.mapped(xa, xb).enumerate() {
            let fx = problem.f(mesh, e, x) * w;
            for j in 0..k {
                rhs[e * k + j] += fx * src_modal.values[q][j];
            }
        }
    }
    let dofs = space.dofs();
    (LinearSystem { matrix: a, rhs, dofs }, space)
}

/// PG1 with `k ≥ 2`; the inflow value is eliminated from the trial space.
pub fn solve_pg1(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<BrokenPoly> {
    Method::Pg1.check_degree(k)?;
    problem.source().check_mesh(mesh)?;
    let (system, space) = assemble_pg1(problem, mesh, k);
    let x = system.solve()?;
    Ok(space.to_broken(&x))
}

fn assemble_pg2(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<LinearSystem> {
    let beta = problem.velocity();
    let n = mesh.n_elements();
    let m = k + 1;
    let space = ContinuousSpace::new(mesh, k + 1, beta < 0.0, beta > 0.0);
    let size = space.n_dofs();
    debug_assert_eq!(size, n * m);
    let mut a = DenseMatrix::zeros(size, size);
    let mut rhs = vec![0.0; size];
    let rule = gauss_rule(k + 2).expect("degree checked");
    let shapes = ShapeTable::new(k + 1, &rule);
    let src_rule = problem.source_rule(k + 1);
    let src_shapes = ShapeTable::new(k + 1, &src_rule);
    for e in 0..n {
        let (xa, xb) = mesh.element(e);
        let h = xb - xa;
        let modal = ModalTable::new(k, &rule, h);
        for (q, &w) in rule.weights().iter().enumerate() {
            let jw = 0.5 * h * w;
            for local in 0..=k + 1 {
                let Some(row) = space.global(e, local) else { continue };
                let dv = shapes.derivs[q][local] * 2.0 / h;
                for j in 0..m {
                    a.add(row, e * m + j, -beta * modal.values[q][j] * dv * jw);
                }
            }
        }
        for (q, (x, w)) in src_rule.mapped(xa, xb).enumerate() {
            let fx = problem.f(mesh, e, x) * w;
            for local in 0..=k + 1 {
                if let Some(row) = space.global(e, local) {
                    rhs[row] += fx * src_shapes.values[q][local];
                }
            }
        }
    }
    LinearSystem::new(a, rhs, modal_dofs(n, k))
}

/// PG2 with `k ≥ 0`.
pub fn solve_pg2(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<BrokenPoly> {
    let system = Method::Pg2.assemble(problem, mesh, k)?;
    let x = system.solve()?;
    BrokenPoly::from_coeffs(mesh, k, x)
}

fn assemble_dg(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<LinearSystem> {
    let beta = problem.velocity();
    let n = mesh.n_elements();
    let m = k + 1;
    let size = n * m;
    let mut a = DenseMatrix::zeros(size, size);
    let mut rhs = vec![0.0; size];
    let rule = gauss_rule(k + 1).expect("degree checked");
    let src_rule = problem.source_rule(k);
    // φ_j(±1) = (±1)^j sqrt((2j + 1)/h)
    let trace = |e: usize, j: usize, right: bool| {
        let s = legendre::normalization(j, mesh.h(e));
        if right || j.is_multiple_of(2) {
            s
        } else {
            -s
        }
    };
    for e in 0..n {
        let (xa, xb) = mesh.element(e);
        let h = xb - xa;
        let modal = ModalTable::new(k, &rule, h);
        // -(u, β v')_K
        for (q, &w) in rule.weights().iter().enumerate() {
            let jw = 0.5 * h * w;
            for i in 0..m {
                for j in 0..m {
                    a.add(e * m + i, e * m + j, -beta * modal.values[q][j] * modal.derivs[q][i] * jw);
                }
            }
        }
        let src_modal = ModalTable::new(k, &src_rule, h);
        for (q, (x, w)) in src_rule.mapped(xa, xb).enumerate() {
            let fx = problem.f(mesh, e, x) * w;
            for i in 0..m {
                rhs[e * m + i] += fx * src_modal.values[q][i];
            }
        }
    }
    // interior vertices: -β û [v] with the upwind value û and [v] = v⁺ - v⁻,
    // which equals -β{u}[v] + |β|/2 [u][v]
    for vtx in 1..n {
        let (minus, plus) = (vtx - 1, vtx);
        let (up, up_right) = if beta > 0.0 { (minus, true) } else { (plus, false) };
        for j in 0..m {
            let u_hat = trace(up, j, up_right);
            for i in 0..m {
                a.add(plus * m + i, up * m + j, -beta * u_hat * trace(plus, i, false));
                a.add(minus * m + i, up * m + j, beta * u_hat * trace(minus, i, true));
            }
        }
    }
    // outflow boundary: (β·n)⁺ u v
    let (out_elem, out_right) = if beta > 0.0 { (n - 1, true) } else { (0, false) };
    for i in 0..m {
        for j in 0..m {
            a.add(
                out_elem * m + i,
                out_elem * m + j,
                beta.abs() * trace(out_elem, i, out_right) * trace(out_elem, j, out_right),
            );
        }
    }
    LinearSystem::new(a, rhs, modal_dofs(n, k))
}

/// Upwind dG with `k ≥ 1`.
pub fn solve_dg(problem: &AdvectionProblem, mesh: &Mesh1D, k: usize) -> Result<BrokenPoly> {
    let system = Method::Dg.assemble(problem, mesh, k)?;
    let x = system.solve()?;
    BrokenPoly::from_coeffs(mesh, k, x)
}
