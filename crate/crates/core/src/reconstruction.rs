//! Patchwise conforming reconstruction `s_h = Σ_a ψ_a s_h^a`.
//!
//! On the patch `ω_a` of vertex `a`, `s_h^a` is a continuous polynomial of
//! degree `k'` with
//! `(β (ψ_a s_h^a)', v) = (f ψ_a + β ψ_a' u_h, v)` for all `v ∈ P_{k'}(T_a)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::legendre;
use crate::linalg::{DenseMatrix, Dof, LinearSystem};
use crate::mesh::{Mesh1D, VertexClass};
use crate::poly::{project_l2_with, BrokenPoly};
use crate::problem::AdvectionProblem;
use crate::quadrature::{gauss_rule, MAX_POINTS};
use crate::residual::{hat_check, hat_on_element, Residual};
use crate::space::ContinuousSpace;

/// The local problem at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchReconstruction {
    pub vertex: usize,
    pub class: VertexClass,
    /// Global indices of the patch elements, in increasing order.
    pub elements: Vec<usize>,
    /// `s_h^a` on the patch elements (element `i` of its mesh is
    /// `elements[i]`), continuous, of degree `k'`.
    pub local: BrokenPoly,
    /// Residual of the test equation removed from an interior patch (zero for
    /// boundary patches).
    pub dropped_residual: f64,
    /// Largest residual of the retained equations after the solve.
    pub solve_residual: f64,
    /// `‖f‖_{ω_a} h_{ω_a} + |β| ‖u_h‖_{ω_a}`, the natural size of the data.
    pub data_scale: f64,
}

impl PatchReconstruction {
    /// `s_h^a` at `x` in global element `elem` (zero outside the patch).
    pub fn eval(&self, elem: usize, x: f64) -> f64 {
        match self.elements.iter().position(|&e| e == elem) {
            Some(i) => self.local.eval_in(i, x).0,
            None => 0.0,
        }
    }
}

/// Solves the local problem at `vertex` after checking that the residual of
/// `u_h` is orthogonal to `ψ_a` (for interior and inflow vertices).
pub fn solve_patch(uh: &BrokenPoly, problem: &AdvectionProblem, vertex: usize, kprime: usize) -> Result<PatchReconstruction> {
    let res = Residual::new(uh, problem)?;
    if vertex >= uh.mesh().n_vertices() {
        return Err(Error::invalid(format!("vertex {vertex} out of range")));
    }
    if uh.mesh().vertex_class(vertex, problem.velocity()) != VertexClass::Outflow {
        let check = hat_check(&res, vertex);
        if !check.passes {
            return Err(Error::PreconditionViolated {
                vertex,
                residual: check.value,
                scale: check.scale,
            });
        }
    }
    solve_patch_unchecked(&res, vertex, kprime)
}

pub(crate) fn solve_patch_unchecked(res: &Residual<'_>, vertex: usize, kprime: usize) -> Result<PatchReconstruction> {
    if kprime + 3 > MAX_POINTS {
        return Err(Error::invalid("reconstruction degree too large"));
    }
    let uh = res.discrete_solution();
    let problem = res.problem();
    let mesh = uh.mesh();
    let beta = problem.velocity();
    let patch = mesh.patch(vertex, beta)?;
    let elements = patch.elements.clone();
    let first = elements[0];
    let sub = Mesh1D::from_vertices(mesh.vertices()[first..=first + elements.len()].to_vec())?;

    // trial basis: continuous P_{k'} on the patch, as broken polynomials
    let trial: Vec<BrokenPoly> = if kprime == 0 {
        let c: Vec<f64> = (0..sub.n_elements()).map(|i| libm::sqrt(sub.h(i))).collect();
        vec![BrokenPoly::from_coeffs(&sub, 0, c)?]
    } else {
        let space = ContinuousSpace::new(&sub, kprime, false, false);
        (0..space.n_dofs())
            .map(|i| {
                let mut unit = vec![0.0; space.n_dofs()];
                unit[i] = 1.0;
                space.to_broken(&unit)
            })
            .collect()
    };
    let n_trial = trial.len();
    let modes = kprime + 1;
    let n_test = sub.n_elements() * modes;

    let mat_rule = gauss_rule(kprime + 2)?;
    let uv_rule = gauss_rule((uh.degree() + kprime) / 2 + 1)?;
    let fv_rule = problem.source_rule(kprime + 1);
    let mut full = DenseMatrix::zeros(n_test, n_trial);
    let mut rhs = vec![0.0; n_test];
    let mut p = vec![0.0; modes];
    let mut d = vec![0.0; modes];
    for (i, &e) in elements.iter().enumerate() {
        let (a, b) = sub.element(i);
        let h = b - a;
        let mut test = |x: f64, out: &mut [f64]| {
            legendre::tabulate((2.0 * x - a - b) / h, &mut p, &mut d);
            for j in 0..modes {
                out[j] = p[j] * legendre::normalization(j, h);
            }
        };
        let mut phi = vec![0.0; modes];
        for (x, w) in mat_rule.mapped(a, b) {
            test(x, &mut phi);
            let (psi, dpsi) = hat_on_element(mesh, vertex, e, x);
            for (col, s) in trial.iter().enumerate() {
                let (sv, sd) = s.eval_in(i, x);
                let flux = beta * (dpsi * sv + psi * sd) * w;
                for j in 0..modes {
                    full.add(i * modes + j, col, flux * phi[j]);
                }
            }
        }
        for (x, w) in uv_rule.mapped(a, b) {
            test(x, &mut phi);
            let g = beta * hat_on_element(mesh, vertex, e, x).1 * uh.eval_in(e, x).0 * w;
            for j in 0..modes {
                rhs[i * modes + j] += g * phi[j];
            }
        }
        for (x, w) in fv_rule.mapped(a, b) {
            test(x, &mut phi);
            let g = problem.f(mesh, e, x) * hat_on_element(mesh, vertex, e, x).0 * w;
            for j in 0..modes {
                rhs[i * modes + j] += g * phi[j];
            }
        }
    }

    // On an interior patch the test space has one more function than the
    // trial space; the constant mode of the downwind element is dropped.
    let dropped = if elements.len() == 2 {
        let down = patch.downwind_element(beta).expect("interior patch");
        let local = elements.iter().position(|&e| e == down).expect("patch element");
        Some(local * modes)
    } else {
        None
    };
    let rows: Vec<usize> = (0..n_test).filter(|r| Some(*r) != dropped).collect();
    debug_assert_eq!(rows.len(), n_trial);
    let mut square = DenseMatrix::zeros(n_trial, n_trial);
    for (ri, &r) in rows.iter().enumerate() {
        for c in 0..n_trial {
            square.set(ri, c, full.get(r, c));
        }
    }
    let square_rhs: Vec<f64> = rows.iter().map(|&r| rhs[r]).collect();
    let dofs = (0..n_trial).map(|i| Dof::Mode { element: 0, mode: i }).collect();
    let system = LinearSystem::new(square, square_rhs, dofs)?;
    let x = system.solve()?;

    let residuals: Vec<f64> = full
        .mul_vec(&x)
        .iter()
        .zip(&rhs)
        .map(|(ax, b)| (ax - b).abs())
        .collect();
    let dropped_residual = dropped.map_or(0.0, |r| residuals[r]);
    let solve_residual = rows.iter().map(|&r| residuals[r]).fold(0.0, f64::max);

    let mut local = BrokenPoly::zeros(&sub, kprime);
    for (c, s) in x.iter().zip(&trial) {
        let s = s.with_degree(kprime);
        for (out, v) in local.coeffs_mut().iter_mut().zip(s.coeffs()) {
            *out += c * v;
        }
    }
    Ok(PatchReconstruction {
        vertex,
        class: patch.class,
        elements,
        local,
        dropped_residual,
        solve_residual,
        data_scale: res.hat_scale(vertex),
    })
}

/// The global reconstruction and its local pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// `s_h`, continuous, of degree `k' + 1`.
    pub s_h: BrokenPoly,
    /// One piece per vertex, in vertex order.
    pub pieces: Vec<PatchReconstruction>,
    pub kprime: usize,
}

/// Measured deviations from the structural properties of `s_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCheck {
    /// Largest jump of `s_h` across interior vertices.
    pub max_jump: f64,
    /// `|s_h|` at the inflow end.
    pub inflow_value: f64,
    /// Largest coefficient of `β s_h' - Π_{k'} f`.
    pub projection_defect: f64,
    /// Largest absolute coefficient of `s_h`.
    pub value_scale: f64,
    /// Largest absolute coefficient of `Π_{k'} f`.
    pub source_scale: f64,
}

impl StructureCheck {
    /// All three properties hold up to `tol` relative to the natural scales.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_jump <= tol * self.value_scale
            && self.inflow_value <= tol * self.value_scale
            && self.projection_defect <= tol * self.source_scale
    }
}

impl Reconstruction {
    pub fn degree(&self) -> usize {
        self.s_h.degree()
    }

    pub fn structure(&self, problem: &AdvectionProblem) -> StructureCheck {
        let mesh = self.s_h.mesh();
        let beta = problem.velocity();
        let inflow = if beta > 0.0 {
            self.s_h.element_traces(0).0
        } else {
            self.s_h.element_traces(mesh.n_elements() - 1).1
        };
        let pf = project_source(problem, mesh, self.kprime);
        let ds = self.s_h.derivative().scaled(beta).with_degree(self.kprime);
        let defect = ds
            .coeffs()
            .iter()
            .zip(pf.coeffs())
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        let max_abs = |p: &BrokenPoly| p.coeffs().iter().fold(0.0, |m: f64, c| m.max(c.abs()));
        StructureCheck {
            max_jump: self.s_h.max_jump(),
            inflow_value: inflow.abs(),
            projection_defect: defect,
            value_scale: max_abs(&self.s_h),
            source_scale: max_abs(&pf),
        }
    }
}

/// `Π_{k'} f` elementwise.
pub(crate) fn project_source(problem: &AdvectionProblem, mesh: &Mesh1D, kprime: usize) -> BrokenPoly {
    let rule = problem.source_rule(kprime);
    project_l2_with(mesh, kprime, &rule, |e, x| problem.f(mesh, e, x))
}

/// Solves every patch problem (checking orthogonality first) and sums the
/// pieces.
pub fn assemble_global(uh: &BrokenPoly, problem: &AdvectionProblem, kprime: usize) -> Result<Reconstruction> {
    let pieces = (0..uh.mesh().n_vertices())
        .map(|a| solve_patch(uh, problem, a, kprime))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(uh.mesh(), pieces, kprime))
}

/// As [`assemble_global`] without the orthogonality precondition.
pub(crate) fn assemble_global_unchecked(res: &Residual<'_>, kprime: usize) -> Result<Reconstruction> {
    let mesh = res.discrete_solution().mesh();
    let pieces = (0..mesh.n_vertices())
        .map(|a| solve_patch_unchecked(res, a, kprime))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(mesh, pieces, kprime))
}

fn combine(mesh: &Mesh1D, pieces: Vec<PatchReconstruction>, kprime: usize) -> Reconstruction {
    let rule = gauss_rule(kprime + 2).expect("degree checked");
    let s_h = project_l2_with(mesh, kprime + 1, &rule, |e, x| {
        [e, e + 1]
            .iter()
            .map(|&a| hat_on_element(mesh, a, e, x).0 * pieces[a].eval(e, x))
            .sum()
    });
    Reconstruction { s_h, pieces, kprime }
}
