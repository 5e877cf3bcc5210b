//! The residual functional `⟨R(u_h), v⟩ = (f, v) + (u_h, β v')`, the test of
//! its orthogonality to hat functions, and dual norms computed by Riesz
//! representation in the `(β z', β v')` inner product.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LinearSystem};
use crate::mesh::{Mesh1D, VertexClass};
use crate::poly::{BrokenPoly, Side};
use crate::problem::AdvectionProblem;
use crate::quadrature::{gauss_rule, MAX_POINTS};
use crate::space::{ContinuousSpace, ShapeTable};
use crate::ORTHOGONALITY_TOL;

/// Default refinement factor of the enriched test space.
pub const DEFAULT_REFINE: usize = 8;
/// Default degree increase of the enriched test space.
pub const DEFAULT_DEGREE_BOOST: usize = 2;

/// Value and slope of the hat function of `vertex` on element `e`.
pub(crate) fn hat_on_element(mesh: &Mesh1D, vertex: usize, e: usize, x: f64) -> (f64, f64) {
    let (a, b) = mesh.element(e);
    let h = b - a;
    if vertex == e {
        ((b - x) / h, -1.0 / h)
    } else if vertex == e + 1 {
        ((x - a) / h, 1.0 / h)
    } else {
        (0.0, 0.0)
    }
}

/// Elements touching `vertex`.
pub(crate) fn vertex_elements(mesh: &Mesh1D, vertex: usize) -> impl Iterator<Item = usize> {
    let n = mesh.n_elements();
    let lo = vertex.saturating_sub(1);
    let hi = vertex.min(n - 1);
    lo..=hi
}

fn points_for(degree: usize) -> usize {
    (degree / 2 + 1).min(MAX_POINTS)
}

/// `‖f‖²_K` by quadrature.
pub(crate) fn source_norm_sq(problem: &AdvectionProblem, mesh: &Mesh1D, e: usize) -> f64 {
    let rule = problem.source_rule(problem.source().element_degree().unwrap_or(0));
    let (a, b) = mesh.element(e);
    rule.integrate(a, b, |x| {
        let f = problem.f(mesh, e, x);
        f * f
    })
}

/// The residual of a candidate `u_h` for a given problem.
#[derive(Debug, Clone, Copy)]
pub struct Residual<'a> {
    uh: &'a BrokenPoly,
    problem: &'a AdvectionProblem,
}

impl<'a> Residual<'a> {
    pub fn new(uh: &'a BrokenPoly, problem: &'a AdvectionProblem) -> Result<Self> {
        problem.source().check_mesh(uh.mesh())?;
        Ok(Self { uh, problem })
    }

    pub fn discrete_solution(&self) -> &BrokenPoly {
        self.uh
    }

    pub fn problem(&self) -> &AdvectionProblem {
        self.problem
    }

    /// `⟨R, v⟩` for a piecewise polynomial `v` whose mesh is nested in the
    /// mesh of `u_h` (every element of `v` lies inside one element of `u_h`).
    pub fn apply(&self, v: &BrokenPoly) -> Result<f64> {
        let coarse = self.uh.mesh();
        let fine = v.mesh();
        let beta = self.problem.velocity();
        let uv = gauss_rule(points_for(self.uh.degree() + v.degree()))?;
        let fv = self.problem.source_rule(v.degree());
        let tol = 1e-12 * (coarse.end() - coarse.start());
        let mut total = 0.0;
        for e in 0..fine.n_elements() {
            let (a, b) = fine.element(e);
            let c = coarse.locate(0.5 * (a + b), Side::Left)?;
            let (ca, cb) = coarse.element(c);
            if a < ca - tol || b > cb + tol {
                return Err(Error::invalid(format!(
                    "test function element [{a}, {b}] is not contained in an element of the discrete solution's mesh"
                )));
            }
            total += uv.integrate(a, b, |x| beta * self.uh.eval_in(c, x).0 * v.eval_in(e, x).1);
            total += fv.integrate(a, b, |x| self.problem.f(coarse, c, x) * v.eval_in(e, x).0);
        }
        Ok(total)
    }

    /// `⟨R, v⟩` for a smooth `v` given as `x ↦ (v(x), v'(x))`, integrated with
    /// the problem's quadrature order on each element of `u_h`.
    pub fn apply_fn<F: Fn(f64) -> (f64, f64)>(&self, v: F) -> f64 {
        let mesh = self.uh.mesh();
        let beta = self.problem.velocity();
        let rule = gauss_rule(self.problem.quad_order()).expect("validated order");
        (0..mesh.n_elements())
            .map(|e| {
                let (a, b) = mesh.element(e);
                rule.integrate(a, b, |x| {
                    let (val, der) = v(x);
                    self.problem.f(mesh, e, x) * val + beta * self.uh.eval_in(e, x).0 * der
                })
            })
            .sum()
    }

    /// `r_a = ⟨R, ψ_a⟩`.
    pub fn hat_value(&self, vertex: usize) -> f64 {
        let mesh = self.uh.mesh();
        let beta = self.problem.velocity();
        let uv = gauss_rule(points_for(self.uh.degree())).expect("degree in range");
        let fv = self.problem.source_rule(1);
        vertex_elements(mesh, vertex)
            .map(|e| {
                let (a, b) = mesh.element(e);
                let slope = hat_on_element(mesh, vertex, e, a).1;
                uv.integrate(a, b, |x| beta * self.uh.eval_in(e, x).0 * slope)
                    + fv.integrate(a, b, |x| self.problem.f(mesh, e, x) * hat_on_element(mesh, vertex, e, x).0)
            })
            .sum()
    }

    /// `‖f‖_{ω_a} h_{ω_a} + |β| ‖u_h‖_{ω_a}`.
    pub fn hat_scale(&self, vertex: usize) -> f64 {
        let mesh = self.uh.mesh();
        let (mut f2, mut u2, mut diam) = (0.0, 0.0, 0.0);
        for e in vertex_elements(mesh, vertex) {
            f2 += source_norm_sq(self.problem, mesh, e);
            let n = self.uh.norm_l2_element(e);
            u2 += n * n;
            diam += mesh.h(e);
        }
        libm::sqrt(f2) * diam + self.problem.velocity().abs() * libm::sqrt(u2)
    }
}

/// `⟨R(u_h), v⟩` for `v` on a mesh nested in that of `u_h`.
pub fn apply_residual(uh: &BrokenPoly, problem: &AdvectionProblem, v: &BrokenPoly) -> Result<f64> {
    Residual::new(uh, problem)?.apply(v)
}

/// Outcome of the orthogonality test at one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatOrthogonality {
    pub vertex: usize,
    pub class: VertexClass,
    /// `r_a = ⟨R(u_h), ψ_a⟩`.
    pub value: f64,
    pub scale: f64,
    pub passes: bool,
}

impl HatOrthogonality {
    /// `|r_a| / scale` (zero when both vanish).
    pub fn relative(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value.abs() / self.scale
        }
    }
}

/// `r_a` for every interior and inflow vertex, in vertex order.
pub fn check_hat_orthogonality(uh: &BrokenPoly, problem: &AdvectionProblem) -> Result<Vec<HatOrthogonality>> {
    let res = Residual::new(uh, problem)?;
    let mesh = uh.mesh();
    let beta = problem.velocity();
    Ok((0..mesh.n_vertices())
        .filter(|&a| mesh.vertex_class(a, beta) != VertexClass::Outflow)
        .map(|a| hat_check(&res, a))
        .collect())
}

pub(crate) fn hat_check(res: &Residual<'_>, vertex: usize) -> HatOrthogonality {
    let value = res.hat_value(vertex);
    let scale = res.hat_scale(vertex);
    HatOrthogonality {
        vertex,
        class: res.uh.mesh().vertex_class(vertex, res.problem.velocity()),
        value,
        scale,
        passes: value.abs() <= ORTHOGONALITY_TOL * scale,
    }
}

/// `true` when every interior and inflow vertex passes.
pub fn orthogonality_holds(uh: &BrokenPoly, problem: &AdvectionProblem) -> Result<bool> {
    Ok(check_hat_orthogonality(uh, problem)?.iter().all(|c| c.passes))
}

/// `sup_v ⟨R, v⟩ / ‖β v'‖` over continuous degree-`degree` functions on `sub`,
/// where fine element `i` of `sub` lies in element `coarse(i)` of `u_h`.
fn riesz_norm(
    res: &Residual<'_>,
    sub: &Mesh1D,
    coarse: impl Fn(usize) -> usize,
    degree: usize,
    zero_left: bool,
    zero_right: bool,
) -> Result<f64> {
    let space = ContinuousSpace::new(sub, degree, zero_left, zero_right);
    let size = space.n_dofs();
    if size == 0 {
        return Ok(0.0);
    }
    let uh = res.uh;
    let problem = res.problem;
    let beta = problem.velocity();
    let cmesh = uh.mesh();
    let gram_rule = gauss_rule(points_for(2 * degree))?;
    let gram_shapes = ShapeTable::new(degree, &gram_rule);
    let uv_rule = gauss_rule(points_for(uh.degree() + degree))?;
    let uv_shapes = ShapeTable::new(degree, &uv_rule);
    let fv_rule = problem.source_rule(degree);
    let fv_shapes = ShapeTable::new(degree, &fv_rule);
    let mut gram = DenseMatrix::zeros(size, size);
    let mut rhs = vec![0.0; size];
    let globals: Vec<Option<usize>> = (0..=degree).map(|_| None).collect();
    let mut idx = globals;
    for e in 0..sub.n_elements() {
        let (a, b) = sub.element(e);
        let h = b - a;
        let c = coarse(e);
        for (l, slot) in idx.iter_mut().enumerate() {
            *slot = space.global(e, l);
        }
        for (q, &w) in gram_rule.weights().iter().enumerate() {
            let jw = 2.0 / h * w * beta * beta;
            for (i, gi) in idx.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                for (j, gj) in idx.iter().enumerate() {
                    if let Some(gj) = *gj {
                        gram.add(gi, gj, gram_shapes.derivs[q][i] * gram_shapes.derivs[q][j] * jw);
                    }
                }
            }
        }
        // (u_h, β v') with dx = h/2 dξ and v' = 2/h dv/dξ
        for (q, (x, w)) in uv_rule.mapped(a, b).enumerate() {
            let u = uh.eval_in(c, x).0 * beta * w * 2.0 / h;
            for (i, gi) in idx.iter().enumerate() {
                if let Some(gi) = *gi {
                    rhs[gi] += u * uv_shapes.derivs[q][i];
                }
            }
        }
        for (q, (x, w)) in fv_rule.mapped(a, b).enumerate() {
            let f = problem.f(cmesh, c, x) * w;
            for (i, gi) in idx.iter().enumerate() {
                if let Some(gi) = *gi {
                    rhs[gi] += f * fv_shapes.values[q][i];
                }
            }
        }
    }
    let system = LinearSystem::new(gram, rhs, space.dofs())?;
    let z = system.solve()?;
    let sq: f64 = z.iter().zip(&system.rhs).map(|(a, b)| a * b).sum();
    Ok(libm::sqrt(sq.max(0.0)))
}

fn check_enrichment(m: usize, q: usize) -> Result<()> {
    if m == 0 || q == 0 {
        return Err(Error::invalid(format!(
            "refine factor and degree boost must be at least 1 (got m = {m}, q = {q})"
        )));
    }
    Ok(())
}

/// Lower approximation of `‖R(u_h)‖` over continuous functions of degree
/// `k + q` on the mesh refined `m` times, vanishing at the outflow.
pub fn dual_norm_global(uh: &BrokenPoly, problem: &AdvectionProblem, m: usize, q: usize) -> Result<f64> {
    check_enrichment(m, q)?;
    let res = Residual::new(uh, problem)?;
    let fine = uh.mesh().refine(m)?;
    let beta = problem.velocity();
    riesz_norm(&res, &fine, |e| e / m, uh.degree() + q, beta < 0.0, beta > 0.0)
}

/// Global and patchwise dual norms with the two localization inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct DualNormReport {
    pub global: f64,
    /// `‖R‖_{V_a'}` for every vertex `a`, in vertex order.
    pub local: Vec<f64>,
    pub c_cont_pf: f64,
    /// `‖R‖² / (2 C² Σ_a ‖R‖²_a)`, at most one when the upper bound holds.
    pub upper_ratio: f64,
    /// `Σ_a ‖R‖²_a / (2 ‖R‖²)`, at most one when the lower bound holds.
    pub lower_ratio: f64,
    pub upper_holds: bool,
    pub lower_holds: bool,
}

impl DualNormReport {
    pub fn local_sum_sq(&self) -> f64 {
        self.local.iter().map(|x| x * x).sum()
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Patchwise dual norms on `H¹₀(ω_a)` (interior and outflow vertices) and on
/// functions vanishing at the outflow end of `ω_a` (inflow vertex).
pub fn dual_norms_local(uh: &BrokenPoly, problem: &AdvectionProblem, m: usize, q: usize) -> Result<DualNormReport> {
    check_enrichment(m, q)?;
    let res = Residual::new(uh, problem)?;
    let mesh = uh.mesh();
    let beta = problem.velocity();
    let degree = uh.degree() + q;
    let global = dual_norm_global(uh, problem, m, q)?;
    let mut local = Vec::with_capacity(mesh.n_vertices());
    for patch in mesh.patches(beta)? {
        let first = patch.elements[0];
        let last = *patch.elements.last().expect("patches are nonempty");
        let sub = Mesh1D::from_vertices(mesh.vertices()[first..=last + 1].to_vec())?.refine(m)?;
        let (zl, zr) = match patch.class {
            VertexClass::Inflow => (beta < 0.0, beta > 0.0),
            VertexClass::Interior | VertexClass::Outflow => (true, true),
        };
        let elements = patch.elements.clone();
        local.push(riesz_norm(&res, &sub, |e| elements[e / m], degree, zl, zr)?);
    }
    let c = mesh.cont_pf_constant();
    let sum: f64 = local.iter().map(|x| x * x).sum();
    let g2 = global * global;
    let slack = 1e-12 * g2.max(sum);
    Ok(DualNormReport {
        global,
        c_cont_pf: c,
        upper_ratio: ratio(g2, 2.0 * c * c * sum),
        lower_ratio: ratio(sum, 2.0 * g2),
        upper_holds: g2 <= 2.0 * c * c * sum + slack,
        lower_holds: sum <= 2.0 * g2 + slack,
        local,
    })
}
