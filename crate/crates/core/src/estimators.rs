//! The guaranteed estimator `η = {Σ_K (η_NC,K + η_osc,K)²}^{1/2}`, exact
//! errors, effectivity indices and efficiency diagnostics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::legendre;
use crate::mesh::Mesh1D;
use crate::poly::BrokenPoly;
use crate::problem::AdvectionProblem;
use crate::quadrature::{gauss_rule, QuadRule, MAX_POINTS};
use crate::reconstruction::{assemble_global_unchecked, Reconstruction, StructureCheck};
use crate::residual::{check_hat_orthogonality, hat_on_element, vertex_elements, HatOrthogonality, Residual};

/// Slack of the guaranteed-bound check, relative to `‖u_h‖ + ‖u - u_h‖`.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub kprime: usize,
    /// `‖u_h - s_h‖_K` per element.
    pub eta_nc_elements: Vec<f64>,
    /// `C_P h_K / |β| ‖(I - Π_{k'}) f‖_K` per element.
    pub eta_osc_elements: Vec<f64>,
    /// `ℓ2` sum of the nonconformity indicators.
    pub eta_nc: f64,
    /// `ℓ2` sum of the oscillation indicators.
    pub eta_osc: f64,
    /// `η`.
    pub estimator: f64,
    /// `‖u - u_h‖` when the exact solution is available.
    pub exact_error: Option<f64>,
    /// `η / ‖u - u_h‖`.
    pub i_eff: Option<f64>,
    /// Hat-orthogonality results for interior and inflow vertices.
    pub orthogonality: Vec<HatOrthogonality>,
    pub orthogonality_ok: bool,
    /// Structural checks of `s_h`.
    pub structure: StructureCheck,
    pub reconstruction: Reconstruction,
}

impl EstimateReport {
    /// Largest `|r_a| / scale`.
    pub fn max_orthogonality(&self) -> f64 {
        self.orthogonality.iter().map(|c| c.relative()).fold(0.0, f64::max)
    }

    /// `‖u - u_h‖ ≤ η` up to [`BOUND_SLACK`]; `None` without an exact solution.
    pub fn bound_holds(&self, uh_norm: f64) -> Option<bool> {
        self.exact_error
            .map(|err| err <= self.estimator + BOUND_SLACK * (uh_norm + err))
    }
}

fn rule_for(problem: &AdvectionProblem, extra_degree: usize) -> QuadRule {
    let d = problem.source().element_degree().unwrap_or(0);
    problem.source_rule(d + extra_degree)
}

/// `‖(I - Π_{P_p(K)}) g‖_K` and `‖g‖_K`, with `g` sampled on `rule`.
fn projection_remainder(a: f64, b: f64, p: usize, rule: &QuadRule, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let h = b - a;
    let mut vals = vec![0.0; p + 1];
    let mut ders = vec![0.0; p + 1];
    let samples: Vec<(f64, f64, f64)> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&xi, &w)| (xi, 0.5 * h * w, g(0.5 * (a + b) + 0.5 * h * xi)))
        .collect();
    let mut coeffs = vec![0.0; p + 1];
    for &(xi, w, gx) in &samples {
        legendre::tabulate(xi, &mut vals, &mut ders);
        for j in 0..=p {
            coeffs[j] += w * gx * vals[j] * legendre::normalization(j, h);
        }
    }
    let (mut rem, mut full) = (0.0, 0.0);
    for &(xi, w, gx) in &samples {
        legendre::tabulate(xi, &mut vals, &mut ders);
        let proj: f64 = (0..=p)
            .map(|j| coeffs[j] * vals[j] * legendre::normalization(j, h))
            .sum();
        rem += w * (gx - proj) * (gx - proj);
        full += w * gx * gx;
    }
    (libm::sqrt(rem), libm::sqrt(full))
}

/// `C_P h_K / |β| ‖(I - Π_{k'}) f‖_K` for every element.
pub fn oscillation_indicators(problem: &AdvectionProblem, mesh: &Mesh1D, kprime: usize) -> Vec<f64> {
    let rule = rule_for(problem, kprime);
    let c = problem.poincare_constant() / problem.velocity().abs();
    (0..mesh.n_elements())
        .map(|e| {
            let (a, b) = mesh.element(e);
            c * (b - a) * projection_remainder(a, b, kprime, &rule, |x| problem.f(mesh, e, x)).0
        })
        .collect()
}

/// Computes the reconstruction and the estimator for `u_h`.
///
/// The estimate is computed even when the residual is not orthogonal to the
/// hat functions; `orthogonality_ok` then reports that the bound is void.
pub fn estimate(uh: &BrokenPoly, problem: &AdvectionProblem, kprime: usize) -> Result<EstimateReport> {
    let res = Residual::new(uh, problem)?;
    let mesh = uh.mesh();
    let orthogonality = check_hat_orthogonality(uh, problem)?;
    let orthogonality_ok = orthogonality.iter().all(|c| c.passes);
    let reconstruction = assemble_global_unchecked(&res, kprime)?;
    let diff = uh.sub(&reconstruction.s_h)?;
    let eta_nc_elements: Vec<f64> = (0..mesh.n_elements()).map(|e| diff.norm_l2_element(e)).collect();
    let eta_osc_elements = oscillation_indicators(problem, mesh, kprime);
    let l2 = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum());
    let estimator = libm::sqrt(
        eta_nc_elements
            .iter()
            .zip(&eta_osc_elements)
            .map(|(a, b)| (a + b) * (a + b))
            .sum(),
    );
    let exact = match exact_error(uh, problem) {
        Ok(err) => Some(err),
        Err(Error::Unavailable) => None,
        Err(e) => return Err(e),
    };
    let structure = reconstruction.structure(problem);
    Ok(EstimateReport {
        kprime,
        eta_nc: l2(&eta_nc_elements),
        eta_osc: l2(&eta_osc_elements),
        estimator,
        exact_error: exact,
        i_eff: exact.map(|err| estimator / err),
        eta_nc_elements,
        eta_osc_elements,
        orthogonality,
        orthogonality_ok,
        structure,
        reconstruction,
    })
}

/// `‖u - u_h‖²_K` per element with a `q`-point rule.
fn error_squares(uh: &BrokenPoly, problem: &AdvectionProblem, q: usize) -> Result<Vec<f64>> {
    let mesh = uh.mesh();
    let exact = problem.exact_solution(mesh)?;
    let rule = gauss_rule(q)?;
    Ok((0..mesh.n_elements())
        .map(|e| {
            let (a, b) = mesh.element(e);
            rule.integrate(a, b, |x| {
                let d = exact.eval(e, x) - uh.eval_in(e, x).0;
                d * d
            })
        })
        .collect())
}

fn element_errors(uh: &BrokenPoly, problem: &AdvectionProblem) -> Result<Vec<f64>> {
    let q = problem.quad_order();
    let coarse = error_squares(uh, problem, q)?;
    let fine_q = (q + 5).min(MAX_POINTS);
    if fine_q == q {
        return Ok(coarse);
    }
    let fine = error_squares(uh, problem, fine_q)?;
    let (c, f): (f64, f64) = (coarse.iter().sum(), fine.iter().sum());
    // keep the higher order result when the two rules disagree
    if (c - f).abs() > 1e-10 * f {
        Ok(fine)
    } else {
        Ok(coarse)
    }
}

/// `‖u - u_h‖` against the problem's exact solution, by Gauss quadrature
/// of order `quad_order`, cross-checked with five more points.
pub fn exact_error(uh: &BrokenPoly, problem: &AdvectionProblem) -> Result<f64> {
    problem.source().check_mesh(uh.mesh())?;
    Ok(libm::sqrt(element_errors(uh, problem)?.iter().sum()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    pub c_cont_pf: f64,
    /// `‖u - u_h‖_{ω_a}` per vertex.
    pub patch_errors: Vec<f64>,
    /// `C_P h_{ω_a} / |β| ‖(I - Π_{P_{k'}(T_a)}) (f ψ_a)‖_{ω_a}` per vertex.
    pub patch_oscillations: Vec<f64>,
    /// `η_NC,K / (C Σ_a ‖u - u_h‖_{ω_a} + Σ_a osc_a)` per element.
    pub local_ratios: Vec<f64>,
    pub max_local_ratio: f64,
    /// `‖u_h - s_h‖ / (2 C ‖u - u_h‖)`.
    pub global_ratio: f64,
    /// Whether `f ψ_a ∈ P_{k'}(T_a)` for every vertex.
    pub global_hypothesis: bool,
}

/// Relative size below which an indicator is treated as rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Local and global efficiency ratios for an existing report.
pub fn efficiency_report(uh: &BrokenPoly, problem: &AdvectionProblem, report: &EstimateReport) -> Result<EfficiencyReport> {
    let mesh = uh.mesh();
    let beta = problem.velocity();
    let kprime = report.kprime;
    let c = mesh.cont_pf_constant();
    let err_sq = element_errors(uh, problem)?;
    let rule = rule_for(problem, kprime.max(1) + 1);
    let mut patch_errors = Vec::with_capacity(mesh.n_vertices());
    let mut patch_oscillations = Vec::with_capacity(mesh.n_vertices());
    let mut hypothesis = true;
    for a in 0..mesh.n_vertices() {
        let (mut e2, mut r2, mut g2, mut diam) = (0.0, 0.0, 0.0, 0.0);
        for e in vertex_elements(mesh, a) {
            e2 += err_sq[e];
            let (xa, xb) = mesh.element(e);
            let (r, g) = projection_remainder(xa, xb, kprime, &rule, |x| {
                problem.f(mesh, e, x) * hat_on_element(mesh, a, e, x).0
            });
            r2 += r * r;
            g2 += g * g;
            diam += xb - xa;
        }
        let (r, g) = (libm::sqrt(r2), libm::sqrt(g2));
        hypothesis &= r <= 1e-10 * g;
        patch_errors.push(libm::sqrt(e2));
        patch_oscillations.push(problem.poincare_constant() * diam / beta.abs() * r);
    }
    let local_ratios: Vec<f64> = (0..mesh.n_elements())
        .map(|e| {
            let den = c * (patch_errors[e] + patch_errors[e + 1]) + patch_oscillations[e] + patch_oscillations[e + 1];
            let eta = report.eta_nc_elements[e];
            if eta <= NOISE_FLOOR * uh.norm_l2_element(e) {
                0.0
            } else {
                safe_ratio(eta, den)
            }
        })
        .collect();
    let total_err = libm::sqrt(err_sq.iter().sum());
    Ok(EfficiencyReport {
        c_cont_pf: c,
        max_local_ratio: local_ratios.iter().copied().fold(0.0, f64::max),
        global_ratio: if report.eta_nc <= NOISE_FLOOR * uh.norm_l2() {
            0.0
        } else {
            safe_ratio(report.eta_nc, 2.0 * c * total_err)
        },
        global_hypothesis: hypothesis,
        patch_errors,
        patch_oscillations,
        local_ratios,
    })
}
