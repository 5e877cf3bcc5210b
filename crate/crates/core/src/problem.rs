//! Problem data: velocity, source term and the exact solution.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::mesh::{check_velocity, Mesh1D};
use crate::quadrature::{gauss_rule, QuadRule, MAX_POINTS};

/// Default number of Gauss points per element for non-polynomial data.
pub const DEFAULT_QUAD_ORDER: usize = 15;

/// Right-hand side `f` of `β u' = f`.
///
/// Polynomials are given by monomial coefficients `c_0 + c_1 x + ...` in the
/// global coordinate.
#[derive(Clone)]
pub enum SourceTerm {
    /// `f(x) = atan(x)`.
    Arctan,
    Polynomial(Vec<f64>),
    /// `p(x) + sin(2π x_i)` on element `K_i = [x_i, x_{i+1}]`: a piecewise
    /// polynomial that jumps at every vertex.
    PolynomialWithElementSine(Vec<f64>),
    /// One polynomial per element.
    Piecewise(Vec<Vec<f64>>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTerm::Arctan => write!(f, "Arctan"),
            SourceTerm::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            SourceTerm::PolynomialWithElementSine(c) => {
                f.debug_tuple("PolynomialWithElementSine").field(c).finish()
            }
            SourceTerm::Piecewise(c) => f.debug_tuple("Piecewise").field(c).finish(),
            SourceTerm::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `∫_a^x Σ c_m t^m dt`.
fn monomial_integral(c: &[f64], a: f64, x: f64) -> f64 {
    let prim = |t: f64| c.iter().enumerate().rev().fold(0.0, |acc, (m, &cm)| acc * t + cm / (m + 1) as f64) * t;
    prim(x) - prim(a)
}

fn poly_degree(c: &[f64]) -> usize {
    c.iter().rposition(|&v| v != 0.0).unwrap_or(0)
}

/// `x atan x - ln(1 + x²) / 2`, an antiderivative of `atan`.
pub fn arctan_antiderivative(x: f64) -> f64 {
    x * libm::atan(x) - 0.5 * libm::log1p(x * x)
}

impl SourceTerm {
    /// `x² + x + sin(2π x_i)` on `K_i`.
    pub fn quadratic_with_sine_jumps() -> Self {
        SourceTerm::PolynomialWithElementSine(alloc::vec![0.0, 1.0, 1.0])
    }

    /// Value on element `elem` of `mesh` (the element matters only for
    /// elementwise-defined data).
    pub fn eval(&self, mesh: &Mesh1D, elem: usize, x: f64) -> f64 {
        match self {
            SourceTerm::Arctan => libm::atan(x),
            SourceTerm::Polynomial(c) => horner(c, x),
            SourceTerm::PolynomialWithElementSine(c) => {
                horner(c, x) + libm::sin(2.0 * PI * mesh.vertices()[elem])
            }
            SourceTerm::Piecewise(p) => horner(&p[elem], x),
            SourceTerm::Custom(f) => f(x),
        }
    }

    /// Polynomial degree on each element, `None` for non-polynomial data.
    pub fn element_degree(&self) -> Option<usize> {
        match self {
            SourceTerm::Arctan | SourceTerm::Custom(_) => None,
            SourceTerm::Polynomial(c) | SourceTerm::PolynomialWithElementSine(c) => {
                Some(poly_degree(c))
            }
            SourceTerm::Piecewise(p) => Some(p.iter().map(|c| poly_degree(c)).max().unwrap_or(0)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SourceTerm::Polynomial(c) => c.iter().all(|&v| v == 0.0),
            SourceTerm::Piecewise(p) => p.iter().flatten().all(|&v| v == 0.0),
            _ => false,
        }
    }

    /// Checks that elementwise data matches the mesh.
    pub fn check_mesh(&self, mesh: &Mesh1D) -> Result<()> {
        if let SourceTerm::Piecewise(p) = self {
            if p.len() != mesh.n_elements() {
                return Err(Error::invalid(format!(
                    "piecewise source has {} pieces but the mesh has {} elements",
                    p.len(),
                    mesh.n_elements()
                )));
            }
        }
        Ok(())
    }

    /// `∫_{x_i}^{x} f` for `x` in element `i`; `rule` is used for
    /// non-polynomial data without a closed form.
    fn integral_from_left(&self, mesh: &Mesh1D, elem: usize, x: f64, rule: &QuadRule) -> f64 {
        let a = mesh.vertices()[elem];
        match self {
            SourceTerm::Arctan => arctan_antiderivative(x) - arctan_antiderivative(a),
            SourceTerm::Polynomial(c) => monomial_integral(c, a, x),
            SourceTerm::PolynomialWithElementSine(c) => {
                monomial_integral(c, a, x) + libm::sin(2.0 * PI * a) * (x - a)
            }
            SourceTerm::Piecewise(p) => monomial_integral(&p[elem], a, x),
            SourceTerm::Custom(f) => rule.integrate(a, x, |t| f(t)),
        }
    }
}

/// The advection problem `β u' = f` with `u = 0` at the inflow end.
#[derive(Debug, Clone)]
pub struct AdvectionProblem {
    velocity: f64,
    source: SourceTerm,
    quad_order: usize,
    exact_available: bool,
    poincare: f64,
}

/// The elementwise Poincaré constant of an interval, `1/π`.
pub const POINCARE_CONSTANT: f64 = 1.0 / core::f64::consts::PI;

impl AdvectionProblem {
    pub fn new(velocity: f64, source: SourceTerm) -> Result<Self> {
        check_velocity(velocity)?;
        Ok(Self {
            velocity,
            source,
            quad_order: DEFAULT_QUAD_ORDER,
            exact_available: true,
            poincare: POINCARE_CONSTANT,
        })
    }

    /// Replaces the constant `C_P` in the oscillation indicator
    /// `C_P h_K / |β| ‖(I - Π_{k'}) f‖_K`. The default `1/π` is the sharp
    /// value; any larger constant keeps the bound guaranteed.
    pub fn with_poincare_constant(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "Poincaré constant must be positive and finite, got {c}"
            )));
        }
        self.poincare = c;
        Ok(self)
    }

    pub fn poincare_constant(&self) -> f64 {
        self.poincare
    }

    /// Gauss points per element used for non-polynomial sources.
    pub fn with_quad_order(mut self, q: usize) -> Result<Self> {
        if q == 0 || q > MAX_POINTS {
            return Err(Error::invalid(format!(
                "quadrature order must lie in 1..={MAX_POINTS}, got {q}"
            )));
        }
        self.quad_order = q;
        Ok(self)
    }

    /// Marks the exact solution as unknown; error-dependent outputs are then
    /// reported as unavailable.
    pub fn without_exact_solution(mut self) -> Self {
        self.exact_available = false;
        self
    }

    pub fn with_velocity(&self, velocity: f64) -> Result<Self> {
        check_velocity(velocity)?;
        let mut p = self.clone();
        p.velocity = velocity;
        Ok(p)
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn source(&self) -> &SourceTerm {
        &self.source
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact_available
    }

    pub fn f(&self, mesh: &Mesh1D, elem: usize, x: f64) -> f64 {
        self.source.eval(mesh, elem, x)
    }

    /// Points per element for integrals of `f` against degree-`test_degree`
    /// polynomials: exact for polynomial data, `quad_order` otherwise.
    pub fn source_points(&self, test_degree: usize) -> usize {
        match self.source.element_degree() {
            Some(d) => ((d + test_degree) / 2 + 1).min(MAX_POINTS),
            None => self.quad_order.max((test_degree + 2) / 2).min(MAX_POINTS),
        }
    }

    pub fn source_rule(&self, test_degree: usize) -> QuadRule {
        gauss_rule(self.source_points(test_degree)).expect("point count in range")
    }

    pub fn exact_solution(&self, mesh: &Mesh1D) -> Result<ExactSolution> {
        if !self.exact_available {
            return Err(Error::Unavailable);
        }
        self.source.check_mesh(mesh)?;
        let rule = gauss_rule(self.quad_order).expect("validated order");
        let n = mesh.n_elements();
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut total = 0.0;
        cumulative.push(0.0);
        for e in 0..n {
            total += self.source.integral_from_left(mesh, e, mesh.vertices()[e + 1], &rule);
            cumulative.push(total);
        }
        Ok(ExactSolution {
            mesh: mesh.clone(),
            source: self.source.clone(),
            velocity: self.velocity,
            cumulative,
            rule,
        })
    }
}

/// `u(x) = (1/β) ∫_{inflow}^{x} f`, evaluated elementwise.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    mesh: Mesh1D,
    source: SourceTerm,
    velocity: f64,
    /// `∫_{x_0}^{x_i} f` at every vertex.
    cumulative: Vec<f64>,
    rule: QuadRule,
}

impl ExactSolution {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    /// Value at `x` in element `elem`.
    pub fn eval(&self, elem: usize, x: f64) -> f64 {
        if let SourceTerm::Arctan = self.source {
            let inflow = if self.velocity > 0.0 {
                self.mesh.start()
            } else {
                self.mesh.end()
            };
            return (arctan_antiderivative(x) - arctan_antiderivative(inflow)) / self.velocity;
        }
        let from_start =
            self.cumulative[elem] + self.source.integral_from_left(&self.mesh, elem, x, &self.rule);
        if self.velocity > 0.0 {
            from_start / self.velocity
        } else {
            let total = self.cumulative[self.mesh.n_elements()];
            (from_start - total) / self.velocity
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_zero_velocity() {
        assert!(AdvectionProblem::new(0.0, SourceTerm::Arctan).is_err());
        assert!(AdvectionProblem::new(f64::NAN, SourceTerm::Arctan).is_err());
    }

    #[test]
    fn exact_solution_closed_forms() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        // f = 2x, β = 1 → u = x²
        let p = AdvectionProblem::new(1.0, SourceTerm::Polynomial(vec![0.0, 2.0])).unwrap();
        let u = p.exact_solution(&mesh).unwrap();
        assert_relative_eq!(u.eval(2, 0.9), 0.81, epsilon = 1e-15);
        // β < 0: inflow on the right, u = (x² - 1) / β
        let p = p.with_velocity(-2.0).unwrap();
        let u = p.exact_solution(&mesh).unwrap();
        assert_relative_eq!(u.eval(0, 0.2), (0.04 - 1.0) / -2.0, epsilon = 1e-15);
        assert_relative_eq!(u.eval(2, 1.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn arctan_solution_and_custom_quadrature_agree() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let a = AdvectionProblem::new(1.0, SourceTerm::Arctan).unwrap();
        let c = AdvectionProblem::new(1.0, SourceTerm::Custom(Arc::new(libm::atan))).unwrap();
        let ua = a.exact_solution(&mesh).unwrap();
        let uc = c.exact_solution(&mesh).unwrap();
        for &(e, x) in &[(0, 0.1), (1, 0.3), (3, 0.99)] {
            assert_relative_eq!(ua.eval(e, x), uc.eval(e, x), epsilon = 1e-15);
        }
        let x: f64 = 0.7;
        assert_relative_eq!(ua.eval(2, x), x * x.atan() - 0.5 * (1.0 + x * x).ln(), epsilon = 1e-15);
    }

    #[test]
    fn sine_jump_source_solution_is_continuous() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let p = AdvectionProblem::new(1.0, SourceTerm::quadratic_with_sine_jumps()).unwrap();
        let u = p.exact_solution(&mesh).unwrap();
        for a in 1..4 {
            let x = mesh.vertices()[a];
            assert_relative_eq!(u.eval(a - 1, x), u.eval(a, x), epsilon = 1e-15);
        }
        assert_eq!(p.source().element_degree(), Some(2));
        assert_relative_eq!(p.f(&mesh, 1, 0.3), 0.09 + 0.3 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unavailable_exact_solution() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        let p = AdvectionProblem::new(1.0, SourceTerm::Arctan).unwrap().without_exact_solution();
        assert_eq!(p.exact_solution(&mesh).unwrap_err(), Error::Unavailable);
    }

    #[test]
    fn piecewise_length_checked() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        let p = AdvectionProblem::new(1.0, SourceTerm::Piecewise(vec![vec![1.0]; 2])).unwrap();
        assert!(p.exact_solution(&mesh).is_err());
    }
}
