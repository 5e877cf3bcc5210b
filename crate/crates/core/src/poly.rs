//! Broken (elementwise) polynomials in the orthonormal Legendre basis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::legendre;
use crate::mesh::Mesh1D;
use crate::quadrature::{gauss_rule, QuadRule};

/// Which one-sided trace to take at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A piecewise polynomial of uniform degree on a [`Mesh1D`].
///
/// Coefficients are stored element-major: element `i` owns
/// `coeffs[i * (degree + 1)..(i + 1) * (degree + 1)]`, the coefficients with
/// respect to the `L2(K_i)`-orthonormal Legendre functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenPoly {
    mesh: Mesh1D,
    degree: usize,
    coeffs: Vec<f64>,
}

impl BrokenPoly {
    pub fn zeros(mesh: &Mesh1D, degree: usize) -> Self {
        Self {
            mesh: mesh.clone(),
            degree,
            coeffs: vec![0.0; mesh.n_elements() * (degree + 1)],
        }
    }

    pub fn from_coeffs(mesh: &Mesh1D, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = mesh.n_elements() * (degree + 1);
        if coeffs.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            mesh: mesh.clone(),
            degree,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn n_modes(&self) -> usize {
        self.degree + 1
    }

    pub fn element_coeffs(&self, i: usize) -> &[f64] {
        let m = self.n_modes();
        &self.coeffs[i * m..(i + 1) * m]
    }

    pub fn element_coeffs_mut(&mut self, i: usize) -> &mut [f64] {
        let m = self.n_modes();
        &mut self.coeffs[i * m..(i + 1) * m]
    }

    /// Value and derivative on element `elem` at `x` (which should lie in it).
    pub fn eval_in(&self, elem: usize, x: f64) -> (f64, f64) {
        let (a, b) = self.mesh.element(elem);
        let h = b - a;
        let xi = (2.0 * x - a - b) / h;
        let m = self.n_modes();
        let mut p = [0.0; 32];
        let mut d = [0.0; 32];
        let (mut value, mut deriv) = (0.0, 0.0);
        if m <= 32 {
            legendre::tabulate(xi, &mut p[..m], &mut d[..m]);
            for (j, c) in self.element_coeffs(elem).iter().enumerate() {
                let s = c * legendre::normalization(j, h);
                value += s * p[j];
                deriv += s * d[j];
            }
        } else {
            for (j, c) in self.element_coeffs(elem).iter().enumerate() {
                let (pj, dj) = legendre::value_and_derivative(j, xi);
                let s = c * legendre::normalization(j, h);
                value += s * pj;
                deriv += s * dj;
            }
        }
        (value, deriv * 2.0 / h)
    }

    /// One-sided value at `x`; away from vertices both sides agree.
    pub fn eval(&self, x: f64, side: Side) -> Result<f64> {
        let elem = self.mesh.locate(x, side)?;
        Ok(self.eval_in(elem, x).0)
    }

    /// Traces on element `elem`: `(value at left end, value at right end)`.
    pub fn element_traces(&self, elem: usize) -> (f64, f64) {
        let h = self.mesh.h(elem);
        let mut left = 0.0;
        let mut right = 0.0;
        for (j, c) in self.element_coeffs(elem).iter().enumerate() {
            let s = c * legendre::normalization(j, h);
            right += s;
            left += if j % 2 == 0 { s } else { -s };
        }
        (left, right)
    }

    /// Jumps `u(x_a^+) - u(x_a^-)` at the interior vertices, in vertex order.
    pub fn interior_jumps(&self) -> Vec<f64> {
        (1..self.mesh.n_elements())
            .map(|a| self.element_traces(a).0 - self.element_traces(a - 1).1)
            .collect()
    }

    pub fn norm_l2(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    pub fn norm_l2_element(&self, i: usize) -> f64 {
        libm::sqrt(self.element_coeffs(i).iter().map(|c| c * c).sum())
    }

    /// Elementwise exact derivative, of degree `degree - 1` (zero of degree 0
    /// when the input is piecewise constant).
    pub fn derivative(&self) -> BrokenPoly {
        if self.degree == 0 {
            return BrokenPoly::zeros(&self.mesh, 0);
        }
        let m = self.n_modes();
        let mut out = BrokenPoly::zeros(&self.mesh, self.degree - 1);
        let mut raw = vec![0.0; m];
        let mut draw = vec![0.0; m - 1];
        for e in 0..self.mesh.n_elements() {
            let h = self.mesh.h(e);
            for (j, c) in self.element_coeffs(e).iter().enumerate() {
                raw[j] = c * legendre::normalization(j, h);
            }
            legendre::differentiate_reference(&raw, &mut draw);
            for (i, d) in out.element_coeffs_mut(e).iter_mut().enumerate() {
                *d = draw[i] * 2.0 / h / legendre::normalization(i, h);
            }
        }
        out
    }

    /// The same function represented with degree `degree` (must not drop
    /// nonzero modes).
    pub fn with_degree(&self, degree: usize) -> BrokenPoly {
        let mut out = BrokenPoly::zeros(&self.mesh, degree);
        let keep = self.n_modes().min(degree + 1);
        for e in 0..self.mesh.n_elements() {
            out.element_coeffs_mut(e)[..keep].copy_from_slice(&self.element_coeffs(e)[..keep]);
        }
        out
    }

    /// `self - other` on a common mesh, at the larger of the two degrees.
    pub fn sub(&self, other: &BrokenPoly) -> Result<BrokenPoly> {
        if self.mesh != other.mesh {
            return Err(Error::invalid("broken polynomials live on different meshes"));
        }
        let degree = self.degree.max(other.degree);
        let mut out = self.with_degree(degree);
        let o = other.with_degree(degree);
        for (a, b) in out.coeffs.iter_mut().zip(&o.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> BrokenPoly {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Largest jump across interior vertices.
    pub fn max_jump(&self) -> f64 {
        self.interior_jumps().iter().fold(0.0, |m, j| m.max(j.abs()))
    }
}

/// `L2` projection of `f(elem, x)` onto degree-`k` broken polynomials using a
/// `q`-point Gauss rule per element.
pub fn project_l2_with<F>(mesh: &Mesh1D, k: usize, rule: &QuadRule, mut f: F) -> BrokenPoly
where
    F: FnMut(usize, f64) -> f64,
{
    let mut out = BrokenPoly::zeros(mesh, k);
    let mut p = vec![0.0; k + 1];
    let mut d = vec![0.0; k + 1];
    for e in 0..mesh.n_elements() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        let c = out.element_coeffs_mut(e);
        for (&xi, &w) in rule.nodes().iter().zip(rule.weights()) {
            let x = 0.5 * (a + b) + 0.5 * h * xi;
            let fx = f(e, x) * w * 0.5 * h;
            legendre::tabulate(xi, &mut p, &mut d);
            for j in 0..=k {
                c[j] += fx * p[j] * legendre::normalization(j, h);
            }
        }
    }
    out
}

/// `L2` projection of `f` onto degree-`k` broken polynomials with `q`
/// quadrature points per element.
pub fn project_l2<F: FnMut(f64) -> f64>(mesh: &Mesh1D, k: usize, q: usize, mut f: F) -> Result<BrokenPoly> {
    let rule = gauss_rule(q)?;
    Ok(project_l2_with(mesh, k, &rule, |_, x| f(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(n: usize) -> Mesh1D {
        Mesh1D::uniform(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = Mesh1D::graded(0.0, 1.0, 5, 1.4).unwrap();
        let p = project_l2(&mesh, 1, 4, |x| x).unwrap();
        for &x in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_relative_eq!(p.eval(x, Side::Left).unwrap(), x, epsilon = 1e-14);
            assert_relative_eq!(p.eval(x, Side::Right).unwrap(), x, epsilon = 1e-14);
        }
        let mean = project_l2(&unit(1), 0, 3, |x| x * x).unwrap();
        assert_relative_eq!(mean.eval(0.4, Side::Left).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn broken_constant_traces() {
        let mesh = unit(2);
        // φ_0 = sqrt(1/h) on each element, h = 1/2
        let c = libm::sqrt(0.5);
        let p = BrokenPoly::from_coeffs(&mesh, 0, vec![0.0, c]).unwrap();
        assert_relative_eq!(p.eval(0.5, Side::Left).unwrap(), 0.0);
        assert_relative_eq!(p.eval(0.5, Side::Right).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.interior_jumps()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn continuous_both_sides_agree() {
        let mesh = unit(3);
        let p = project_l2(&mesh, 2, 3, |x| 1.0 + x - x * x).unwrap();
        for a in 1..3 {
            let x = mesh.vertices()[a];
            assert_relative_eq!(
                p.eval(x, Side::Left).unwrap(),
                p.eval(x, Side::Right).unwrap(),
                epsilon = 1e-14
            );
        }
        assert!(p.eval(-0.1, Side::Left).is_err());
    }

    #[test]
    fn degree_one_value_from_basis_expansion() {
        // element [0, 1]: c0 φ0 + c1 φ1 = c0 + c1 sqrt(3) (2x - 1)
        let p = BrokenPoly::from_coeffs(&unit(1), 1, vec![2.0, 0.5]).unwrap();
        let x = 0.8;
        let expect = 2.0 + 0.5 * libm::sqrt(3.0) * (2.0 * x - 1.0);
        assert_relative_eq!(p.eval(x, Side::Left).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn norms() {
        let mesh = unit(3);
        assert_eq!(BrokenPoly::zeros(&mesh, 2).norm_l2(), 0.0);
        let one = project_l2(&unit(1), 0, 1, |_| 1.0).unwrap();
        assert_relative_eq!(one.norm_l2(), 1.0, epsilon = 1e-15);
        let p = BrokenPoly::from_coeffs(&unit(1), 1, vec![3.0, 4.0]).unwrap();
        assert_relative_eq!(p.norm_l2(), 5.0);
        // coefficient norm against quadrature of p^2
        let mesh = Mesh1D::graded(-1.0, 2.0, 4, 1.5).unwrap();
        let p = project_l2(&mesh, 3, 5, |x| libm::sin(3.0 * x)).unwrap();
        let rule = gauss_rule(6).unwrap();
        let quad: f64 = (0..4)
            .map(|e| {
                let (a, b) = mesh.element(e);
                rule.integrate(a, b, |x| p.eval_in(e, x).0.powi(2))
            })
            .sum();
        assert_relative_eq!(p.norm_l2(), libm::sqrt(quad), max_relative = 1e-12);
        assert_relative_eq!(p.norm_l2_element(2), {
            let (a, b) = mesh.element(2);
            libm::sqrt(rule.integrate(a, b, |x| p.eval_in(2, x).0.powi(2)))
        }, max_relative = 1e-12);
    }

    #[test]
    fn derivatives() {
        let d = project_l2(&unit(1), 1, 2, |x| x).unwrap().derivative();
        assert_eq!(d.degree(), 0);
        assert_relative_eq!(d.eval(0.3, Side::Left).unwrap(), 1.0, epsilon = 1e-14);
        let d = project_l2(&unit(2), 2, 3, |x| x * x).unwrap().derivative();
        for &x in &[0.1, 0.4, 0.9] {
            assert_relative_eq!(d.eval(x, Side::Left).unwrap(), 2.0 * x, epsilon = 1e-13);
        }
        assert_eq!(BrokenPoly::zeros(&unit(2), 0).derivative().norm_l2(), 0.0);
    }

    #[test]
    fn idempotent_projection() {
        let mesh = unit(4);
        let p = project_l2(&mesh, 2, 15, libm::atan).unwrap();
        let pp = project_l2_with(&mesh, 2, &gauss_rule(15).unwrap(), |e, x| p.eval_in(e, x).0);
        for (a, b) in p.coeffs().iter().zip(pp.coeffs()) {
            assert!((a - b).abs() <= 1e-13);
        }
    }
}
