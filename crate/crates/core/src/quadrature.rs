//! Gauss–Legendre rules on the reference interval `[-1, 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::legendre;

/// Largest supported number of points.
pub const MAX_POINTS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.len() - 1
    }

    /// `(x, w)` pairs mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// The `q`-point Gauss–Legendre rule, exact for polynomials of degree `2q - 1`.
pub fn gauss_rule(q: usize) -> Result<QuadRule> {
    if q == 0 || q > MAX_POINTS {
        return Err(Error::invalid(format!(
            "quadrature point count must lie in 1..={MAX_POINTS}, got {q}"
        )));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let pi = core::f64::consts::PI;
    for i in 0..q / 2 {
        // Newton iteration on P_q from the Chebyshev-like initial guess
        let mut x = libm::cos(pi * (i as f64 + 0.75) / (q as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre::value_and_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre::value_and_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        let (_, d) = legendre::value_and_derivative(q, 0.0);
        nodes[q / 2] = 0.0;
        weights[q / 2] = 2.0 / (d * d);
    }
    Ok(QuadRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_and_two_point() {
        let r = gauss_rule(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);
        let r = gauss_rule(2).unwrap();
        let s = 1.0 / libm::sqrt(3.0);
        assert_relative_eq!(r.nodes()[0], -s, epsilon = 1e-15);
        assert_relative_eq!(r.nodes()[1], s, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn x8_with_five_points() {
        let r = gauss_rule(5).unwrap();
        assert_relative_eq!(r.integrate(-1.0, 1.0, |x| x.powi(8)), 2.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn out_of_range() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(31).is_err());
    }

    #[test]
    fn structure_and_exactness_all_orders() {
        for q in 1..=MAX_POINTS {
            let r = gauss_rule(q).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert_relative_eq!(sum, 2.0, epsilon = 1e-13);
            assert!(r.weights().iter().all(|&w| w > 0.0));
            for i in 0..q {
                assert_relative_eq!(r.nodes()[i], -r.nodes()[q - 1 - i], epsilon = 1e-15);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            // monomials x^d on [0, 1] against 1 / (d + 1)
            for d in 0..=r.exactness() {
                let got = r.integrate(0.0, 1.0, |x| x.powi(d as i32));
                let exact = 1.0 / (d as f64 + 1.0);
                assert!(
                    (got - exact).abs() <= 1e-13 * exact.max(1e-3),
                    "q = {q}, degree {d}: {got} vs {exact}"
                );
            }
        }
    }
}
