//! Continuous hierarchical spaces (hats plus integrated-Legendre bubbles) on a
//! run of consecutive intervals, and their conversion to modal coefficients.

use alloc::vec;
use alloc::vec::Vec;

use crate::legendre;
use crate::linalg::Dof;
use crate::mesh::Mesh1D;
use crate::poly::BrokenPoly;
use crate::quadrature::QuadRule;

/// Local shape functions on `[-1, 1]`: index 0 is `(1 - ξ)/2`, index 1 is
/// `(1 + ξ)/2`, index `j ≥ 2` is the bubble `(P_j - P_{j-2}) / sqrt(2(2j - 1))`
/// whose derivative `sqrt((2j - 1)/2) P_{j-1}` is orthonormal on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct ShapeTable {
    /// `values[node][local]`
    pub values: Vec<Vec<f64>>,
    /// `d/dξ`, same layout.
    pub derivs: Vec<Vec<f64>>,
}

#[inline]
pub(crate) fn bubble_scale(j: usize) -> f64 {
    1.0 / libm::sqrt((2 * (2 * j - 1)) as f64)
}

impl ShapeTable {
    pub fn new(degree: usize, rule: &QuadRule) -> Self {
        let n = degree + 1;
        let mut p = vec![0.0; n.max(2)];
        let mut d = vec![0.0; n.max(2)];
        let mut values = Vec::with_capacity(rule.len());
        let mut derivs = Vec::with_capacity(rule.len());
        for &xi in rule.nodes() {
            legendre::tabulate(xi, &mut p, &mut d);
            let (v, dv) = shapes_from(degree, xi, &p, &d);
            values.push(v);
            derivs.push(dv);
        }
        Self { values, derivs }
    }
}

fn shapes_from(degree: usize, xi: f64, p: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut v = Vec::with_capacity(degree + 1);
    let mut dv = Vec::with_capacity(degree + 1);
    v.push(0.5 * (1.0 - xi));
    dv.push(-0.5);
    v.push(0.5 * (1.0 + xi));
    dv.push(0.5);
    for j in 2..=degree {
        let s = bubble_scale(j);
        v.push(s * (p[j] - p[j - 2]));
        dv.push(s * (d[j] - d[j - 2]));
    }
    (v, dv)
}

/// `H¹`-conforming piecewise polynomials of degree `degree ≥ 1` on the
/// intervals between consecutive entries of `xs`, optionally vanishing at
/// either end.
#[derive(Debug, Clone)]
pub(crate) struct ContinuousSpace {
    mesh: Mesh1D,
    degree: usize,
    vertex_dof: Vec<Option<usize>>,
    bubble_start: Vec<usize>,
    n_dofs: usize,
}

impl ContinuousSpace {
    pub fn new(mesh: &Mesh1D, degree: usize, zero_left: bool, zero_right: bool) -> Self {
        assert!(degree >= 1, "continuous spaces need degree >= 1");
        let n = mesh.n_elements();
        let mut vertex_dof = vec![None; n + 1];
        let mut bubble_start = vec![0; n];
        let mut next = 0;
        // interleaved ordering keeps the assembled matrices banded
        for v in 0..=n {
            let constrained = (v == 0 && zero_left) || (v == n && zero_right);
            if !constrained {
                vertex_dof[v] = Some(next);
                next += 1;
            }
            if v < n {
                bubble_start[v] = next;
                next += degree - 1;
            }
        }
        Self {
            mesh: mesh.clone(),
            degree,
            vertex_dof,
            bubble_start,
            n_dofs: next,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Global index of local shape `local` on element `e` (`None` when the
    /// shape is removed by a boundary constraint).
    pub fn global(&self, e: usize, local: usize) -> Option<usize> {
        match local {
            0 => self.vertex_dof[e],
            1 => self.vertex_dof[e + 1],
            j => Some(self.bubble_start[e] + j - 2),
        }
    }

    pub fn dofs(&self) -> Vec<Dof> {
        let mut out = vec![Dof::Vertex(0); self.n_dofs];
        for (v, d) in self.vertex_dof.iter().enumerate() {
            if let Some(d) = d {
                out[*d] = Dof::Vertex(v);
            }
        }
        for (e, &s) in self.bubble_start.iter().enumerate() {
            for j in 2..=self.degree {
                out[s + j - 2] = Dof::Bubble { element: e, degree: j };
            }
        }
        out
    }

    /// Modal representation of `Σ_i coeffs[i] N_i`.
    pub fn to_broken(&self, coeffs: &[f64]) -> BrokenPoly {
        let p = self.degree;
        let mut out = BrokenPoly::zeros(&self.mesh, p);
        let mut raw = vec![0.0; p + 1];
        for e in 0..self.mesh.n_elements() {
            raw.iter_mut().for_each(|r| *r = 0.0);
            let val = |local: usize| self.global(e, local).map_or(0.0, |g| coeffs[g]);
            let (cl, cr) = (val(0), val(1));
            raw[0] += 0.5 * (cl + cr);
            raw[1] += 0.5 * (cr - cl);
            for j in 2..=p {
                let c = val(j) * bubble_scale(j);
                raw[j] += c;
                raw[j - 2] -= c;
            }
            let h = self.mesh.h(e);
            for (j, c) in out.element_coeffs_mut(e).iter_mut().enumerate() {
                *c = raw[j] / legendre::normalization(j, h);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Side;
    use crate::quadrature::gauss_rule;
    use approx::assert_relative_eq;

    #[test]
    fn dof_counts() {
        let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(ContinuousSpace::new(&mesh, 3, false, false).n_dofs(), 13);
        assert_eq!(ContinuousSpace::new(&mesh, 3, true, false).n_dofs(), 12);
        assert_eq!(ContinuousSpace::new(&mesh, 3, true, true).n_dofs(), 11);
    }

    #[test]
    fn modal_conversion_matches_nodal_evaluation() {
        let mesh = Mesh1D::graded(0.0, 2.0, 3, 1.5).unwrap();
        let space = ContinuousSpace::new(&mesh, 3, false, true);
        let coeffs: Vec<f64> = (0..space.n_dofs()).map(|i| 0.3 * i as f64 - 1.0).collect();
        let poly = space.to_broken(&coeffs);
        let rule = gauss_rule(4).unwrap();
        let table = ShapeTable::new(3, &rule);
        for e in 0..3 {
            let (a, b) = mesh.element(e);
            for (k, &xi) in rule.nodes().iter().enumerate() {
                let x = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let direct: f64 = (0..=3)
                    .filter_map(|l| space.global(e, l).map(|g| coeffs[g] * table.values[k][l]))
                    .sum();
                assert_relative_eq!(poly.eval_in(e, x).0, direct, epsilon = 1e-13);
            }
        }
        assert!(poly.max_jump() < 1e-13);
        assert!(poly.eval(2.0, Side::Left).unwrap().abs() < 1e-13);
    }
}
