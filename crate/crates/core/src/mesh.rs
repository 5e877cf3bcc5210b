//! One-dimensional meshes, vertex patches and hat functions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A partition `x_0 < x_1 < ... < x_n` of an interval into `n` elements
/// `K_i = [x_i, x_{i+1}]` (zero-based element indices).
///
/// Cloning is cheap: the vertex array is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    vertices: Arc<[f64]>,
    shape_ratio: f64,
}

/// Role of a mesh vertex with respect to the flow direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexClass {
    Interior,
    Inflow,
    Outflow,
}

/// The elements sharing vertex `vertex`.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub vertex: usize,
    pub class: VertexClass,
    /// Element indices in increasing order (one or two of them).
    pub elements: Vec<usize>,
    /// Diameter of the patch subdomain.
    pub diameter: f64,
}

impl Patch {
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }

    /// Element on the upstream side of the anchor vertex, if any.
    pub fn upwind_element(&self, velocity: f64) -> Option<usize> {
        let (left, right) = self.split();
        if velocity > 0.0 {
            left
        } else {
            right
        }
    }

    /// Element on the downstream side of the anchor vertex, if any.
    pub fn downwind_element(&self, velocity: f64) -> Option<usize> {
        let (left, right) = self.split();
        if velocity > 0.0 {
            right
        } else {
            left
        }
    }

    /// `(element left of the vertex, element right of the vertex)`.
    pub fn split(&self) -> (Option<usize>, Option<usize>) {
        let left = self.elements.iter().copied().find(|&e| e + 1 == self.vertex);
        let right = self.elements.iter().copied().find(|&e| e == self.vertex);
        (left, right)
    }
}

/// Piecewise affine function equal to one at a vertex and zero at all others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatFunction {
    pub vertex: usize,
    center: f64,
    left: Option<f64>,
    right: Option<f64>,
}

impl HatFunction {
    pub fn eval(&self, x: f64) -> f64 {
        if x == self.center {
            return 1.0;
        }
        if x < self.center {
            match self.left {
                Some(l) if x >= l => (x - l) / (self.center - l),
                _ => 0.0,
            }
        } else {
            match self.right {
                Some(r) if x <= r => (r - x) / (r - self.center),
                _ => 0.0,
            }
        }
    }

    /// Slope on the element left (`Side::Left`) or right of `x`.
    pub fn slope(&self, x: f64, side: crate::poly::Side) -> f64 {
        use crate::poly::Side;
        let on_left = match side {
            Side::Left => x <= self.center,
            Side::Right => x < self.center,
        };
        if on_left {
            match self.left {
                Some(l) if x > l || (x == l && side == Side::Right) => 1.0 / (self.center - l),
                _ => 0.0,
            }
        } else {
            match self.right {
                Some(r) if x < r || (x == r && side == Side::Left) => -1.0 / (r - self.center),
                _ => 0.0,
            }
        }
    }

    /// `max |ψ'|` over the support.
    pub fn max_slope(&self) -> f64 {
        let l = self.left.map_or(0.0, |l| 1.0 / (self.center - l));
        let r = self.right.map_or(0.0, |r| 1.0 / (r - self.center));
        l.max(r)
    }
}

impl Mesh1D {
    /// Builds a mesh from strictly increasing vertex coordinates.
    pub fn from_vertices(vertices: Vec<f64>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::invalid("a mesh needs at least two vertices"));
        }
        if vertices.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("vertex coordinates must be finite"));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "vertices must be strictly increasing (x_{} = {} >= x_{} = {})",
                i,
                vertices[i],
                i + 1,
                vertices[i + 1]
            )));
        }
        let h: Vec<f64> = vertices.windows(2).map(|w| w[1] - w[0]).collect();
        let shape_ratio = h
            .windows(2)
            .map(|p| (p[1] / p[0]).max(p[0] / p[1]))
            .fold(1.0, f64::max);
        Ok(Self {
            vertices: vertices.into(),
            shape_ratio,
        })
    }

    /// `n` equal elements on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::graded(a, b, n, 1.0)
    }

    /// `n` elements on `[a, b]` whose sizes grow geometrically by `ratio`.
    pub fn graded(a: f64, b: f64, n: usize, ratio: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("element count must be at least 1"));
        }
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::invalid(format!("degenerate interval ({a}, {b})")));
        }
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(Error::invalid(format!(
                "grading factor must be positive, got {ratio}"
            )));
        }
        let len = b - a;
        let mut vertices = Vec::with_capacity(n + 1);
        vertices.push(a);
        if ratio == 1.0 {
            for i in 1..n {
                vertices.push(a + len * i as f64 / n as f64);
            }
        } else {
            // h_1 (1 + r + ... + r^{n-1}) = len
            let total: f64 = (0..n).map(|i| libm::pow(ratio, i as f64)).sum();
            let mut h = len / total;
            let mut x = a;
            for _ in 1..n {
                x += h;
                vertices.push(x);
                h *= ratio;
            }
        }
        vertices.push(b);
        let mut mesh = Self::from_vertices(vertices)?;
        if ratio != 1.0 && n > 1 {
            mesh.shape_ratio = ratio.max(1.0 / ratio);
        }
        Ok(mesh)
    }

    pub fn n_elements(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn start(&self) -> f64 {
        self.vertices[0]
    }

    pub fn end(&self) -> f64 {
        self.vertices[self.vertices.len() - 1]
    }

    /// Endpoints of element `i`.
    pub fn element(&self, i: usize) -> (f64, f64) {
        (self.vertices[i], self.vertices[i + 1])
    }

    pub fn h(&self, i: usize) -> f64 {
        self.vertices[i + 1] - self.vertices[i]
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_elements()).map(|i| self.h(i)).fold(0.0, f64::max)
    }

    /// Largest ratio of the sizes of two neighboring elements.
    pub fn shape_ratio(&self) -> f64 {
        self.shape_ratio
    }

    /// Element containing `x`; at a vertex, `side` picks the element to its
    /// left or right (clamped at the domain ends).
    pub fn locate(&self, x: f64, side: crate::poly::Side) -> Result<usize> {
        use crate::poly::Side;
        if !(x >= self.start() && x <= self.end()) {
            return Err(Error::invalid(format!(
                "x = {x} outside [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let n = self.n_elements();
        // number of vertices <= x (or < x for left-sided lookups)
        let idx = match side {
            Side::Right => self.vertices.partition_point(|&v| v <= x),
            Side::Left => self.vertices.partition_point(|&v| v < x),
        };
        Ok(idx.saturating_sub(1).min(n - 1))
    }

    /// Index of the vertex located exactly at `x`.
    pub fn vertex_index(&self, x: f64) -> Result<usize> {
        let tol = 1e-14 * (self.end() - self.start());
        self.vertices
            .iter()
            .position(|&v| (v - x).abs() <= tol)
            .ok_or_else(|| Error::invalid(format!("{x} is not a mesh vertex")))
    }

    /// Each element split into `m` equal sub-elements.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("refinement factor must be at least 1"));
        }
        let mut v = Vec::with_capacity(self.n_elements() * m + 1);
        for i in 0..self.n_elements() {
            let (a, b) = self.element(i);
            for s in 0..m {
                v.push(a + (b - a) * s as f64 / m as f64);
            }
        }
        v.push(self.end());
        Self::from_vertices(v)
    }

    pub fn inflow_vertex(&self, velocity: f64) -> usize {
        if velocity > 0.0 {
            0
        } else {
            self.n_elements()
        }
    }

    pub fn outflow_vertex(&self, velocity: f64) -> usize {
        if velocity > 0.0 {
            self.n_elements()
        } else {
            0
        }
    }

    pub fn vertex_class(&self, vertex: usize, velocity: f64) -> VertexClass {
        if vertex == self.inflow_vertex(velocity) {
            VertexClass::Inflow
        } else if vertex == self.outflow_vertex(velocity) {
            VertexClass::Outflow
        } else {
            VertexClass::Interior
        }
    }

    pub fn hat(&self, vertex: usize) -> Result<HatFunction> {
        if vertex >= self.n_vertices() {
            return Err(Error::invalid(format!(
                "vertex {vertex} out of range (mesh has {} vertices)",
                self.n_vertices()
            )));
        }
        Ok(HatFunction {
            vertex,
            center: self.vertices[vertex],
            left: vertex.checked_sub(1).map(|i| self.vertices[i]),
            right: self.vertices.get(vertex + 1).copied(),
        })
    }

    /// The patch around `vertex` for flow with the given velocity sign.
    pub fn patch(&self, vertex: usize, velocity: f64) -> Result<Patch> {
        check_velocity(velocity)?;
        if vertex >= self.n_vertices() {
            return Err(Error::invalid(format!("vertex {vertex} out of range")));
        }
        let mut elements = Vec::with_capacity(2);
        if vertex > 0 {
            elements.push(vertex - 1);
        }
        if vertex < self.n_elements() {
            elements.push(vertex);
        }
        let lo = self.vertices[vertex.saturating_sub(1)];
        let hi = self.vertices[(vertex + 1).min(self.n_elements())];
        Ok(Patch {
            vertex,
            class: self.vertex_class(vertex, velocity),
            elements,
            diameter: hi - lo,
        })
    }

    /// One patch per vertex, in vertex order.
    pub fn patches(&self, velocity: f64) -> Result<Vec<Patch>> {
        (0..self.n_vertices())
            .map(|a| self.patch(a, velocity))
            .collect()
    }

    /// `max_a (1 + h_{ω_a} ‖ψ_a'‖_∞)`, the cut-off constant with unit
    /// Poincaré–Friedrichs constant.
    pub fn cont_pf_constant(&self) -> f64 {
        (0..self.n_vertices())
            .map(|a| self.patch_cutoff_factor(a))
            .fold(0.0, f64::max)
    }

    /// `1 + h_{ω_a} ‖ψ_a'‖_∞` for a single vertex.
    pub fn patch_cutoff_factor(&self, vertex: usize) -> f64 {
        let hat = self.hat(vertex).expect("vertex in range");
        let lo = self.vertices[vertex.saturating_sub(1)];
        let hi = self.vertices[(vertex + 1).min(self.n_elements())];
        1.0 + (hi - lo) * hat.max_slope()
    }
}

pub(crate) fn check_velocity(velocity: f64) -> Result<()> {
    if velocity == 0.0 || !velocity.is_finite() {
        return Err(Error::invalid(format!(
            "velocity must be finite and nonzero, got {velocity}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Side;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_vertices() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.vertices(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.shape_ratio(), 1.0);
        let m = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
        assert_eq!(m.n_elements(), 1);
        let m = Mesh1D::uniform(0.0, 2.0, 4).unwrap();
        for i in 0..4 {
            assert_relative_eq!(m.h(i), 0.5);
        }
    }

    #[test]
    fn invalid_constructions() {
        assert!(matches!(
            Mesh1D::uniform(0.0, 1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Mesh1D::uniform(1.0, 1.0, 3).is_err());
        assert!(Mesh1D::graded(0.0, 1.0, 3, 0.0).is_err());
        assert!(Mesh1D::graded(0.0, 1.0, 3, -2.0).is_err());
        assert!(Mesh1D::from_vertices(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    }

    #[test]
    fn graded_sizes() {
        let m = Mesh1D::graded(0.0, 1.0, 2, 1.0).unwrap();
        assert_eq!(m.vertices(), Mesh1D::uniform(0.0, 1.0, 2).unwrap().vertices());
        let m = Mesh1D::graded(0.0, 1.0, 2, 2.0).unwrap();
        assert_relative_eq!(m.h(0), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.h(1), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(m.shape_ratio(), 2.0);
        // geometric series 1 + 2 + 4 = 7
        let m = Mesh1D::graded(0.0, 1.0, 3, 2.0).unwrap();
        for (i, expect) in [1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0].iter().enumerate() {
            assert_relative_eq!(m.h(i), *expect, epsilon = 1e-15);
        }
        let m = Mesh1D::graded(0.0, 1.0, 5, 0.5).unwrap();
        assert_eq!(m.shape_ratio(), 2.0);
        for i in 0..4 {
            assert_relative_eq!(m.h(i + 1) / m.h(i), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn hat_values() {
        let m = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        let a = m.vertex_index(0.5).unwrap();
        assert_eq!(m.hat(a).unwrap().eval(0.25), 0.5);
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.hat(0).unwrap().eval(0.125), 0.5);
        assert!(m.vertex_index(0.3).is_err());
        assert!(m.hat(5).is_err());
    }

    #[test]
    fn partition_of_unity() {
        let m = Mesh1D::graded(-1.0, 2.0, 7, 1.3).unwrap();
        for t in 0..10 {
            let x = -1.0 + 3.0 * (t as f64 + 0.37) / 10.0;
            let s: f64 = (0..m.n_vertices()).map(|a| m.hat(a).unwrap().eval(x)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hat_slopes() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let hat = m.hat(2).unwrap();
        assert_eq!(hat.slope(0.4, Side::Left), 4.0);
        assert_eq!(hat.slope(0.5, Side::Left), 4.0);
        assert_eq!(hat.slope(0.5, Side::Right), -4.0);
        assert_eq!(hat.slope(0.9, Side::Right), 0.0);
    }

    #[test]
    fn patch_classification() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        let p = m.patches(1.0).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p[0].class, VertexClass::Inflow);
        assert_eq!(p[4].class, VertexClass::Outflow);
        assert!(p[1..4].iter().all(|p| p.class == VertexClass::Interior));
        assert_eq!(p[2].elements, vec![1, 2]);
        assert_relative_eq!(p[2].diameter, 0.5);
        let q = m.patches(-3.0).unwrap();
        assert_eq!(q[0].class, VertexClass::Outflow);
        assert_eq!(q[4].class, VertexClass::Inflow);
        assert!(m.patches(0.0).is_err());

        let single = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
        let p = single.patches(1.0).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(Patch::is_boundary));
    }

    #[test]
    fn every_element_in_two_patches() {
        let m = Mesh1D::graded(0.0, 1.0, 6, 1.7).unwrap();
        let patches = m.patches(1.0).unwrap();
        for e in 0..m.n_elements() {
            let count = patches.iter().filter(|p| p.elements.contains(&e)).count();
            assert_eq!(count, 2);
        }
    }

    #[test]
    fn upwind_downwind() {
        let m = Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        let p = m.patch(1, 1.0).unwrap();
        assert_eq!(p.upwind_element(1.0), Some(0));
        assert_eq!(p.downwind_element(1.0), Some(1));
        assert_eq!(p.upwind_element(-1.0), Some(1));
    }

    #[test]
    fn cutoff_constant_uniform() {
        let m = Mesh1D::uniform(0.0, 1.0, 8).unwrap();
        assert_relative_eq!(m.patch_cutoff_factor(3), 3.0, epsilon = 1e-12);
        assert_relative_eq!(m.patch_cutoff_factor(0), 2.0, epsilon = 1e-12);
        assert_relative_eq!(m.cont_pf_constant(), 3.0, epsilon = 1e-12);
        let single = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(single.cont_pf_constant(), 2.0);
    }

    #[test]
    fn locate_sides() {
        let m = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.locate(0.5, Side::Left).unwrap(), 1);
        assert_eq!(m.locate(0.5, Side::Right).unwrap(), 2);
        assert_eq!(m.locate(0.0, Side::Left).unwrap(), 0);
        assert_eq!(m.locate(1.0, Side::Right).unwrap(), 3);
        assert_eq!(m.locate(0.3, Side::Left).unwrap(), 1);
        assert!(m.locate(1.5, Side::Left).is_err());
    }

    #[test]
    fn refine_nests() {
        let m = Mesh1D::graded(0.0, 1.0, 3, 2.0).unwrap();
        let r = m.refine(4).unwrap();
        assert_eq!(r.n_elements(), 12);
        for (i, v) in m.vertices().iter().enumerate() {
            assert_eq!(r.vertices()[4 * i], *v);
        }
    }
}
