//! Dense square systems and partial-pivot LU.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Label of an unknown in an assembled system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    /// Legendre mode `mode` on element `element`.
    Mode { element: usize, mode: usize },
    /// Nodal value at a mesh vertex.
    Vertex(usize),
    /// Interior bubble of polynomial degree `degree` on `element`.
    Bubble { element: usize, degree: usize },
}

/// A square system `A x = b` together with the meaning of each unknown.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
    pub dofs: Vec<Dof>,
}

impl LinearSystem {
    pub fn new(matrix: DenseMatrix, rhs: Vec<f64>, dofs: Vec<Dof>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != rhs.len() || rhs.len() != dofs.len() {
            return Err(Error::invalid(format!(
                "inconsistent system: {}x{} matrix, {} right-hand side entries, {} unknowns",
                matrix.rows(),
                matrix.cols(),
                rhs.len(),
                dofs.len()
            )));
        }
        Ok(Self { matrix, rhs, dofs })
    }

    /// Solves and verifies `‖Ax - b‖ ≤ 1e-10 (‖A‖‖x‖ + ‖b‖)`.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let x = lu_solve(self.matrix.clone(), self.rhs.clone())?;
        let r = self.residual_norm(&x);
        let bound = 1e-10 * (self.matrix.norm_inf() * norm_inf(&x) + norm_inf(&self.rhs));
        if r.is_nan() || bound.is_nan() || r > bound {
            return Err(Error::SolverFailure(format!(
                "residual {r:e} exceeds bound {bound:e}"
            )));
        }
        Ok(x)
    }

    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        norm_inf(&ax.iter().zip(&self.rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gaussian elimination with partial pivoting.
///
/// Zero multipliers and zero pivot-row entries are skipped, so banded
/// finite element matrices factor in `O(n^2 b)` instead of `O(n^3)`.
pub fn lu_solve(mut a: DenseMatrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::invalid("lu_solve needs a square system"));
    }
    let scale = a.data.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    if n > 0 && scale == 0.0 {
        return Err(Error::SolverFailure("zero matrix".into()));
    }
    let mut nz: Vec<usize> = Vec::with_capacity(n);
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a.get(i, k).abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= 1e-14 * scale {
            return Err(Error::SolverFailure(format!(
                "singular matrix (pivot {pivot:e} in column {k})"
            )));
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let akk = a.get(k, k);
        nz.clear();
        nz.extend((k + 1..n).filter(|&j| a.get(k, j) != 0.0));
        for i in k + 1..n {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            let l = aik / akk;
            a.set(i, k, 0.0);
            for &j in &nz {
                let v = a.get(k, j);
                a.add(i, j, -l * v);
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a.get(k, j) * x[j]).sum();
        x[k] = (b[k] - s) / a.get(k, k);
    }
    Ok(x)
}
