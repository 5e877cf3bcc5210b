//! Legendre polynomials and the `L2(K)`-orthonormal modal basis.
//!
//! On an element `K` of length `h` the `j`-th basis function is
//! `φ_j(x) = sqrt((2j + 1) / h) P_j(ξ)`, where `ξ ∈ [-1, 1]` is the affine
//! reference coordinate. These functions are orthonormal in `L2(K)`, so the
//! `L2` norm of a broken polynomial is the Euclidean norm of its coefficients.

/// `P_n(x)` and `P_n'(x)`.
pub fn value_and_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        let d2 = d0 + (2.0 * jf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Fills `values[j] = P_j(x)` and `derivs[j] = P_j'(x)` for `j < values.len()`.
pub fn tabulate(x: f64, values: &mut [f64], derivs: &mut [f64]) {
    let n = values.len();
    debug_assert_eq!(n, derivs.len());
    if n == 0 {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if n == 1 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for j in 1..n - 1 {
        let jf = j as f64;
        values[j + 1] = ((2.0 * jf + 1.0) * x * values[j] - jf * values[j - 1]) / (jf + 1.0);
        derivs[j + 1] = derivs[j - 1] + (2.0 * jf + 1.0) * values[j];
    }
}

/// Scale turning `P_j(ξ)` into the orthonormal `φ_j` on an element of length `h`.
#[inline]
pub fn normalization(j: usize, h: f64) -> f64 {
    libm::sqrt((2 * j + 1) as f64 / h)
}

/// Coefficients of `d/dξ Σ a_j P_j` in the Legendre basis (length `a.len() - 1`).
pub fn differentiate_reference(a: &[f64], out: &mut [f64]) {
    // P_j' = Σ_{i < j, j - i odd} (2i + 1) P_i
    let n = a.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        let mut j = i + 1;
        while j < n {
            s += a[j];
            j += 2;
        }
        *o = (2 * i + 1) as f64 * s;
    }
}
