//! Discretizations of the one-dimensional linear advection problem
//! `β u' = f` on an interval with `u = 0` on the inflow end, together with a
//! patchwise conforming reconstruction of the discrete solution and a fully
//! computable upper bound on the `L2` error.
//!
//! The crate is `no_std` and only needs `alloc`. Floating point transcendental
//! functions come from [`libm`].
//!
//! Typical pipeline:
//!
//! ```
//! use advest_core::{estimate, mesh::Mesh1D, problem::{AdvectionProblem, SourceTerm}, solvers::Method};
//!
//! let mesh = Mesh1D::uniform(0.0, 1.0, 4).unwrap();
//! let problem = AdvectionProblem::new(1.0, SourceTerm::Arctan).unwrap();
//! let uh = Method::Pg2.solve(&problem, &mesh, 1).unwrap();
//! let report = estimate(&uh, &problem, 1).unwrap();
//! assert!(report.estimator >= report.exact_error.unwrap());
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod legendre;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod problem;
pub mod quadrature;
pub mod reconstruction;
pub mod residual;
pub mod solvers;

mod space;

pub use error::{Error, Result};
pub use estimators::{efficiency_report, estimate, exact_error, EfficiencyReport, EstimateReport};
pub use mesh::{Mesh1D, Patch, VertexClass};
pub use poly::{BrokenPoly, Side};
pub use problem::{AdvectionProblem, SourceTerm};
pub use reconstruction::{assemble_global, solve_patch, PatchReconstruction, Reconstruction};
pub use residual::{check_hat_orthogonality, dual_norm_global, dual_norms_local, DualNormReport};
pub use solvers::Method;

/// Relative tolerance used for the hat-orthogonality test.
pub const ORTHOGONALITY_TOL: f64 = 1e-11;
