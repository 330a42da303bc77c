//! Numerical construction of isometric immersions into Minkowski spacetime.
//!
//! The toolkit takes gridded geometric data on a rectangular coordinate chart and
//! produces immersions `f : Ω → ℝ^{n+1}` into flat spacetime with the metric
//! `η = diag(−1, 1, …, 1)`, together with residual reports that quantify how well
//! the construction succeeded:
//!
//! * from a **flat Lorentzian metric** `g` sampled on an (n+1)-dimensional chart,
//!   an immersion with `(df)ᵀ η (df) = g` ([`manifold_immersion`]);
//! * from **hypersurface data** on an n-dimensional chart — either rigged operator
//!   fields `(Γ, K, L, M)` or fundamental forms `(g, K)` of a nowhere-null
//!   hypersurface — an immersion plus a transversal rigging field
//!   ([`hypersurface_immersion`]);
//! * **stability and uniqueness experiments**: reconstructions are aligned by the
//!   Minkowski isometry (or affine map) determined at the base point, and the
//!   remaining gap is measured in discrete Sobolev norms ([`alignment_norms`]).
//!
//! The machinery underneath is deliberately small and dependency-free:
//!
//! * [`linalg`] — dense matrices with a cyclic-Jacobi symmetric eigensolver;
//! * [`lorentz_algebra`] — factoring a symmetric matrix with one negative
//!   eigenvalue as `FᵀηF = G`, with a continuation branch that keeps the factor
//!   Lipschitz in `G`;
//! * [`grid_calculus`] — finite-difference tensor calculus: Christoffel symbols,
//!   Riemann curvature, flatness residuals;
//! * [`pfaff_solver`] — integration of the overdetermined systems
//!   `∂Y/∂x^α = Y A_α + B_α Y + C_α` and `df = F` over the whole chart, plus the
//!   compatibility residuals that decide whether that integration is meaningful;
//! * [`fixtures`] and [`fieldio`] — closed-form sample data and the on-disk
//!   manifest/field format shared with the command-line tool.
//!
//! Everything operates on immutable values and returns deterministic results; no
//! global state, no hidden randomness (samplers take explicit seeds).

pub mod chart;
pub mod error;
pub mod field;
pub mod linalg;
pub mod report;

pub mod grid_calculus;
pub mod lorentz_algebra;
pub mod pfaff_solver;
pub mod sampling;

pub mod manifold_immersion;

pub mod hypersurface_immersion;

pub mod alignment_norms;

pub mod fieldio;
pub mod fixtures;

pub use chart::{Axis, GridChart};
pub use error::{Error, Result};
pub use field::TensorField;
pub use linalg::Mat;
pub use report::ResidualReport;

pub use alignment_norms::{AlignMap, AlignmentResult};
pub use hypersurface_immersion::{FundamentalForms, RiggedImmersionResult, RiggedOperators};
pub use lorentz_algebra::{DecompAnchor, LorentzMatrixCert, MinkIsometry};
pub use manifold_immersion::ImmersionResult;
pub use pfaff_solver::{PfaffCoeffs, StaircasePath, SweepOrder};
