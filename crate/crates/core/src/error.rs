//! Error type shared by every module of the crate.
//!
//! Each variant names a violated precondition or a detected inconsistency in the
//! input data; numerical routines never panic on bad data, they return one of
//! these. I/O failures are wrapped so callers (in particular the CLI) can
//! distinguish "your data is wrong" from "your disk is wrong".

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input that fits no more specific variant (non-finite entries,
    /// asymmetric matrices passed where symmetry is required, bad shapes...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A symmetric matrix did not have exactly one negative eigenvalue.
    #[error("matrix has {negatives} negative eigenvalue(s), expected exactly one")]
    WrongSignature { negatives: usize },

    /// A matrix failed the determinant or operator-norm bound of the admissible
    /// class at the requested tolerance parameter.
    #[error("matrix out of the admissible class: {bound} bound violated ({detail})")]
    OutOfClass {
        bound: &'static str,
        detail: String,
    },

    /// An anchored decomposition was asked to continue a certificate issued at a
    /// different tolerance parameter.
    #[error("tolerance parameter mismatch: anchor at {anchor}, input at {input}")]
    EpsilonMismatch { anchor: f64, input: f64 },

    /// The orthonormalization step of the continuation branch collapsed; this
    /// signals that the branch threshold was violated by round-off.
    #[error("near-branch orthonormalization degenerated (column norm {norm:.3e})")]
    NearBranchDegenerate { norm: f64 },

    /// Derivative requested along a non-existent axis.
    #[error("axis {axis} out of range for a {dim}-axis chart")]
    AxisOutOfRange { axis: usize, dim: usize },

    /// Pointwise matrix inversion hit a (numerically) singular metric; reports
    /// the worst offending grid point.
    #[error("metric singular at grid point {point:?} (|det| = {det:.3e})")]
    SingularMetricAt { point: Vec<usize>, det: f64 },

    /// A metric field changed signature across the grid where a uniform
    /// signature was required.
    #[error("metric signature not uniform over the grid (first offender at point {point:?})")]
    MixedSignature { point: Vec<usize> },

    /// A metric sample failed Lorentz certification at a specific grid point.
    #[error("metric not Lorentz-admissible at grid point {point:?}: {source}")]
    NotLorentzAt {
        point: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    /// The base block diag(g(x⋆), λ) of the forms pipeline failed certification.
    #[error("base block diag(g(x*), lambda) not Lorentz-admissible: {source}")]
    NotLorentzBlock {
        #[source]
        source: Box<Error>,
    },

    /// The integrated frame field lost invertibility somewhere on the grid,
    /// which means the input data were not compatible.
    #[error("frame determinant vanishes or flips sign at grid point {point:?} (det = {det:.3e})")]
    SingularFrameAt { point: Vec<usize>, det: f64 },

    /// A caller-supplied base frame was not invertible.
    #[error("base frame not invertible (det = {det:.3e})")]
    SingularFstar { det: f64 },

    /// Integration overflowed to non-finite values (stiff or invalid data).
    #[error("integration produced a non-finite state at grid point {point:?}")]
    NonFiniteState { point: Vec<usize> },

    /// A staircase path stepped outside the chart.
    #[error("path leaves the chart at segment {segment}")]
    PathOutOfChart { segment: usize },

    /// Two fields that must share a component shape did not.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    /// Two fields that must live on the same chart did not.
    #[error("charts differ between the two inputs")]
    ChartMismatch,

    /// A proper (orientation-preserving) alignment was required but the
    /// construction produced an orientation-reversing map.
    #[error("alignment map reverses orientation (det = {det:.6}) but properness was required")]
    NotProper { det: f64 },

    /// Fixture name not recognized by the generator.
    #[error("unknown fixture `{name}`")]
    UnknownFixture { name: String },

    /// Fixture parameters outside the valid domain.
    #[error("bad fixture parameters: {0}")]
    BadParams(String),

    /// Manifest file is syntactically valid but semantically broken
    /// (missing fields, wrong byte counts, unknown encodings...).
    #[error("bad manifest: {0}")]
    BadManifest(String),

    /// An iterative kernel failed to converge. With finite inputs this is not
    /// reachable for the matrix sizes this crate targets; it exists so the
    /// library stays total instead of panicking.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Filesystem-level failure while reading or writing field files.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error represents an I/O failure rather than a validation
    /// failure; the CLI maps the two onto different exit codes.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
