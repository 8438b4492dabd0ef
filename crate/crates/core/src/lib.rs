//! Gamma factors for pairs (π, τ) of representations of general linear
//! groups over small prime fields, computed two ways and compared:
//!
//! * the Rankin-Selberg gamma factor, extracted from the functional
//!   equation of the zeta pairing of Whittaker functions, and
//! * the Gelfand-Kazhdan gamma factor, extracted as the scalar by which
//!   an explicit operator on the Kirillov space acts on an embedded
//!   Whittaker model of τ.
//!
//! Everything is finite: GL_n(F_q) is fully enumerated, integrals are
//! sums over coset representatives with counting measure, and the
//! modulus character |det|^(s-1/2) is identically 1, so the comparison
//! lands exactly at the central point of the functional equation.

pub mod algebra;
pub mod app;
pub mod gamma;
pub mod group;
pub mod models;
pub mod spectra;

use thiserror::Error;

/// Crate-wide error type. Variant names follow the failure modes of the
/// individual modules; several of them double as mathematical assertions
/// (e.g. `SingularMatrix` out of a cuspidal restriction means the
/// component was misclassified).
#[derive(Debug, Error)]
pub enum Error {
    #[error("q must be prime <= 7 (got {0})")]
    UnsupportedField(u64),
    #[error("group order {order} exceeds the budget cap {cap}")]
    BudgetExceeded { order: u128, cap: u128 },
    #[error("matrix is singular at tolerance {tol:e}")]
    SingularMatrix { tol: f64 },
    #[error("eigenvalue clusters separated by {gap:e}, below the ambiguity threshold {threshold:e}")]
    ClusterAmbiguity { gap: f64, threshold: f64 },
    #[error("failed to split a reducible subspace after {retries} commutant redraws")]
    SplitExhausted { retries: usize },
    #[error("element does not lie in the ambient group of this coset table")]
    NotInAmbient,
    #[error("element is not upper unitriangular")]
    NotUnipotent,
    #[error("pairing requires opposite character directions")]
    DirectionMismatch,
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("operator is not scalar on the subspace (deviation {deviation:e})")]
    NotScalar { deviation: f64 },
    #[error("all zeta pairings vanish; no pair available to extract gamma")]
    NoNonvanishingPair,
    #[error("functional-equation ratios disagree across basis pairs (spread {spread:e})")]
    InconsistentRatio { spread: f64 },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cache rejected: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Largest group order the enumerator will accept.
pub const DEFAULT_ORDER_CAP: u128 = 20_000;

/// Default tolerance for assertions on computed quantities.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Tolerance used inside linear-algebra kernels.
pub const LINALG_TOL: f64 = 1e-10;
