//! Crate-wide error type.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An odd-power coefficient of the adjoined radical failed to cancel in
    /// `shift_product`; signals a bookkeeping bug upstream.
    #[error("non-polynomial residue: odd radical coefficient {max_residue:.3e} exceeds tolerance {tol:.3e}")]
    NonPolynomialResidue { max_residue: f64, tol: f64 },

    /// Leading coefficient vanished (or another structural degeneracy) at
    /// working precision.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Two root clusters sit within 10x of the clustering tolerance; the
    /// caller must tighten precision before multiplicities can be trusted.
    #[error("cluster ambiguity: representatives {a} and {b} within 10x tolerance {tol:.3e}")]
    ClusterAmbiguity { a: Complex64, b: Complex64, tol: f64 },

    /// Vanishing-order estimates from two sampling radii disagree.
    #[error("order estimate unstable at {point}: ring slopes {slope_a:.3} vs {slope_b:.3} differ by more than 0.25")]
    OrderEstimateUnstable {
        point: Complex64,
        slope_a: f64,
        slope_b: f64,
    },

    /// A branch point lies on (or too close to) a continuation loop.
    #[error("branch point a_{index} lies on the continuation loop")]
    BranchPointOnLoop { index: usize },

    /// A dyadic selector search ran out of halvings.
    #[error("search exhausted after {steps} halvings while selecting {what}")]
    SearchExhausted { what: &'static str, steps: u32 },

    /// A grid scan found no points outside the previous sublevel set.
    #[error("no exterior grid points found for stage {stage}; grid too coarse")]
    EmptyExterior { stage: usize },

    /// A circle probe violates its exclusion requirements.
    #[error("invalid probe: {0}")]
    ProbeInvalid(String),

    /// Construction file carries an unsupported schema version.
    #[error("schema mismatch: file has version {found}, expected {expected}")]
    SchemaMismatch { found: u32, expected: u32 },

    /// A loaded construction violates a structural invariant.
    #[error("invariant violation {name}: {detail}")]
    InvariantViolation { name: &'static str, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Name of the violated invariant, when applicable.
    pub fn invariant_name(&self) -> Option<&'static str> {
        match self {
            Error::InvariantViolation { name, .. } => Some(name),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
