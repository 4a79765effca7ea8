//! Desk-scale truncations of a modified Wermer set.
//!
//! The library builds the recursive family of bivariate polynomials whose
//! nested sublevel sets cut out a complete pluripolar set with Cantor-like
//! fibers, selects every constant of the recursion against its defining
//! inequality system on sampled grids, and exposes analysis probes
//! (branch separation, shadowing, jump bounds, sampled subharmonicity)
//! together with a CLI and stable file formats.

pub mod algebra;
pub mod branches;
pub mod construction;
pub mod error;

pub use error::{Error, Result};

/// CLI entry point; returns the process exit code.
pub fn cli_main() -> i32 {
    0
}
