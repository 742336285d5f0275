//! Exact decision procedures for truncated moment problems supported on
//! plane curves of the form y * c(x, y) = 0, where c is a conic.
//!
//! All decisions run in exact arithmetic: arbitrary-precision rationals
//! plus, where square roots are unavoidable, a single quadratic extension.
//! Floating point appears only in the final atom-extraction step, and every
//! extracted measure is re-verified against the input moments.

pub mod cli;
pub mod conics;
pub mod cubic_circular;
pub mod cubic_parabolic;
pub mod error;
pub mod measures;
pub mod exactmath;
pub mod moments;
pub mod transforms;
pub mod univariate;

pub use error::{Error, Result};

/// Entry point used by the `momentcurve` binary; returns the process exit
/// code.
pub fn cli_main() -> i32 {
    cli::run()
}
