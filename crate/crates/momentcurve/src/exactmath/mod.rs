//! Exact scalar and matrix arithmetic: arbitrary-precision rationals, a
//! single quadratic extension, dense symmetric matrices, positive
//! semidefiniteness with exact certificates, Moore-Penrose pseudoinverses
//! and generalized Schur complements.

mod mat;
mod psd;
mod quad;
mod scalar;

pub use mat::{Mat, SymMat};
pub use psd::{pinv, pinv_sym, psd_rank, schur, MinorWitness, PsdReport};
pub use quad::{quad_sign, QuadScalar};
pub use scalar::{rat, rat_approx_f64, rat_from_str, rat_i64, rat_to_string, Rat, Scalar};
