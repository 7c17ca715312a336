//! Noncommutative polynomial algebra and sum-of-hermitian-squares
//! certification.
//!
//! The crate centres on two polynomials: `f = X1 X2 X2 X1 - X2 X1 X1 X2 + 1`
//! over self-adjoint variables and `h = X X' - X' X + 1` over a variable
//! paired with its adjoint. Neither is negative semidefinite at any bounded
//! matrix tuple, yet no conjugated combination `Σ g_i* p g_i` is a sum of
//! hermitian squares. [`opeval`] produces the positivity witnesses and
//! [`soscert`] the exact refutations.

pub mod freealg;
pub mod gram;
pub mod ncparse;
pub mod numlin;
pub mod opeval;
pub mod random;
pub mod soscert;

pub use freealg::{AlgebraError, Letter, NcPoly, Rational, VarContext, Word};
pub use ncparse::{parse_poly, print_canonical, ParseError};
pub use soscert::{
    conjugated_poly, refute_conjugation, sos_decompose, top_obstruction, Obstruction,
    ObstructionKind, SosOptions, SosResult,
};
