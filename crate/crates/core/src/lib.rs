//! Numerical toolkit for p-inner functions in the spaces `l^p_A` of analytic functions with
//! `p`-summable Taylor coefficients: metric projections onto shift-invariant subspaces,
//! p-inner functions with prescribed zeros, zero-set certificates and explicit zero-set
//! constructions.

pub mod algebra;
pub mod error;
pub mod sum;

pub use error::{Error, Result};
pub mod constructions;
pub mod inner;
pub mod projection;
pub mod verify;
pub mod zerosets;
