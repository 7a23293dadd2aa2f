//! Scalars, coefficient sequences and the sparse polynomials used by the large constructions.

mod params;
mod roots;
pub(crate) mod seq;
mod sparse;
mod zeros;

pub use num_complex::Complex64 as Complex;
pub use params::Parameters;
pub use roots::polynomial_roots;
pub use seq::{
    bilinear_pairing, bj_residual, difference_quotient, eval, p_norm, p_norm_pow, seq_signed_power,
    signed_power, CoefSeq,
};
pub use sparse::{sparse_multiply, sparse_multiply_disjoint, sparse_p_norm, SparsePoly};
pub use zeros::{DiskPoint, ZeroSetSpec, COINCIDENCE_RADIUS};
