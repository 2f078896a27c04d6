//! Dense complex linear-algebra primitives.
//!
//! Every operator in the crate is a [`CMat`]. Tolerances are always relative
//! to a natural scale (an operator norm or a largest eigenvalue).

mod dense;
mod expm;
mod psd;
pub mod quad;
pub mod random;
mod spectral;

pub use dense::{
    adjoint, check_finite, check_square, hermitian_part, identity, inner, is_finite,
    operator_norm, real_diagonal, skew_part, vec_norm, zeros, CMat, CVec,
};
pub use expm::{matrix_exp, matrix_exp_scaled};
pub use psd::{psd_sqrt, pseudo_inv_sqrt, HermitianPsd, PseudoInvSqrt};
pub use spectral::{
    eigenvalues, inverse, null_space_basis, smallest_singular_value, spectral_abscissa,
    spectral_radius, subspace_gap, RankSplit,
};

/// Default relative rank tolerance: eigenvalues or singular values at or
/// below `RANK_TOL` times the largest one are treated as exactly zero.
pub const RANK_TOL: f64 = 1e-10;
