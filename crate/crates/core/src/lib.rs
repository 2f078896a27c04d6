//! Perturbation bounds for contractive semigroups and damped second-order
//! systems, realized on finite dense complex matrices.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernel`]: dense complex linear algebra (Hermitian parts, matrix
//!   exponential, PSD square roots, rank splits, quadrature, seeded generators).
//! - [`semigroup`]: the relative perturbation constant for a pair of
//!   dissipative generators and the uniform bound `‖e^{Bt} − e^{At}‖ ≤ ε/2`.
//! - [`discrete`]: the analogous theory for powers of contractions.
//! - [`second_order`]: phase-space construction for `Mÿ + Cẏ + y = 0`,
//!   mass clipping, damping perturbations and stability transfer chains.
//! - [`wave1d`]: P1 finite elements for the damped wave equation on an interval.

pub mod discrete;
pub mod error;
pub mod kernel;
pub mod second_order;
pub mod semigroup;
pub mod wave1d;

pub use error::{Error, Result};
pub use kernel::CMat;
