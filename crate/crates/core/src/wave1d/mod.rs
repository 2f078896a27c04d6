//! One-dimensional damped wave equation
//!
//! ```text
//! ρ u_tt + γ u_t − (d u_tx)_x − (k u_x)_x = 0   on (a, b),
//! u(a) = 0,   u_x(b) + ζ u_t(b) = 0,
//! ```
//!
//! discretized with continuous piecewise-linear elements and reduced to a
//! second-order system in the energy inner product of the stiffness form.

mod analysis;
mod assembly;
mod coefficients;

pub use analysis::{
    decay_analysis, eta_check, eta_to_epsilon, mixed_type_scenario, perturb_damping,
    predicted_mass_nullity, DampingPerturbation, DecayReport, EtaCheck, TransferVerdict,
};
pub use assembly::{assemble, AssembledWaveSystem};
pub use coefficients::{FemMesh, Piece, WaveCoefficients};
