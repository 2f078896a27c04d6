//! Second-order systems `M ÿ + C ẏ + y = 0` with possibly singular mass `M`.
//!
//! In κ-coordinates (stiffness equal to the identity) the system is encoded by
//!
//! ```text
//! 𝒜⁺ = [[−C, −M^{1/2}], [M^{1/2}, 0]],
//! ```
//!
//! a bounded dissipative operator. The physical phase space is
//! `𝒳 = 𝒩(𝒜⁺)^⊥`, on which `𝒜⁺` is invertible; its inverse there is the
//! generator `𝒜` of the contraction semigroup solving the system.

mod approx;
mod damping;
mod phase;

pub use approx::{
    build_an, clip_mass, second_order_residual, trotter_kato_error, MassApproximation,
    TrotterKatoRow, TrotterKatoTable,
};
pub use damping::{
    damping_bridge, damping_epsilon, homotopy_chain_stability, sector_constant, system_stability,
    symmetric_part_equivalence, ChainLink, DampingBridge, DampingEpsilon, HomotopyChain,
    SectorConstant, SectorEquivalence,
};
pub use phase::{
    aplus_matrix, build_aplus, null_space_formula_check, pseudo_resolvent_residual,
    random_system, NullSpaceVerdict, PhaseSpaceOperator, SecondOrderSystem, Skew,
};
