//! Continuous-time perturbation theory for pairs of dissipative generators.
//!
//! For dissipative `A`, `B` the central quantity is the least `ε` with
//!
//! ```text
//! |(x, (B − A)y)|² ≤ ε² · Re(−Bx, x) · Re(−Ay, y)   for all x, y,
//! ```
//!
//! which controls the semigroups uniformly in time: `‖e^{Bt} − e^{At}‖ ≤ ε/2`.

mod bounds;
mod constant;
mod operator;
mod residuals;
mod stability;

pub use bounds::{
    bound_ratio, diff_norm_curve, limit_operator, log_grid, standard_t_grid, sup_of, validate_grid,
    verify_refined_bound, verify_uniform_bound, HorizonPolicy, LimitOperator, PerturbationReport,
    RefinedBound, RefinedCheck, BOUND_SLACK,
};
pub use constant::{relative_constant, RangeSide, RangeViolation, RelativeConstant, RANGE_TOL};
pub use operator::{
    epsilon_min, make_dissipative, verify_pointwise, DissipativeOperator, EpsilonMin,
    PointwiseCheck, DISSIPATIVITY_TOL,
};
pub use residuals::{
    continuous_identity_residual, dissipation_integral, duhamel_residual, DissipationIntegral,
};
pub use stability::{
    inversion_invariance_check, is_exponentially_stable, stability_transfer_check,
    InversionCheck, StabilityTransfer, StabilityWitness,
};
