use serde::Serialize;

use super::operator::{epsilon_min, DissipativeOperator};
use crate::error::{Error, Result};
use crate::kernel::{matrix_exp_scaled, operator_norm, smallest_singular_value, spectral_abscissa, CMat};

/// Finite-dimensional exponential-stability certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityWitness {
    pub stable: bool,
    pub abscissa: f64,
    /// A time `t*` with `‖e^{At*}‖ < 1`, found by doubling search.
    pub decay_time: Option<f64>,
    pub decay_norm: Option<f64>,
}

/// Stable iff the spectral abscissa is below `−1e−10·‖A‖`.
pub fn is_exponentially_stable(a: &CMat) -> Result<StabilityWitness> {
    let abscissa = spectral_abscissa(a)?;
    let norm = operator_norm(a);
    let stable = norm > 0.0 && abscissa < -1e-10 * norm;
    let mut witness = StabilityWitness {
        stable,
        abscissa,
        decay_time: None,
        decay_norm: None,
    };
    if stable {
        let mut t = 1.0 / norm;
        for _ in 0..200 {
            let n = operator_norm(&matrix_exp_scaled(a, t)?);
            if n < 1.0 - 1e-12 {
                witness.decay_time = Some(t);
                witness.decay_norm = Some(n);
                break;
            }
            t *= 2.0;
        }
    }
    Ok(witness)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum StabilityTransfer {
    /// `ε < 2`: stability of either semigroup implies stability of the other.
    Applies {
        epsilon: f64,
        a: StabilityWitness,
        b: StabilityWitness,
    },
    /// `ε ≥ 2`: nothing is claimed.
    PreconditionNotMet { epsilon: f64 },
}

/// For `ε(A, B) < 2`, checks that `A` and `B` are both stable or both not.
pub fn stability_transfer_check(
    a: &DissipativeOperator,
    b: &DissipativeOperator,
) -> Result<StabilityTransfer> {
    let epsilon = epsilon_min(a, b)?.epsilon;
    if !(epsilon < 2.0) {
        return Ok(StabilityTransfer::PreconditionNotMet { epsilon });
    }
    let wa = is_exponentially_stable(a.matrix())?;
    let wb = is_exponentially_stable(b.matrix())?;
    if wa.stable != wb.stable {
        return Err(Error::Inconsistent(format!(
            "ε = {epsilon} < 2 but stability differs (abscissae {} and {})",
            wa.abscissa, wb.abscissa
        )));
    }
    Ok(StabilityTransfer::Applies {
        epsilon,
        a: wa,
        b: wb,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InversionCheck {
    pub direct: f64,
    pub inverse: f64,
    pub dual_direct: f64,
    pub dual_inverse: f64,
}

impl InversionCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.direct - self.inverse).abs()
    }

    pub fn holds(&self, tol: f64) -> bool {
        if self.direct.is_infinite() || self.inverse.is_infinite() {
            return self.direct == self.inverse;
        }
        self.discrepancy() <= tol * self.direct.max(1.0)
    }
}

/// `ε(A, B)` next to `ε(A⁻¹, B⁻¹)`; the two agree for invertible dissipative pairs.
pub fn inversion_invariance_check(
    a: &DissipativeOperator,
    b: &DissipativeOperator,
) -> Result<InversionCheck> {
    for op in [a, b] {
        let smallest = smallest_singular_value(op.matrix());
        let threshold = 1e-10 * op.norm();
        if !(smallest > threshold) {
            return Err(Error::Singular {
                smallest,
                threshold,
            });
        }
    }
    let direct = epsilon_min(a, b)?;
    let inverse = epsilon_min(&a.inverse()?, &b.inverse()?)?;
    Ok(InversionCheck {
        direct: direct.epsilon,
        inverse: inverse.epsilon,
        dual_direct: direct.dual_epsilon,
        dual_inverse: inverse.dual_epsilon,
    })
}
