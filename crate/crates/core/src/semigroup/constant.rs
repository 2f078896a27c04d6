use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::kernel::{identity, operator_norm, pseudo_inv_sqrt, CMat, HermitianPsd, RANK_TOL};

/// Range-compatibility tolerance, relative to the caller's scale.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeSide {
    /// Some `x` with `(Lx, x) = 0` still sees the perturbation: `x*Δ ≠ 0`.
    Left,
    /// Some `y` with `(Ry, y) = 0` is moved by the perturbation: `Δy ≠ 0`.
    Right,
}

/// Witness that the relative constant is infinite.
#[derive(Debug, Clone, Serialize)]
pub struct RangeViolation {
    pub side: RangeSide,
    pub residual: f64,
    /// Unit vector in the null space of the offending weight.
    #[serde(skip)]
    pub direction: DVector<Complex64>,
}

/// Least `ε` with `|(x, Δy)|² ≤ ε²·(Lx, x)·(Ry, y)`, or `+∞`.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeConstant {
    pub value: f64,
    pub range_compatible: bool,
    pub violation: Option<RangeViolation>,
    pub left_discarded: Vec<f64>,
    pub right_discarded: Vec<f64>,
}

fn top_singular_pair(m: &CMat) -> (f64, DVector<Complex64>, DVector<Complex64>) {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    (
        svd.singular_values[k],
        u.column(k).into_owned(),
        v_t.row(k).adjoint(),
    )
}

/// Computes `‖L^{†/2} Δ R^{†/2}‖` after checking that `Δ` vanishes on the null
/// space of `R` and that `Δ*` vanishes on the null space of `L`.
///
/// `scale` sets the range-check threshold `RANGE_TOL·scale`; callers pass the
/// natural operator scale of the pair.
pub fn relative_constant(
    left: &HermitianPsd,
    delta: &CMat,
    right: &HermitianPsd,
    scale: f64,
) -> RelativeConstant {
    let l = pseudo_inv_sqrt(left, RANK_TOL);
    let r = pseudo_inv_sqrt(right, RANK_TOL);
    let left_discarded = l.discarded.clone();
    let right_discarded = r.discarded.clone();
    let delta_norm = operator_norm(delta);
    if delta_norm == 0.0 {
        return RelativeConstant {
            value: 0.0,
            range_compatible: true,
            violation: None,
            left_discarded,
            right_discarded,
        };
    }
    let threshold = RANGE_TOL * scale.max(delta_norm);
    let left_leak = (identity(left.dim()) - &l.projector) * delta;
    let right_leak = delta * (identity(right.dim()) - &r.projector);
    let left_res = operator_norm(&left_leak);
    let right_res = operator_norm(&right_leak);

    let violation = if left_res > threshold {
        let (s, u, _) = top_singular_pair(&left_leak);
        Some(RangeViolation {
            side: RangeSide::Left,
            residual: s,
            direction: u,
        })
    } else if right_res > threshold {
        let (s, _, v) = top_singular_pair(&right_leak);
        Some(RangeViolation {
            side: RangeSide::Right,
            residual: s,
            direction: v,
        })
    } else {
        None
    };
    let value = match violation {
        Some(_) => f64::INFINITY,
        None => operator_norm(&(&l.r * delta * &r.r)),
    };
    RelativeConstant {
        value,
        range_compatible: violation.is_none(),
        violation,
        left_discarded,
        right_discarded,
    }
}
