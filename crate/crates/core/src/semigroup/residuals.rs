//! Quadrature cross-checks of the integral identities behind the bounds.

use num_complex::Complex64;
use serde::Serialize;

use super::operator::DissipativeOperator;
use crate::error::{Error, Result};
use crate::kernel::quad::{integrate, integrate_scalar, QuadOptions};
use crate::kernel::{identity, inner, matrix_exp_scaled, operator_norm, CMat, CVec};

/// Quadrature accuracy target, relative to the natural scale of each integral.
const QUAD_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissipationIntegral {
    /// `½(‖y‖² − ‖e^{At}y‖²)`
    pub closed_form: f64,
    /// `∫₀ᵗ Re(−Ae^{As}y, e^{As}y) ds`
    pub quadrature: f64,
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

fn check_vec(n: usize, v: &CVec) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    Ok(())
}

pub fn dissipation_integral(a: &DissipativeOperator, y: &CVec, t: f64) -> Result<DissipationIntegral> {
    check_time(t)?;
    check_vec(a.dim(), y)?;
    let yy = y.norm_squared();
    let et_y = a.exp(t)? * y;
    let closed_form = 0.5 * (yy - et_y.norm_squared());
    let opts = QuadOptions {
        abs_tol: QUAD_REL * yy,
        ..QuadOptions::default()
    };
    let (q, _) = integrate_scalar(
        |s| {
            let z = a.exp(s)? * y;
            Ok(Complex64::new(a.dissipation(&z), 0.0))
        },
        0.0,
        t,
        opts,
    )?;
    Ok(DissipationIntegral {
        closed_form,
        quadrature: q.re,
    })
}

/// Residual of the weak Duhamel formula
///
/// ```text
/// (e^{B*t}x, y) − (x, e^{At}y) = ∫₀ᵗ [(B*e^{B*s}x, e^{A(t−s)}y) − (e^{B*s}x, Ae^{A(t−s)}y)] ds,
/// ```
///
/// divided by `‖x‖‖y‖`.
pub fn duhamel_residual(a: &CMat, b: &CMat, t: f64, x: &CVec, y: &CVec) -> Result<f64> {
    check_time(t)?;
    check_vec(a.nrows(), x)?;
    check_vec(a.nrows(), y)?;
    let scale = x.norm() * y.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let b_adj = b.adjoint();
    let lhs = inner(&(matrix_exp_scaled(&b_adj, t)? * x), y) - inner(x, &(matrix_exp_scaled(a, t)? * y));
    let opts = QuadOptions {
        abs_tol: QUAD_REL * scale,
        ..QuadOptions::default()
    };
    let (integral, _) = integrate_scalar(
        |s| {
            let u = matrix_exp_scaled(&b_adj, s)? * x;
            let v = matrix_exp_scaled(a, t - s)? * y;
            Ok(inner(&(&b_adj * &u), &v) - inner(&u, &(a * &v)))
        },
        0.0,
        t,
        opts,
    )?;
    Ok((lhs - integral).norm() / scale)
}

/// `‖∫₀ᵗ e^{Aτ}(A + B)e^{Bτ} dτ + (I − e^{At}e^{Bt})‖`, relative to
/// `max(1, ‖e^{At}‖‖e^{Bt}‖)`.
pub fn continuous_identity_residual(a: &CMat, b: &CMat, t: f64) -> Result<f64> {
    check_time(t)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let n = a.nrows();
    let ea = matrix_exp_scaled(a, t)?;
    let eb = matrix_exp_scaled(b, t)?;
    let scale = (operator_norm(&ea) * operator_norm(&eb)).max(1.0);
    let sum = a + b;
    let opts = QuadOptions {
        abs_tol: QUAD_REL * scale,
        ..QuadOptions::default()
    };
    let q = integrate(
        |s| Ok(matrix_exp_scaled(a, s)? * &sum * matrix_exp_scaled(b, s)?),
        0.0,
        t,
        opts,
    )?;
    let residual = q.value + (identity(n) - ea * eb);
    Ok(operator_norm(&residual) / scale)
}
