use rayon::prelude::*;
use serde::Serialize;

use super::phase::{aplus_matrix, PhaseSpaceOperator, SecondOrderSystem};
use crate::error::{Error, Result};
use crate::kernel::{identity, matrix_exp_scaled, operator_norm, CMat, CVec, HermitianPsd};
use crate::semigroup::validate_grid;

/// Relative tolerance for `x ∈ 𝒳`.
const PHASE_TOL: f64 = 1e-8;
/// Slack for the monotonicity of the Trotter–Kato error column.
const MONOTONE_SLACK: f64 = 1e-8;

/// `M_n = f_n(M)` with `f_n(λ) = clamp(λ, 1/n, n)`.
#[derive(Debug, Clone)]
pub struct MassApproximation {
    pub clip_index: u64,
    pub m_n: HermitianPsd,
}

pub fn clip_mass(m: &HermitianPsd, n: u64) -> Result<MassApproximation> {
    if n == 0 {
        return Err(Error::InvalidArgument("clip index must be at least 1".into()));
    }
    let (lo, hi) = (1.0 / n as f64, n as f64);
    let clipped = m.map_spectrum(|l| l.clamp(lo, hi));
    Ok(MassApproximation {
        clip_index: n,
        m_n: HermitianPsd::certify(clipped, 1e-10)?,
    })
}

fn inverse_sqrt(m_n: &HermitianPsd) -> Result<CMat> {
    let threshold = 1e-10 * m_n.max_eigenvalue();
    let smallest = m_n.min_eigenvalue();
    if m_n.dim() > 0 && (smallest <= threshold || smallest <= 0.0) {
        return Err(Error::Singular {
            smallest,
            threshold,
        });
    }
    Ok(m_n.map_spectrum(|l| 1.0 / l.sqrt()))
}

/// `𝒜_n = [[0, R], [−R, −RCR]]` with `R = M_n^{−1/2}`.
///
/// The result is checked to invert `[[−C, −M_n^{1/2}], [M_n^{1/2}, 0]]`
/// to `1e−10` relative to `‖𝒜⁺_n‖·‖𝒜_n‖`.
pub fn build_an(m_n: &HermitianPsd, c: &CMat) -> Result<CMat> {
    let n = m_n.dim();
    if c.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.nrows(),
        });
    }
    let r = inverse_sqrt(m_n)?;
    let mut a = CMat::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&r);
    a.view_mut((n, 0), (n, n)).copy_from(&(-&r));
    a.view_mut((n, n), (n, n)).copy_from(&(-(&r * c * &r)));
    let aplus = aplus_matrix(&m_n.map_spectrum(f64::sqrt), c);
    let residual = operator_norm(&(&aplus * &a - identity(2 * n)));
    let scale = (operator_norm(&aplus) * operator_norm(&a)).max(1.0);
    if residual > 1e-10 * scale {
        return Err(Error::Inconsistent(format!(
            "𝒜_n is not the inverse of 𝒜⁺_n: residual {residual}"
        )));
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrotterKatoRow {
    pub n: u64,
    pub sup_error: f64,
    pub t_at_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrotterKatoTable {
    pub rows: Vec<TrotterKatoRow>,
    /// The error column is nonincreasing in `n` up to `1e−8`.
    pub nonincreasing: bool,
}

impl TrotterKatoTable {
    pub const CSV_HEADER: &'static str = "n,sup_error,t_at_sup";

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.sup_error)
    }
}

/// `sup_t ‖e^{𝒜_n t}x − e^{𝒜t}x‖` for each clip index in `n_list`.
pub fn trotter_kato_error(
    sys: &SecondOrderSystem,
    phase: &PhaseSpaceOperator,
    x: &CVec,
    t_grid: &[f64],
    n_list: &[u64],
) -> Result<TrotterKatoTable> {
    validate_grid(t_grid)?;
    if x.len() != 2 * sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: 2 * sys.dim(),
            found: x.len(),
        });
    }
    phase.require_in_phase_space(x, PHASE_TOL)?;
    let exact: Vec<CVec> = t_grid
        .par_iter()
        .map(|&t| phase.semigroup(t).map(|s| s * x))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a_n = build_an(&clip_mass(sys.mass(), n)?.m_n, sys.damping())?;
        let errors: Vec<f64> = t_grid
            .par_iter()
            .zip(&exact)
            .map(|(&t, e)| Ok((matrix_exp_scaled(&a_n, t)? * x - e).norm()))
            .collect::<Result<_>>()?;
        let (i, sup_error) = errors
            .iter()
            .enumerate()
            .fold((0, 0.0), |(ib, vb), (i, &v)| if v > vb { (i, v) } else { (ib, vb) });
        rows.push(TrotterKatoRow {
            n,
            sup_error,
            t_at_sup: t_grid[i],
        });
    }
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].sup_error <= w[0].sup_error + MONOTONE_SLACK);
    Ok(TrotterKatoTable {
        rows,
        nonincreasing,
    })
}

/// Largest `‖M_n ÿ + Cẏ + y‖` along `(y, u) = e^{𝒜_n t}(y₀, M_n^{1/2}v₀)`, relative
/// to the largest `‖M_n‖‖ÿ‖ + ‖C‖‖ẏ‖ + ‖y‖`. Derivatives come from
/// `ż = 𝒜_n z` and `z̈ = 𝒜_n² z`.
pub fn second_order_residual(
    m_n: &HermitianPsd,
    c: &CMat,
    y0: &CVec,
    v0: &CVec,
    t_grid: &[f64],
) -> Result<f64> {
    validate_grid(t_grid)?;
    let n = m_n.dim();
    if y0.len() != n || v0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y0.len().max(v0.len()),
        });
    }
    let a_n = build_an(m_n, c)?;
    let a_n2 = &a_n * &a_n;
    let mut z0 = CVec::zeros(2 * n);
    z0.rows_mut(0, n).copy_from(y0);
    z0.rows_mut(n, n).copy_from(&(m_n.map_spectrum(f64::sqrt) * v0));
    let (m_norm, c_norm) = (operator_norm(m_n.matrix()), operator_norm(c));
    let per_t: Vec<(f64, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            let z = matrix_exp_scaled(&a_n, t)? * &z0;
            let dz = &a_n * &z;
            let ddz = &a_n2 * &z;
            let (y, dy, ddy) = (z.rows(0, n), dz.rows(0, n), ddz.rows(0, n));
            let res = (m_n.matrix() * ddy + c * dy + y).norm();
            let scale = m_norm * ddy.norm() + c_norm * dy.norm() + y.norm();
            Ok((res, scale))
        })
        .collect::<Result<_>>()?;
    let res = per_t.iter().map(|p| p.0).fold(0.0, f64::max);
    let scale = per_t.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(if scale == 0.0 { res } else { res / scale })
}
