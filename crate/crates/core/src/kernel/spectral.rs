use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::dense::{check_finite, check_square, operator_norm, CMat};
use crate::error::{Error, Result};

/// Orthogonal split of the domain of a matrix into its numerical null space and
/// the complementary (row-space) directions.
///
/// Singular values at or below `threshold = rel_tol·σ_max` are classed as zero;
/// they are kept in `discarded` so rank decisions can be audited.
#[derive(Debug, Clone)]
pub struct RankSplit {
    /// Orthonormal columns spanning the null space.
    pub null_basis: CMat,
    /// Orthonormal columns spanning the orthogonal complement of the null space.
    pub range_basis: CMat,
    /// All singular values, descending, padded with zeros to the domain dimension.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    pub discarded: Vec<f64>,
}

impl RankSplit {
    pub fn rank(&self) -> usize {
        self.range_basis.ncols()
    }

    pub fn nullity(&self) -> usize {
        self.null_basis.ncols()
    }

    /// Orthogonal projector onto the null space.
    pub fn null_projector(&self) -> CMat {
        &self.null_basis * self.null_basis.adjoint()
    }

    /// Orthogonal projector onto the complement of the null space.
    pub fn range_projector(&self) -> CMat {
        &self.range_basis * self.range_basis.adjoint()
    }
}

/// Splits the domain of `a` (any shape) by its right singular vectors.
pub fn null_space_basis(a: &CMat, rel_tol: f64) -> Result<RankSplit> {
    check_finite(a)?;
    let n = a.ncols();
    if n == 0 {
        return Ok(RankSplit {
            null_basis: CMat::zeros(0, 0),
            range_basis: CMat::zeros(0, 0),
            singular_values: Vec::new(),
            threshold: 0.0,
            discarded: Vec::new(),
        });
    }
    // Pad short matrices with zero rows so the SVD yields a full set of right
    // singular vectors.
    let rows = a.nrows().max(n);
    let padded = CMat::from_fn(rows, n, |i, j| {
        if i < a.nrows() {
            a[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let svd = padded.svd_unordered(false, true);
    let v_t = svd.v_t.ok_or(Error::EigenFailure)?;
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let sigma_max = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    let threshold = rel_tol * sigma_max;

    let mut null_cols = Vec::new();
    let mut range_cols = Vec::new();
    let mut singular_values = Vec::with_capacity(n);
    let mut discarded = Vec::new();
    for &k in &order {
        let s = sv[k];
        singular_values.push(s);
        let col = v_t.row(k).adjoint();
        if s <= threshold {
            discarded.push(s);
            null_cols.push(col);
        } else {
            range_cols.push(col);
        }
    }
    let stack = |cols: &[nalgebra::DVector<Complex64>]| {
        if cols.is_empty() {
            CMat::zeros(n, 0)
        } else {
            CMat::from_columns(cols)
        }
    };
    Ok(RankSplit {
        null_basis: stack(&null_cols),
        range_basis: stack(&range_cols),
        singular_values,
        threshold,
        discarded,
    })
}

/// `‖P_U − P_V‖` for orthonormal column bases `U`, `V` of the same ambient space.
pub fn subspace_gap(u: &CMat, v: &CMat) -> f64 {
    let pu = u * u.adjoint();
    let pv = v * v.adjoint();
    operator_norm(&(pu - pv))
}

pub fn smallest_singular_value(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.singular_values_unordered()
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s))
}

/// Inverse with a singularity gate: fails if `σ_min ≤ 1e−10·‖A‖`.
pub fn inverse(a: &CMat) -> Result<CMat> {
    check_square(a)?;
    let norm = operator_norm(a);
    let smallest = smallest_singular_value(a);
    let threshold = 1e-10 * norm;
    if !(smallest > threshold) {
        return Err(Error::Singular {
            smallest,
            threshold,
        });
    }
    a.clone().lu().try_inverse().ok_or(Error::Singular {
        smallest,
        threshold,
    })
}

/// Eigenvalues from a complex Schur form.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let n = check_square(a)?;
    check_finite(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = operator_norm(a);
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    // The complex Schur form is triangular; guard against an unreduced 2x2 block anyway.
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].norm() > 1e-14 * scale {
            let (p, q, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (p + s) * 0.5;
            let disc = ((p - s) * 0.5 * ((p - s) * 0.5) + q * r).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

/// `max Re λ` over the spectrum.
pub fn spectral_abscissa(a: &CMat) -> Result<f64> {
    let ev = eigenvalues(a)?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// `max |λ|` over the spectrum.
pub fn spectral_radius(a: &CMat) -> Result<f64> {
    let ev = eigenvalues(a)?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
