use super::dense::{check_finite, check_square, operator_norm, CMat};
use super::RANK_TOL;
use crate::error::{Error, Result};

/// A Hermitian matrix certified positive semidefinite up to a relative tolerance.
///
/// The eigendecomposition is computed once at certification and reused by the
/// spectral functions ([`psd_sqrt`], [`pseudo_inv_sqrt`], [`HermitianPsd::map_spectrum`]).
#[derive(Debug, Clone)]
pub struct HermitianPsd {
    matrix: CMat,
    /// Ascending.
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    tolerance: f64,
}

/// `R = H^{†/2}` together with the orthogonal projector onto the numerically
/// nonzero eigenspace of `H`.
#[derive(Debug, Clone)]
pub struct PseudoInvSqrt {
    pub r: CMat,
    pub projector: CMat,
    pub rank: usize,
    /// Eigenvalues treated as zero.
    pub discarded: Vec<f64>,
}

impl HermitianPsd {
    /// Certifies `m` against its own norm: `‖m − m*‖ ≤ tol·‖m‖` and
    /// `λ_min ≥ −tol·‖m‖`.
    pub fn certify(m: CMat, tolerance: f64) -> Result<Self> {
        let scale = operator_norm(&m);
        Self::certify_with_scale(m, tolerance, scale)
    }

    /// Same as [`HermitianPsd::certify`] with an externally supplied scale.
    pub fn certify_with_scale(m: CMat, tolerance: f64, scale: f64) -> Result<Self> {
        let n = check_square(&m)?;
        check_finite(&m)?;
        let asym = operator_norm(&(&m - m.adjoint()));
        if asym > tolerance * scale {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tolerance: tolerance * scale,
            });
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(&m, n);
        if let Some(&lowest) = eigenvalues.first() {
            if lowest < -tolerance * scale {
                return Err(Error::NotPsd {
                    eigenvalue: lowest,
                    tolerance: tolerance * scale,
                });
            }
        }
        Ok(Self {
            matrix: m,
            eigenvalues,
            eigenvectors,
            tolerance,
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V·diag(f(λ))·V*`, symmetrized so the result is exactly Hermitian.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        spectral_sum(&self.eigenvectors, &mapped)
    }

    fn from_parts(eigenvectors: CMat, eigenvalues: Vec<f64>, tolerance: f64) -> Self {
        let matrix = spectral_sum(&eigenvectors, &eigenvalues);
        Self {
            matrix,
            eigenvalues,
            eigenvectors,
            tolerance,
        }
    }
}

fn hermitian_eigen(m: &CMat, n: usize) -> (Vec<f64>, CMat) {
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn spectral_sum(v: &CMat, values: &[f64]) -> CMat {
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * values[j]);
    let m = scaled * v.adjoint();
    let n = m.nrows();
    CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Positive semidefinite square root.
///
/// Eigenvalues at or below `RANK_TOL·λ_max` (including slightly negative ones
/// admitted by certification) are mapped to exactly zero, so that null spaces
/// of `H` and `H^{1/2}` are identified consistently.
pub fn psd_sqrt(h: &HermitianPsd) -> HermitianPsd {
    let cut = RANK_TOL * h.max_eigenvalue().max(0.0);
    let roots = h
        .eigenvalues
        .iter()
        .map(|&l| if l <= cut { 0.0 } else { l.sqrt() })
        .collect();
    HermitianPsd::from_parts(h.eigenvectors.clone(), roots, h.tolerance)
}

/// Pseudo-inverse square root with eigenvalues `≤ rel_tol·λ_max` treated as zero.
pub fn pseudo_inv_sqrt(h: &HermitianPsd, rel_tol: f64) -> PseudoInvSqrt {
    let cut = rel_tol * h.max_eigenvalue().max(0.0);
    let keep: Vec<bool> = h.eigenvalues.iter().map(|&l| l > cut && l > 0.0).collect();
    let inv_roots: Vec<f64> = h
        .eigenvalues
        .iter()
        .zip(&keep)
        .map(|(&l, &k)| if k { 1.0 / l.sqrt() } else { 0.0 })
        .collect();
    let ones: Vec<f64> = keep.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
    let discarded = h
        .eigenvalues
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| !k)
        .map(|(&l, _)| l)
        .collect();
    PseudoInvSqrt {
        r: spectral_sum(&h.eigenvectors, &inv_roots),
        projector: spectral_sum(&h.eigenvectors, &ones),
        rank: keep.iter().filter(|&&k| k).count(),
        discarded,
    }
}
