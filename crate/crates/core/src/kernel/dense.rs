use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Diagonal matrix with the given real entries.
pub fn real_diagonal(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint()
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn check_finite(a: &CMat) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn check_square(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// `(A + A*)/2`, computed entrywise so that the result is exactly Hermitian.
pub fn hermitian_part(a: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    Ok(CMat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5))
}

/// `(A − A*)/2`, the skew-Hermitian complement of [`hermitian_part`].
pub fn skew_part(a: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    Ok(CMat::from_fn(n, n, |i, j| (a[(i, j)] - a[(j, i)].conj()) * 0.5))
}

/// Inner product `(u, v) = Σ u_i v̄_i`, linear in the first argument.
pub fn inner(u: &CVec, v: &CVec) -> Complex64 {
    v.dotc(u)
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.norm()
}

/// Spectral norm (largest singular value).
pub fn operator_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let max_abs = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max_abs == 0.0 {
        return 0.0;
    }
    // Rescale so the SVD never sees very large or very small magnitudes.
    let scaled = a.map(|z| z / max_abs);
    let sv = scaled.singular_values_unordered();
    sv.iter().fold(0.0f64, |m, &s| m.max(s)) * max_abs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::random::{complex_gaussian, seeded};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_part_of_hermitian_is_fixed_point() {
        let h = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, -3.0), c(1.0, 3.0), c(-1.0, 0.0)]);
        assert_eq!(hermitian_part(&h).unwrap(), h);
    }

    #[test]
    fn hermitian_part_of_skew_is_zero() {
        let s = CMat::from_row_slice(2, 2, &[c(0.0, 1.5), c(2.0, 1.0), c(-2.0, 1.0), c(0.0, -4.0)]);
        assert_eq!(hermitian_part(&s).unwrap(), zeros(2, 2));
    }

    #[test]
    fn hermitian_part_of_nilpotent() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let expected =
            CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(hermitian_part(&a).unwrap(), expected);
    }

    #[test]
    fn hermitian_part_rejects_non_square() {
        assert!(matches!(
            hermitian_part(&zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn parts_reconstruct() {
        let mut rng = seeded(7);
        let a = complex_gaussian(6, 6, &mut rng);
        let sum = hermitian_part(&a).unwrap() + skew_part(&a).unwrap();
        // (x+y)/2 + (x−y)/2 can differ from x by one rounding of each half.
        let err = (&sum - &a).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(err <= 4.0 * f64::EPSILON * scale, "err {err:e}");
    }

    #[test]
    fn norm_of_identity_and_diagonal() {
        assert!((operator_norm(&identity(5)) - 1.0).abs() < 1e-15);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![c(3.0, 0.0), c(-4.0, 0.0)]));
        assert!((operator_norm(&d) - 4.0).abs() < 1e-14);
        assert_eq!(operator_norm(&zeros(3, 3)), 0.0);
    }

    #[test]
    fn norm_dominates_sampled_ratios() {
        let mut rng = seeded(11);
        let a = complex_gaussian(5, 5, &mut rng);
        let norm = operator_norm(&a);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let x = complex_gaussian(5, 1, &mut rng).column(0).into_owned();
            best = best.max((&a * &x).norm() / x.norm());
        }
        assert!(best <= norm * (1.0 + 1e-12));
        // Sampling should get reasonably close from below.
        assert!(best >= 0.5 * norm);
    }
}
