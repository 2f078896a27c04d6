//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection and thresholds follow Higham (2005), "The scaling and
//! squaring method for the matrix exponential revisited".

use num_complex::Complex64;

use super::dense::{check_finite, check_square, identity, CMat};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm thresholds below which the degree-m approximant is accurate to unit roundoff.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

fn one_norm(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_identity(n: usize, s: f64) -> CMat {
    identity(n) * Complex64::new(s, 0.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Returns `(U, V)` with `r_m(A) = (V − U)^{-1}(V + U)` for the low degrees.
fn pade_low(a: &CMat, coeffs: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut even = scaled_identity(n, coeffs[0]);
    let mut odd = scaled_identity(n, coeffs[1]);
    let mut power = identity(n);
    for k in 1..coeffs.len() / 2 {
        power = &power * &a2;
        even += &power * real(coeffs[2 * k]);
        odd += &power * real(coeffs[2 * k + 1]);
    }
    (a * odd, even)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let b = &PADE13;
    let n = a.nrows();
    let ident = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u = a * (&a6 * inner_u
        + &a6 * real(b[7])
        + &a4 * real(b[5])
        + &a2 * real(b[3])
        + &ident * real(b[1]));
    let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + ident * real(b[0]);
    (u, v)
}

/// `e^{A}` for a square matrix.
///
/// Non-finite input is rejected and a non-finite result is reported as
/// [`Error::Overflow`] rather than returned.
pub fn matrix_exp(a: &CMat) -> Result<CMat> {
    let n = check_square(a)?;
    check_finite(a)?;
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let (u, v, squarings) = if norm <= THETA3 {
        let (u, v) = pade_low(a, &PADE3);
        (u, v, 0)
    } else if norm <= THETA5 {
        let (u, v) = pade_low(a, &PADE5);
        (u, v, 0)
    } else if norm <= THETA7 {
        let (u, v) = pade_low(a, &PADE7);
        (u, v, 0)
    } else if norm <= THETA9 {
        let (u, v) = pade_low(a, &PADE9);
        (u, v, 0)
    } else {
        let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let scaled = a * real(2f64.powi(-s));
        let (u, v) = pade13(&scaled);
        (u, v, s)
    };
    let denom = &v - &u;
    let numer = &v + &u;
    let lu = denom.lu();
    let mut r = lu.solve(&numer).ok_or(Error::Overflow { norm })?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !super::dense::is_finite(&r) {
        return Err(Error::Overflow { norm });
    }
    Ok(r)
}

/// `e^{tA}`.
pub fn matrix_exp_scaled(a: &CMat, t: f64) -> Result<CMat> {
    if !t.is_finite() {
        return Err(Error::NonFinite);
    }
    matrix_exp(&(a * real(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::dense::{operator_norm, zeros, CVec};
    use crate::kernel::random::{complex_gaussian, random_dissipative, seeded};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel_err(a: &CMat, b: &CMat) -> f64 {
        operator_norm(&(a - b)) / operator_norm(b).max(f64::MIN_POSITIVE)
    }

    /// Independent reference: classical RK4 on X' = AX with a fixed fine step,
    /// followed by Richardson extrapolation on two step sizes.
    fn rk4_reference(a: &CMat, steps: usize) -> CMat {
        let run = |steps: usize| {
            let h = real(1.0 / steps as f64);
            let mut x = identity(a.nrows());
            for _ in 0..steps {
                let k1 = a * &x;
                let k2 = a * (&x + &k1 * (h * 0.5));
                let k3 = a * (&x + &k2 * (h * 0.5));
                let k4 = a * (&x + &k3 * h);
                x += (k1 + k2 * real(2.0) + k3 * real(2.0) + k4) * (h / 6.0);
            }
            x
        };
        let coarse = run(steps);
        let fine = run(2 * steps);
        // RK4 is 4th order: (16·fine − coarse)/15 cancels the leading term.
        (fine * real(16.0) - coarse) * real(1.0 / 15.0)
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(matrix_exp(&zeros(3, 3)).unwrap(), identity(3));
    }

    #[test]
    fn diagonal_case() {
        let d = [c(-1.0, 0.0), c(0.5, 2.0), c(3.0, -1.0)];
        let a = CMat::from_diagonal(&CVec::from_row_slice(&d));
        let e = matrix_exp(&a).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - d[i].exp()).norm() <= 1e-13 * d[i].exp().norm());
        }
        assert!((e[(0, 1)]).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let expected =
            CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(rel_err(&matrix_exp(&a).unwrap(), &expected) < 1e-15);
    }

    #[test]
    fn matches_ode_reference() {
        let mut rng = seeded(3);
        for scale in [0.01, 0.3, 1.0, 3.0] {
            let a = complex_gaussian(5, 5, &mut rng) * real(scale);
            let reference = rk4_reference(&a, 4000);
            let e = matrix_exp(&a).unwrap();
            let err = rel_err(&e, &reference);
            assert!(err <= 1e-12, "scale {scale}: rel err {err:e}");
        }
    }

    #[test]
    fn exp_of_negation_is_inverse() {
        let mut rng = seeded(5);
        let a = complex_gaussian(6, 6, &mut rng);
        let a = &a * real(10.0 / operator_norm(&a));
        let prod = matrix_exp(&a).unwrap() * matrix_exp(&(-&a)).unwrap();
        assert!(operator_norm(&(prod - identity(6))) <= 1e-10);
    }

    #[test]
    fn semigroup_law() {
        let mut rng = seeded(9);
        let a = random_dissipative(6, &mut rng);
        let (s, t) = (0.7, 2.3);
        let lhs = matrix_exp_scaled(&a, s + t).unwrap();
        let rhs = matrix_exp_scaled(&a, s).unwrap() * matrix_exp_scaled(&a, t).unwrap();
        assert!(operator_norm(&(lhs - rhs)) <= 1e-10);
    }

    #[test]
    fn dissipative_generators_give_contractions() {
        let mut rng = seeded(13);
        for _ in 0..10 {
            let a = random_dissipative(5, &mut rng);
            for t in [0.0, 0.01, 0.5, 3.0, 50.0, 1e4] {
                let norm = operator_norm(&matrix_exp_scaled(&a, t).unwrap());
                assert!(norm <= 1.0 + 1e-10, "t = {t}: {norm}");
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let a = CMat::from_diagonal(&CVec::from_row_slice(&[c(800.0, 0.0), c(1.0, 0.0)]));
        assert!(matches!(matrix_exp(&a), Err(Error::Overflow { .. })));
        let bad = CMat::from_diagonal(&CVec::from_row_slice(&[c(f64::NAN, 0.0)]));
        assert!(matches!(matrix_exp(&bad), Err(Error::NonFinite)));
    }
}
