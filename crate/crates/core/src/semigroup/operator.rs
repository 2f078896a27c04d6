use serde::Serialize;

use super::constant::{relative_constant, RangeViolation, RelativeConstant};
use crate::error::{Error, Result};
use crate::kernel::{
    check_finite, check_square, hermitian_part, inner, inverse, matrix_exp_scaled, operator_norm,
    random::{complex_gaussian_vec, seeded},
    CMat, CVec, HermitianPsd,
};

/// Relative tolerance for dissipativity certification.
pub const DISSIPATIVITY_TOL: f64 = 1e-10;

/// A square matrix `A` with certified `H_A = −(A + A*)/2 ⪰ 0`.
#[derive(Debug, Clone)]
pub struct DissipativeOperator {
    a: CMat,
    defect: HermitianPsd,
    margin: f64,
    norm: f64,
}

impl DissipativeOperator {
    pub fn new(a: CMat, tol: f64) -> Result<Self> {
        check_square(&a)?;
        check_finite(&a)?;
        let norm = operator_norm(&a);
        let h = hermitian_part(&(-&a))?;
        let defect = HermitianPsd::certify_with_scale(h, tol, norm).map_err(|e| match e {
            Error::NotPsd {
                eigenvalue,
                tolerance,
            } => Error::NotDissipative {
                eigenvalue,
                tolerance,
            },
            other => other,
        })?;
        let margin = defect.min_eigenvalue();
        Ok(Self {
            a,
            defect,
            margin,
            norm,
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.a
    }

    /// `H_A = −(A + A*)/2`.
    pub fn defect(&self) -> &HermitianPsd {
        &self.defect
    }

    /// Smallest eigenvalue of the Hermitian defect.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `A*`, which shares the Hermitian defect of `A`.
    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.adjoint(),
            defect: self.defect.clone(),
            margin: self.margin,
            norm: self.norm,
        }
    }

    /// `A⁻¹`, again dissipative: `H_{A⁻¹} = A^{-*} H_A A^{-1}`.
    pub fn inverse(&self) -> Result<Self> {
        Self::new(inverse(&self.a)?, DISSIPATIVITY_TOL)
    }

    pub fn exp(&self, t: f64) -> Result<CMat> {
        matrix_exp_scaled(&self.a, t)
    }

    /// `Re(−Ay, y) = (H_A y, y)`.
    pub fn dissipation(&self, y: &CVec) -> f64 {
        inner(&(self.defect.matrix() * y), y).re
    }
}

pub fn make_dissipative(a: CMat, tol: f64) -> Result<DissipativeOperator> {
    DissipativeOperator::new(a, tol)
}

/// The perturbation constant of an ordered pair together with its dual.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonMin {
    /// Least `ε` with `|(x,(B−A)y)|² ≤ ε²(H_B x,x)(H_A y,y)`; `+∞` if none exists.
    pub epsilon: f64,
    pub range_compatible: bool,
    /// Least `ε` with `|((B−A)x,y)|² ≤ ε²(H_B x,x)(H_A y,y)`.
    pub dual_epsilon: f64,
    pub violation: Option<RangeViolation>,
    /// Eigenvalues of `H_A` and `H_B` treated as zero.
    pub discarded_a: Vec<f64>,
    pub discarded_b: Vec<f64>,
}

impl EpsilonMin {
    pub fn is_finite(&self) -> bool {
        self.epsilon.is_finite()
    }
}

fn check_same_dim(a: &DissipativeOperator, b: &DissipativeOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Perturbation constant of the pair `(A, B)`.
pub fn epsilon_min(a: &DissipativeOperator, b: &DissipativeOperator) -> Result<EpsilonMin> {
    check_same_dim(a, b)?;
    let delta = b.matrix() - a.matrix();
    let scale = a.norm().max(b.norm());
    let primal: RelativeConstant = relative_constant(b.defect(), &delta, a.defect(), scale);
    let dual = relative_constant(a.defect(), &delta, b.defect(), scale);
    Ok(EpsilonMin {
        epsilon: primal.value,
        range_compatible: primal.range_compatible,
        dual_epsilon: dual.value,
        violation: primal.violation,
        discarded_a: primal.right_discarded,
        discarded_b: primal.left_discarded,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointwiseCheck {
    pub max_ratio: f64,
    pub epsilon_sq: f64,
    pub holds: bool,
    pub samples: usize,
}

/// Monte-Carlo cross-check of the defining inequality of [`epsilon_min`].
///
/// Samples with a vanishing denominator contribute only if the numerator does
/// not vanish, in which case the ratio is `+∞`.
pub fn verify_pointwise(
    a: &DissipativeOperator,
    b: &DissipativeOperator,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<PointwiseCheck> {
    check_same_dim(a, b)?;
    if !epsilon.is_finite() {
        return Err(Error::Precondition("pointwise check needs a finite ε".into()));
    }
    let n = a.dim();
    let delta = b.matrix() - a.matrix();
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let mut rng = seeded(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..sample_count {
        let x = complex_gaussian_vec(n, &mut rng);
        let y = complex_gaussian_vec(n, &mut rng);
        let num = inner(&x, &(&delta * &y)).norm_sqr();
        let den = b.dissipation(&x) * a.dissipation(&y);
        let floor = (1e-14 * scale * x.norm() * y.norm()).powi(2);
        let ratio = if den > floor {
            num / den
        } else if num <= floor {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
    }
    let epsilon_sq = epsilon * epsilon;
    Ok(PointwiseCheck {
        max_ratio,
        epsilon_sq,
        holds: max_ratio <= epsilon_sq + 1e-8,
        samples: sample_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::kernel::random::{random_dissipative, seeded};
    use crate::kernel::{identity, real_diagonal, skew_part};

    fn scalar(v: f64) -> DissipativeOperator {
        make_dissipative(real_diagonal(&[v]), DISSIPATIVITY_TOL).unwrap()
    }

    #[test]
    fn operators_are_shareable() {
        fn check<T: Send + Sync>() {}
        check::<DissipativeOperator>();
    }

    #[test]
    fn margins() {
        let neg = make_dissipative(-identity(3), DISSIPATIVITY_TOL).unwrap();
        assert!((neg.margin() - 1.0).abs() < 1e-15);
        let mut rng = seeded(2);
        let s = skew_part(&crate::kernel::random::complex_gaussian(4, 4, &mut rng)).unwrap();
        let skew = make_dissipative(s, DISSIPATIVITY_TOL).unwrap();
        assert_eq!(skew.margin(), 0.0);
        assert!(matches!(
            make_dissipative(identity(2), DISSIPATIVITY_TOL),
            Err(Error::NotDissipative { .. })
        ));
    }

    #[test]
    fn epsilon_of_identical_pair_is_zero() {
        let mut rng = seeded(3);
        let a = make_dissipative(random_dissipative(5, &mut rng), DISSIPATIVITY_TOL).unwrap();
        let e = epsilon_min(&a, &a).unwrap();
        assert_eq!(e.epsilon, 0.0);
        assert!(e.range_compatible);
    }

    #[test]
    fn scalar_pair() {
        let e = epsilon_min(&scalar(-1.0), &scalar(-2.0)).unwrap();
        assert!((e.epsilon - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((e.dual_epsilon - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn constant_is_symmetric_in_the_pair() {
        let mut rng = seeded(4);
        for _ in 0..20 {
            let a = make_dissipative(random_dissipative(4, &mut rng), DISSIPATIVITY_TOL).unwrap();
            let b = make_dissipative(random_dissipative(4, &mut rng), DISSIPATIVITY_TOL).unwrap();
            let ab = epsilon_min(&a, &b).unwrap();
            let ba = epsilon_min(&b, &a).unwrap();
            let tol = 1e-9 * ab.epsilon.max(1.0);
            assert!((ab.epsilon - ab.dual_epsilon).abs() < tol);
            assert!((ab.epsilon - ba.epsilon).abs() < tol);
        }
    }

    #[test]
    fn skew_generator_with_perturbation_is_infinite() {
        let i = Complex64::new(0.0, 1.0);
        let a = real_diagonal(&[1.0, 2.0]) * i;
        let mut b = a.clone();
        b[(0, 1)] += Complex64::new(0.3, 0.0);
        b[(1, 0)] -= Complex64::new(0.3, 0.0);
        let a = make_dissipative(a, DISSIPATIVITY_TOL).unwrap();
        let b = make_dissipative(b, DISSIPATIVITY_TOL).unwrap();
        let e = epsilon_min(&a, &b).unwrap();
        assert!(e.epsilon.is_infinite());
        assert!(!e.range_compatible);
        assert!(e.violation.is_some());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            epsilon_min(&scalar(-1.0), &make_dissipative(-identity(2), 1e-10).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pointwise_scalar_ratio_is_constant() {
        let check = verify_pointwise(&scalar(-1.0), &scalar(-2.0), 0.5f64.sqrt(), 200, 1).unwrap();
        assert!((check.max_ratio - 0.5).abs() < 1e-12);
        assert!(check.holds);
        let a = scalar(-1.0);
        assert_eq!(verify_pointwise(&a, &a, 0.0, 50, 1).unwrap().max_ratio, 0.0);
    }

    #[test]
    fn pointwise_sampling_never_exceeds_epsilon() {
        let mut rng = seeded(17);
        for _ in 0..10 {
            let a = make_dissipative(random_dissipative(6, &mut rng), DISSIPATIVITY_TOL).unwrap();
            let b = make_dissipative(random_dissipative(6, &mut rng), DISSIPATIVITY_TOL).unwrap();
            let e = epsilon_min(&a, &b).unwrap();
            let check = verify_pointwise(&a, &b, e.epsilon, 2000, 5).unwrap();
            assert!(check.holds, "{check:?}");
            assert!(check.max_ratio > 0.0);
        }
    }

    #[test]
    fn inverse_is_dissipative() {
        let mut rng = seeded(19);
        let a = make_dissipative(random_dissipative(4, &mut rng), DISSIPATIVITY_TOL).unwrap();
        let inv = a.inverse().unwrap();
        assert!(inv.margin() >= -1e-10 * inv.norm());
    }
}
