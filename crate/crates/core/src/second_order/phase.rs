use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::damping::sector_constant;
use crate::error::{Error, Result};
use crate::kernel::random::{complex_gaussian, random_hermitian};
use crate::kernel::{
    check_finite, check_square, hermitian_part, identity, inverse, null_space_basis,
    operator_norm, psd_sqrt, subspace_gap, CMat, CVec, HermitianPsd, RankSplit, RANK_TOL,
};
use crate::semigroup::DissipativeOperator;

/// Tolerance for certifying `M ⪰ 0` and `Re C ⪰ 0`, relative to the norm.
const CERTIFY_TOL: f64 = 1e-10;
/// Tolerance for subspace comparisons.
const SUBSPACE_TOL: f64 = 1e-8;

/// Mass `M ⪰ 0` and accretive damping `C`, both in κ-coordinates.
#[derive(Debug, Clone)]
pub struct SecondOrderSystem {
    m: HermitianPsd,
    c: CMat,
}

pub(crate) fn certify_accretive(c: &CMat) -> Result<HermitianPsd> {
    check_square(c)?;
    check_finite(c)?;
    let scale = operator_norm(c);
    HermitianPsd::certify_with_scale(hermitian_part(c)?, CERTIFY_TOL, scale).map_err(|e| match e {
        Error::NotPsd {
            eigenvalue,
            tolerance,
        } => Error::NotAccretive {
            eigenvalue,
            tolerance,
        },
        other => other,
    })
}

impl SecondOrderSystem {
    pub fn new(m: CMat, c: CMat) -> Result<Self> {
        let m = HermitianPsd::certify(m, CERTIFY_TOL)?;
        Self::from_certified(m, c)
    }

    pub fn from_certified(m: HermitianPsd, c: CMat) -> Result<Self> {
        if c.nrows() != m.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                found: c.nrows(),
            });
        }
        certify_accretive(&c)?;
        Ok(Self { m, c })
    }

    pub fn mass(&self) -> &HermitianPsd {
        &self.m
    }

    pub fn damping(&self) -> &CMat {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// Same mass, different damping.
    pub fn with_damping(&self, c: CMat) -> Result<Self> {
        Self::from_certified(self.m.clone(), c)
    }
}

/// `[[−C, −S], [S, 0]]` for a given mass square root `S`.
pub fn aplus_matrix(sqrt_m: &CMat, c: &CMat) -> CMat {
    let n = c.nrows();
    let mut a = CMat::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&(-c));
    a.view_mut((0, n), (n, n)).copy_from(&(-sqrt_m));
    a.view_mut((n, 0), (n, n)).copy_from(sqrt_m);
    a
}

/// `𝒜⁺` together with the phase-space split and the generator on `𝒳`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceOperator {
    pub aplus: CMat,
    pub split: RankSplit,
    /// Orthogonal projector onto `𝒳`.
    pub q: CMat,
    /// `𝒜⁺` restricted to `𝒳`, in the basis `split.range_basis`.
    pub a_inv: CMat,
    /// The generator `𝒜` in the same basis.
    pub a: CMat,
    /// `‖𝒩(𝒜⁺) projector − 𝒩(𝒜⁺*) projector‖`.
    pub null_gap: f64,
    /// `‖𝒜⁺ − Q𝒜⁺Q‖ / ‖𝒜⁺‖`.
    pub block_residual: f64,
}

impl PhaseSpaceOperator {
    /// Orthonormal basis of `𝒳` as columns.
    pub fn basis(&self) -> &CMat {
        &self.split.range_basis
    }

    pub fn null_basis(&self) -> &CMat {
        &self.split.null_basis
    }

    /// `dim 𝒳`.
    pub fn phase_dim(&self) -> usize {
        self.split.rank()
    }

    /// The generator as a certified dissipative operator. Fails for `𝒳 = {0}`.
    pub fn generator(&self) -> Result<DissipativeOperator> {
        if self.phase_dim() == 0 {
            return Err(Error::InvalidArgument("phase space is trivial".into()));
        }
        generator_operator(&self.a, &self.a_inv)
    }

    /// Coordinates in the `𝒳`-basis of a full-space vector.
    pub fn restrict(&self, x: &CVec) -> CVec {
        self.basis().adjoint() * x
    }

    pub fn embed(&self, coords: &CVec) -> CVec {
        self.basis() * coords
    }

    /// `‖x − Qx‖ / ‖x‖`, zero for `x = 0`.
    pub fn phase_residual(&self, x: &CVec) -> f64 {
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (x - &self.q * x).norm() / norm
    }

    pub fn require_in_phase_space(&self, x: &CVec, tol: f64) -> Result<()> {
        let residual = self.phase_residual(x);
        if residual > tol {
            return Err(Error::NotInPhaseSpace { residual });
        }
        Ok(())
    }

    /// `e^{𝒜t}Q` on the full space.
    pub fn semigroup(&self, t: f64) -> Result<CMat> {
        let x = self.basis();
        if self.phase_dim() == 0 {
            return Ok(CMat::zeros(self.aplus.nrows(), self.aplus.nrows()));
        }
        Ok(x * crate::kernel::matrix_exp_scaled(&self.a, t)? * x.adjoint())
    }
}

/// Certifies `A = A_inv⁻¹` dissipative; the tolerance grows with the
/// conditioning of `A_inv` since `A + A*` is formed from an inverse.
pub(crate) fn generator_operator(a: &CMat, a_inv: &CMat) -> Result<DissipativeOperator> {
    let cond = operator_norm(a) * operator_norm(a_inv);
    DissipativeOperator::new(a.clone(), (1e-14 * cond).max(CERTIFY_TOL))
}

pub fn build_aplus(sys: &SecondOrderSystem) -> Result<PhaseSpaceOperator> {
    let n = sys.dim();
    let sqrt_m = psd_sqrt(sys.mass());
    let aplus = aplus_matrix(sqrt_m.matrix(), sys.damping());
    DissipativeOperator::new(aplus.clone(), CERTIFY_TOL)?;
    let split = null_space_basis(&aplus, RANK_TOL)?;
    let split_adj = null_space_basis(&aplus.adjoint(), RANK_TOL)?;
    let null_gap = if split.nullity() == split_adj.nullity() {
        subspace_gap(&split.null_basis, &split_adj.null_basis)
    } else {
        1.0
    };
    if null_gap > SUBSPACE_TOL {
        return Err(Error::Inconsistent(format!(
            "null spaces of 𝒜⁺ and its adjoint differ: gap {null_gap}"
        )));
    }
    let x = split.range_basis.clone();
    let q = &x * x.adjoint();
    let a_inv = x.adjoint() * &aplus * &x;
    let a = if split.rank() == 0 {
        CMat::zeros(0, 0)
    } else {
        inverse(&a_inv)?
    };
    let aplus_norm = operator_norm(&aplus);
    let block_residual = if aplus_norm == 0.0 {
        0.0
    } else {
        operator_norm(&(&aplus - &x * &a_inv * x.adjoint())) / aplus_norm
    };
    if block_residual > CERTIFY_TOL {
        return Err(Error::Inconsistent(format!(
            "𝒜⁺ does not split as 0 ⊕ 𝒜⁻¹: residual {block_residual}"
        )));
    }
    let op = PhaseSpaceOperator {
        aplus,
        split,
        q,
        a_inv,
        a,
        null_gap,
        block_residual,
    };
    if n > 0 && op.phase_dim() > 0 {
        op.generator()?;
    }
    Ok(op)
}

#[derive(Debug, Clone, Serialize)]
pub struct NullSpaceVerdict {
    /// `dim (𝒩(C)∩𝒩(M)) ⊕ 𝒩(M)`.
    pub formula_dim: usize,
    pub null_dim: usize,
    /// `‖(I − P_𝒩)B‖` for an orthonormal basis `B` of the formula subspace.
    pub inclusion_residual: f64,
    /// Projector distance between the two subspaces, `1` if dimensions differ.
    pub equality_gap: f64,
    pub sector_constant: f64,
    /// Equality is guaranteed for sectorial `C`.
    pub equality_expected: bool,
    pub equal: bool,
}

/// Compares `𝒩(𝒜⁺)` with `(𝒩(C)∩𝒩(M)) ⊕ 𝒩(M)`.
///
/// Inclusion must always hold and equality must hold for sectorial `C`; either
/// failure is reported as [`Error::Inconsistent`]. A strict inclusion for
/// non-sectorial `C` is a valid outcome.
pub fn null_space_formula_check(sys: &SecondOrderSystem, phase: &PhaseSpaceOperator) -> Result<NullSpaceVerdict> {
    let n = sys.dim();
    let m = sys.mass().matrix();
    let c = sys.damping();
    let mut stacked = CMat::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(c);
    stacked.view_mut((n, 0), (n, n)).copy_from(m);
    let common = null_space_basis(&stacked, RANK_TOL)?.null_basis;
    let mass_null = null_space_basis(m, RANK_TOL)?.null_basis;
    let (k1, k2) = (common.ncols(), mass_null.ncols());
    let mut formula = CMat::zeros(2 * n, k1 + k2);
    formula.view_mut((0, 0), (n, k1)).copy_from(&common);
    formula.view_mut((n, k1), (n, k2)).copy_from(&mass_null);

    let null = phase.null_basis();
    let p_null = null * null.adjoint();
    let inclusion_residual = if formula.ncols() == 0 {
        0.0
    } else {
        operator_norm(&(&formula - &p_null * &formula))
    };
    if inclusion_residual > SUBSPACE_TOL {
        return Err(Error::Inconsistent(format!(
            "(𝒩(C)∩𝒩(M)) ⊕ 𝒩(M) ⊄ 𝒩(𝒜⁺): residual {inclusion_residual}"
        )));
    }
    let equality_gap = if formula.ncols() == null.ncols() {
        subspace_gap(&formula, null)
    } else {
        1.0
    };
    let sector = sector_constant(c)?.value;
    let equality_expected = sector.is_finite();
    let equal = equality_gap <= SUBSPACE_TOL;
    if equality_expected && !equal {
        return Err(Error::Inconsistent(format!(
            "sectorial damping (N = {sector}) but 𝒩(𝒜⁺) differs from the formula: gap {equality_gap}"
        )));
    }
    Ok(NullSpaceVerdict {
        formula_dim: formula.ncols(),
        null_dim: null.ncols(),
        inclusion_residual,
        equality_gap,
        sector_constant: sector,
        equality_expected,
        equal,
    })
}

/// `‖Q(λ − 𝒜)⁻¹Q − [1/λ − λ⁻²(1/λ − 𝒜⁺)⁻¹]‖`, relative to `max(1, ‖(λ − 𝒜)⁻¹‖)`.
pub fn pseudo_resolvent_residual(phase: &PhaseSpaceOperator, lambda: Complex64) -> Result<f64> {
    if lambda.re == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "pseudo-resolvent needs Re λ ≠ 0, got {lambda}"
        )));
    }
    let dim = phase.aplus.nrows();
    let r = phase.phase_dim();
    let inv_l = lambda.inv();
    let resolvent_plus = inverse(&(identity(dim) * inv_l - &phase.aplus))?;
    let rhs = identity(dim) * inv_l - resolvent_plus * (inv_l * inv_l);
    let lhs = if r == 0 {
        CMat::zeros(dim, dim)
    } else {
        let x = phase.basis();
        x * inverse(&(identity(r) * lambda - &phase.a))? * x.adjoint()
    };
    let scale = operator_norm(&lhs).max(1.0);
    Ok(operator_norm(&(lhs - rhs)) / scale)
}

/// Skew (non-Hermitian) part of a generated damping matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Skew {
    /// `C` Hermitian.
    None,
    /// `Im C = H^{1/2} K H^{1/2}`, so the sector constant is finite.
    Sectorial,
    /// Unrestricted Hermitian `Im C`.
    Generic,
}

/// Random system with `M = GG*` of rank `mass_rank` and `Re C = FF*` of rank `damping_rank`.
pub fn random_system<R: Rng + ?Sized>(
    n: usize,
    mass_rank: usize,
    damping_rank: usize,
    skew: Skew,
    rng: &mut R,
) -> Result<SecondOrderSystem> {
    if mass_rank > n || damping_rank > n {
        return Err(Error::InvalidArgument(format!(
            "ranks ({mass_rank}, {damping_rank}) exceed dimension {n}"
        )));
    }
    let g = complex_gaussian(n, mass_rank, rng);
    let m = hermitian_part(&(&g * g.adjoint()))?;
    let f = complex_gaussian(n, damping_rank, rng);
    let h = hermitian_part(&(&f * f.adjoint()))?;
    let s = match skew {
        Skew::None => CMat::zeros(n, n),
        Skew::Sectorial => {
            let root = psd_sqrt(&HermitianPsd::certify(h.clone(), CERTIFY_TOL)?);
            let k = random_hermitian(n, rng) * Complex64::new(0.5, 0.0);
            hermitian_part(&(root.matrix() * k * root.matrix()))?
        }
        Skew::Generic => random_hermitian(n, rng),
    };
    SecondOrderSystem::new(m, h + s * Complex64::i())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::random::seeded;
    use crate::kernel::real_diagonal;

    fn system(m: &[f64], c: &[f64]) -> SecondOrderSystem {
        SecondOrderSystem::new(real_diagonal(m), real_diagonal(c)).unwrap()
    }

    #[test]
    fn rejects_invalid_systems() {
        assert!(matches!(
            SecondOrderSystem::new(real_diagonal(&[-1.0]), real_diagonal(&[0.0])),
            Err(Error::NotPsd { .. })
        ));
        assert!(matches!(
            SecondOrderSystem::new(real_diagonal(&[1.0]), real_diagonal(&[-1.0])),
            Err(Error::NotAccretive { .. })
        ));
    }

    #[test]
    fn rotation_block() {
        let phase = build_aplus(&system(&[1.0, 1.0], &[0.0, 0.0])).unwrap();
        assert_eq!(phase.phase_dim(), 4);
        let expected_aplus = {
            let mut a = CMat::zeros(4, 4);
            a[(0, 2)] = (-1.0).into();
            a[(1, 3)] = (-1.0).into();
            a[(2, 0)] = 1.0.into();
            a[(3, 1)] = 1.0.into();
            a
        };
        assert_eq!(phase.aplus, expected_aplus);
        // 𝒜 = (𝒜⁺)⁻¹ = −𝒜⁺ since (𝒜⁺)² = −I.
        let full_a = phase.basis() * &phase.a * phase.basis().adjoint();
        assert!(operator_norm(&(full_a + &expected_aplus)) < 1e-14);
    }

    #[test]
    fn fully_degenerate() {
        let phase = build_aplus(&system(&[0.0], &[0.0])).unwrap();
        assert_eq!(phase.phase_dim(), 0);
        assert_eq!(phase.split.nullity(), 2);
        assert!(phase.generator().is_err());
        let r = pseudo_resolvent_residual(&phase, 1.0.into()).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn explicit_null_space() {
        let sys = system(&[1.0, 0.0], &[0.0, 1.0]);
        let phase = build_aplus(&sys).unwrap();
        assert_eq!(phase.split.nullity(), 1);
        let e4 = CMat::from_fn(4, 1, |i, _| if i == 3 { 1.0.into() } else { 0.0.into() });
        assert!(subspace_gap(phase.null_basis(), &e4) < 1e-12);
        let v = null_space_formula_check(&sys, &phase).unwrap();
        assert!(v.equal && v.formula_dim == 1);
    }

    #[test]
    fn formula_trivial_cases() {
        let sys = system(&[1.0, 2.0], &[0.5, 0.0]);
        let v = null_space_formula_check(&sys, &build_aplus(&sys).unwrap()).unwrap();
        assert!(v.equal && v.null_dim == 0 && v.formula_dim == 0);
    }

    #[test]
    fn hermitian_defect_identity() {
        let mut rng = seeded(11);
        let sys = random_system(4, 2, 3, Skew::Generic, &mut rng).unwrap();
        let phase = build_aplus(&sys).unwrap();
        let defect = hermitian_part(&(-&phase.aplus)).unwrap();
        let hc = hermitian_part(sys.damping()).unwrap();
        let mut expected = CMat::zeros(8, 8);
        expected.view_mut((0, 0), (4, 4)).copy_from(&hc);
        assert_eq!(defect, expected);
    }

    #[test]
    fn pseudo_resolvent_examples() {
        let phase = build_aplus(&system(&[1.0, 1.0], &[1.0, 1.0])).unwrap();
        assert!(pseudo_resolvent_residual(&phase, 1.0.into()).unwrap() <= 1e-8);
        assert!(pseudo_resolvent_residual(&phase, Complex64::new(0.0, 1.0)).is_err());
        let mut rng = seeded(12);
        for skew in [Skew::None, Skew::Sectorial, Skew::Generic] {
            let sys = random_system(5, 3, 2, skew, &mut rng).unwrap();
            let phase = build_aplus(&sys).unwrap();
            for l in [Complex64::new(2.0, 1.0), Complex64::new(-3.0, 0.0)] {
                assert!(pseudo_resolvent_residual(&phase, l).unwrap() <= 1e-8);
            }
        }
    }

    #[test]
    fn random_sectorial_formula_equality() {
        let mut rng = seeded(13);
        for _ in 0..10 {
            let sys = random_system(5, 2, 2, Skew::Sectorial, &mut rng).unwrap();
            let v = null_space_formula_check(&sys, &build_aplus(&sys).unwrap()).unwrap();
            assert!(v.equality_expected && v.equal, "{v:?}");
        }
    }
}
