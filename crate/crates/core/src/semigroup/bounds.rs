use rayon::prelude::*;
use serde::Serialize;

use super::operator::{epsilon_min, DissipativeOperator};
use super::stability::is_exponentially_stable;
use crate::error::{Error, Result};
use crate::kernel::{inner, matrix_exp_scaled, operator_norm, CMat, CVec, HermitianPsd};

/// Absolute slack added to every semigroup-difference bound.
pub const BOUND_SLACK: f64 = 1e-8;

/// `points` log-spaced times on `[start, end]`, optionally preceded by `t = 0`.
pub fn log_grid(start: f64, end: f64, points: usize, include_zero: bool) -> Vec<f64> {
    let mut grid = Vec::with_capacity(points + 1);
    if include_zero {
        grid.push(0.0);
    }
    let (l0, l1) = (start.ln(), end.ln());
    for k in 0..points {
        let frac = if points > 1 { k as f64 / (points - 1) as f64 } else { 0.0 };
        grid.push((l0 + frac * (l1 - l0)).exp());
    }
    grid
}

/// `t = 0` plus 256 log-spaced points on `[1e−3, 50]`.
pub fn standard_t_grid() -> Vec<f64> {
    log_grid(1e-3, 50.0, 256, true)
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("time grid must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `(t, ‖e^{Bt} − e^{At}‖)` on the grid. Points are evaluated independently in
/// parallel; each value is identical to a serial evaluation.
pub fn diff_norm_curve(a: &CMat, b: &CMat, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    validate_grid(t_grid)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    t_grid
        .par_iter()
        .map(|&t| {
            let diff = matrix_exp_scaled(b, t)? - matrix_exp_scaled(a, t)?;
            Ok((t, operator_norm(&diff)))
        })
        .collect()
}

/// Outcome of a uniform-bound verification for one pair.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub dim: usize,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub range_compatible: bool,
    pub sup_diff_norm: f64,
    pub t_at_sup: f64,
    /// `sup_diff_norm / (ε/2)`; for `ε = 0` this is `0` when the sup is within
    /// [`BOUND_SLACK`].
    pub bound_ratio: f64,
    pub dual_epsilon: f64,
    pub stable_a: bool,
    pub stable_b: bool,
}

impl PerturbationReport {
    pub const CSV_HEADER: &'static str =
        "dim,seed,epsilon,sup_diff,t_at_sup,ratio,dual_epsilon,stable_A,stable_B";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dim,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.epsilon,
            self.sup_diff_norm,
            self.t_at_sup,
            self.bound_ratio,
            self.dual_epsilon,
            self.stable_a,
            self.stable_b
        )
    }
}

/// Largest `(t, value)` of a curve.
pub fn sup_of(curve: &[(f64, f64)]) -> (f64, f64) {
    curve
        .iter()
        .fold((0.0, 0.0), |(tb, vb), &(t, v)| if v > vb { (t, v) } else { (tb, vb) })
}

/// `sup / bound`, with `0/0` read as `0` when `sup` is below [`BOUND_SLACK`].
pub fn bound_ratio(sup: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        sup / bound
    } else if sup <= BOUND_SLACK {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Checks `sup_t ‖e^{Bt} − e^{At}‖ ≤ ε/2` on the grid.
///
/// A violation is returned as [`Error::BoundViolation`]; for correct inputs it
/// indicates a numerical defect, never an expected outcome.
pub fn verify_uniform_bound(
    a: &DissipativeOperator,
    b: &DissipativeOperator,
    t_grid: &[f64],
) -> Result<PerturbationReport> {
    let eps = epsilon_min(a, b)?;
    if !eps.is_finite() {
        return Err(Error::Precondition(
            "ε is infinite (ranges incompatible); no uniform bound applies".into(),
        ));
    }
    let curve = diff_norm_curve(a.matrix(), b.matrix(), t_grid)?;
    let (t_at_sup, sup) = sup_of(&curve);
    let bound = eps.epsilon / 2.0;
    if sup > bound + BOUND_SLACK {
        return Err(Error::BoundViolation {
            what: "uniform semigroup bound",
            at: t_at_sup,
            measured: sup,
            bound,
        });
    }
    Ok(PerturbationReport {
        dim: a.dim(),
        seed: None,
        epsilon: eps.epsilon,
        range_compatible: eps.range_compatible,
        sup_diff_norm: sup,
        t_at_sup,
        bound_ratio: bound_ratio(sup, eps.epsilon / 2.0),
        dual_epsilon: eps.dual_epsilon,
        stable_a: is_exponentially_stable(a.matrix())?.stable,
        stable_b: is_exponentially_stable(b.matrix())?.stable,
    })
}

/// Doubling-horizon stopping rule for `lim_{t→∞} e^{A*t} e^{At}`.
#[derive(Debug, Clone, Copy)]
pub struct HorizonPolicy {
    /// First horizon, in units of `1/‖A‖`.
    pub start: f64,
    pub max_doublings: u32,
    pub tol: f64,
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        Self {
            start: 1.0,
            max_doublings: 50,
            tol: 1e-8,
        }
    }
}

/// `P(A) = lim e^{A*t} e^{At}`, approximated at a finite horizon.
#[derive(Debug, Clone)]
pub struct LimitOperator {
    pub p: CMat,
    /// Horizon `t` whose doubling changed the product by `residual`; `p` is the
    /// product at `2t`.
    pub converged_at_t: f64,
    pub residual: f64,
    pub converged: bool,
}

impl LimitOperator {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "limit operator",
                horizon: self.converged_at_t,
                residual: self.residual,
            })
        }
    }

    /// `(P y, y)`.
    pub fn form(&self, y: &CVec) -> f64 {
        inner(&(&self.p * y), y).re
    }
}

fn gram(a: &CMat, t: f64) -> Result<CMat> {
    let e = matrix_exp_scaled(a, t)?;
    Ok(e.adjoint() * e)
}

pub fn limit_operator(a: &DissipativeOperator, policy: HorizonPolicy) -> Result<LimitOperator> {
    let unit = if a.norm() > 0.0 { 1.0 / a.norm() } else { 1.0 };
    let mut t = policy.start * unit;
    let mut current = gram(a.matrix(), t)?;
    let mut residual = f64::INFINITY;
    for _ in 0..policy.max_doublings {
        let next = gram(a.matrix(), 2.0 * t)?;
        residual = operator_norm(&(&next - &current));
        current = next;
        if residual <= policy.tol {
            // Certify 0 ⪯ P ⪯ I.
            let herm = HermitianPsd::certify_with_scale(
                crate::kernel::hermitian_part(&current)?,
                1e-8,
                1.0,
            )?;
            if herm.max_eigenvalue() > 1.0 + 1e-8 {
                return Err(Error::Inconsistent(format!(
                    "limit operator exceeds identity: λ_max = {}",
                    herm.max_eigenvalue()
                )));
            }
            return Ok(LimitOperator {
                p: current,
                converged_at_t: t,
                residual,
                converged: true,
            });
        }
        t *= 2.0;
    }
    Ok(LimitOperator {
        p: current,
        converged_at_t: t,
        residual,
        converged: false,
    })
}

/// One evaluation of the refined (weak, limit-weighted) bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RefinedCheck {
    /// `|(x, (e^{Bt} − e^{At})y)|²`
    pub lhs: f64,
    /// `(ε²/4)·((x,x) − (P(B*)x,x))·((y,y) − (P(A)y,y))`
    pub rhs: f64,
    /// `(ε²/4)·‖x‖²‖y‖²`
    pub outer: f64,
    pub holds: bool,
}

/// Pair data needed to evaluate the refined bound at many `(x, y, t)`.
#[derive(Debug, Clone)]
pub struct RefinedBound {
    a: CMat,
    b: CMat,
    pub epsilon: f64,
    pub p_a: LimitOperator,
    pub p_b_adjoint: LimitOperator,
}

impl RefinedBound {
    pub fn new(a: &DissipativeOperator, b: &DissipativeOperator, policy: HorizonPolicy) -> Result<Self> {
        let eps = epsilon_min(a, b)?;
        if !eps.is_finite() {
            return Err(Error::Precondition("refined bound needs a finite ε".into()));
        }
        let p_a = limit_operator(a, policy)?.require_converged()?;
        let p_b_adjoint = limit_operator(&b.adjoint(), policy)?.require_converged()?;
        Ok(Self {
            a: a.matrix().clone(),
            b: b.matrix().clone(),
            epsilon: eps.epsilon,
            p_a,
            p_b_adjoint,
        })
    }

    pub fn check(&self, x: &CVec, y: &CVec, t: f64) -> Result<RefinedCheck> {
        let diff = matrix_exp_scaled(&self.b, t)? - matrix_exp_scaled(&self.a, t)?;
        let lhs = inner(x, &(diff * y)).norm_sqr();
        let xx = x.norm_squared();
        let yy = y.norm_squared();
        let quarter = self.epsilon * self.epsilon / 4.0;
        let rhs = quarter * (xx - self.p_b_adjoint.form(x)) * (yy - self.p_a.form(y));
        Ok(RefinedCheck {
            lhs,
            rhs,
            outer: quarter * xx * yy,
            holds: lhs <= rhs + BOUND_SLACK,
        })
    }
}

/// Returns `(lhs, rhs)` of the refined bound at a single `(x, y, t)`.
pub fn verify_refined_bound(
    a: &DissipativeOperator,
    b: &DissipativeOperator,
    x: &CVec,
    y: &CVec,
    t: f64,
) -> Result<(f64, f64)> {
    let refined = RefinedBound::new(a, b, HorizonPolicy::default())?;
    let check = refined.check(x, y, t)?;
    if !check.holds {
        return Err(Error::BoundViolation {
            what: "refined weak bound",
            at: t,
            measured: check.lhs,
            bound: check.rhs,
        });
    }
    Ok((check.lhs, check.rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::random::{complex_gaussian_vec, random_dissipative, seeded};
    use crate::kernel::{identity, real_diagonal, skew_part, CMat};
    use crate::semigroup::{make_dissipative, DISSIPATIVITY_TOL};
    use num_complex::Complex64;

    fn op(m: CMat) -> DissipativeOperator {
        make_dissipative(m, DISSIPATIVITY_TOL).unwrap()
    }

    #[test]
    fn standard_grid_shape() {
        let g = standard_t_grid();
        assert_eq!(g.len(), 257);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-15 && (g[256] - 50.0).abs() < 1e-12);
        validate_grid(&g).unwrap();
        assert!(validate_grid(&[0.0, 1.0, 1.0]).is_err());
        assert!(validate_grid(&[-1.0]).is_err());
    }

    #[test]
    fn scalar_curve_peaks_at_ln2() {
        // max_t e^{-t} − e^{-2t} = 1/4 at t = ln 2
        let a = real_diagonal(&[-1.0]);
        let b = real_diagonal(&[-2.0]);
        let ln2 = std::f64::consts::LN_2;
        let curve = diff_norm_curve(&a, &b, &[0.0, 0.5, ln2, 1.0, 3.0]).unwrap();
        assert_eq!(curve[0].1, 0.0);
        assert!((curve[2].1 - 0.25).abs() < 1e-15);
        assert!(curve.iter().all(|&(_, v)| v <= 0.25 + 1e-15));
    }

    #[test]
    fn identical_pair_curve_is_zero() {
        let mut rng = seeded(4);
        let a = random_dissipative(4, &mut rng);
        let curve = diff_norm_curve(&a, &a, &standard_t_grid()).unwrap();
        assert!(curve.iter().all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn parallel_curve_matches_serial() {
        let mut rng = seeded(6);
        let a = random_dissipative(5, &mut rng);
        let b = random_dissipative(5, &mut rng);
        let grid = standard_t_grid();
        let par = diff_norm_curve(&a, &b, &grid).unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let d = matrix_exp_scaled(&b, t).unwrap() - matrix_exp_scaled(&a, t).unwrap();
            assert_eq!(par[k].1.to_bits(), operator_norm(&d).to_bits());
        }
    }

    #[test]
    fn uniform_bound_scalar_and_identical() {
        let rep = verify_uniform_bound(&op(real_diagonal(&[-1.0])), &op(real_diagonal(&[-2.0])), &standard_t_grid()).unwrap();
        assert!(rep.sup_diff_norm <= 0.25 + 1e-12);
        assert!(rep.sup_diff_norm > 0.249);
        assert!(rep.bound_ratio <= 1.0);
        assert!(rep.stable_a && rep.stable_b);

        let mut rng = seeded(8);
        let a = op(random_dissipative(3, &mut rng));
        let rep = verify_uniform_bound(&a, &a, &standard_t_grid()).unwrap();
        assert_eq!(rep.sup_diff_norm, 0.0);
        assert_eq!(rep.epsilon, 0.0);
        assert_eq!(rep.bound_ratio, 0.0);
    }

    #[test]
    fn uniform_bound_rejects_infinite_epsilon() {
        let a = op(real_diagonal(&[0.0, 0.0]));
        let b = op(real_diagonal(&[-1.0, 0.0]));
        assert!(matches!(
            verify_uniform_bound(&a, &b, &standard_t_grid()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn limit_operator_examples() {
        let p = limit_operator(&op(-identity(2)), HorizonPolicy::default()).unwrap();
        assert!(p.converged && operator_norm(&p.p) < 1e-8);

        let mut rng = seeded(10);
        let s = skew_part(&crate::kernel::random::complex_gaussian(3, 3, &mut rng)).unwrap();
        let p = limit_operator(&op(s), HorizonPolicy::default()).unwrap();
        assert!(p.converged && operator_norm(&(p.p - identity(3))) < 1e-8);

        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]));
        let p = limit_operator(&op(d), HorizonPolicy::default()).unwrap();
        assert!(p.converged);
        assert!(operator_norm(&(p.p - real_diagonal(&[0.0, 1.0]))) < 1e-8);
    }

    #[test]
    fn limit_operator_reports_non_convergence() {
        let slow = op(real_diagonal(&[-1e-6, -1.0]));
        let policy = HorizonPolicy {
            max_doublings: 3,
            ..HorizonPolicy::default()
        };
        let p = limit_operator(&slow, policy).unwrap();
        assert!(!p.converged);
        assert!(matches!(p.require_converged(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn refined_bound_scalar() {
        let a = op(real_diagonal(&[-1.0]));
        let b = op(real_diagonal(&[-2.0]));
        let one = CVec::from_element(1, Complex64::new(1.0, 0.0));
        let (lhs, rhs) = verify_refined_bound(&a, &b, &one, &one, std::f64::consts::LN_2).unwrap();
        assert!((lhs - 1.0 / 16.0).abs() < 1e-14);
        assert!((rhs - 1.0 / 8.0).abs() < 1e-8);
    }

    #[test]
    fn refined_bound_skew_identical() {
        let mut rng = seeded(12);
        let s = op(skew_part(&crate::kernel::random::complex_gaussian(3, 3, &mut rng)).unwrap());
        let x = complex_gaussian_vec(3, &mut rng);
        let y = complex_gaussian_vec(3, &mut rng);
        let (lhs, rhs) = verify_refined_bound(&s, &s, &x, &y, 2.0).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn refined_rhs_below_outer() {
        let mut rng = seeded(14);
        let a = op(random_dissipative(4, &mut rng));
        let b = op(random_dissipative(4, &mut rng));
        let refined = RefinedBound::new(&a, &b, HorizonPolicy::default()).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let x = complex_gaussian_vec(4, &mut rng);
            let y = complex_gaussian_vec(4, &mut rng);
            let c = refined.check(&x, &y, t).unwrap();
            assert!(c.holds);
            assert!(c.rhs <= c.outer * (1.0 + 1e-12));
        }
    }
}
