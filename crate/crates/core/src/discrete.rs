//! Discrete semigroups: powers of contractions.
//!
//! For contractions `A`, `B` the least `ε` with
//!
//! ```text
//! |((B − A)x, y)|² ≤ ε² · ((I − B*B)x, x) · ((I − AA*)y, y)
//! ```
//!
//! bounds every power difference: `‖Bⁿ − Aⁿ‖ ≤ ε·√(‖I − Q(A*)‖·‖I − Q(B)‖) ≤ ε`,
//! where `Q(T) = lim T*ⁿTⁿ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::random::{complex_gaussian_vec, seeded};
use crate::kernel::{
    check_finite, check_square, hermitian_part, identity, inner, operator_norm, psd_sqrt,
    spectral_radius, CMat, HermitianPsd,
};
use crate::semigroup::{relative_constant, RangeViolation, BOUND_SLACK};

/// Relative tolerance for `‖T‖ ≤ 1`.
pub const CONTRACTION_TOL: f64 = 1e-10;

/// A square matrix certified `‖T‖ ≤ 1 + tol`. Inputs above are rejected, never rescaled.
#[derive(Debug, Clone)]
pub struct Contraction {
    t: CMat,
    norm: f64,
}

impl Contraction {
    pub fn new(t: CMat, tol: f64) -> Result<Self> {
        check_square(&t)?;
        check_finite(&t)?;
        let norm = operator_norm(&t);
        if norm > 1.0 + tol {
            return Err(Error::NotContraction {
                norm,
                tolerance: tol,
            });
        }
        Ok(Self { t, norm })
    }

    pub fn matrix(&self) -> &CMat {
        &self.t
    }

    /// The certified norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            t: self.t.adjoint(),
            norm: self.norm,
        }
    }
}

fn defect(m: CMat) -> Result<HermitianPsd> {
    // ‖T‖ ≤ 1 + 1e−10 keeps the smallest eigenvalue above −3e−10.
    HermitianPsd::certify_with_scale(hermitian_part(&m)?, 1e-9, 1.0)
}

/// `I − T*T`.
fn right_defect(t: &CMat) -> Result<HermitianPsd> {
    defect(identity(t.nrows()) - t.adjoint() * t)
}

/// `I − TT*`.
fn left_defect(t: &CMat) -> Result<HermitianPsd> {
    defect(identity(t.nrows()) - t * t.adjoint())
}

/// Defect operators `(I − B*B)^{1/2}` and `(I − AA*)^{1/2}`.
#[derive(Debug, Clone)]
pub struct DefectPair {
    pub right: HermitianPsd,
    pub left: HermitianPsd,
}

pub fn defect_pair(a: &Contraction, b: &Contraction) -> Result<DefectPair> {
    Ok(DefectPair {
        right: psd_sqrt(&right_defect(b.matrix())?),
        left: psd_sqrt(&left_defect(a.matrix())?),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteEpsilon {
    pub epsilon: f64,
    pub range_compatible: bool,
    /// Same construction with the defects `I − A*A` and `I − BB*`.
    pub dual_epsilon: f64,
    pub violation: Option<RangeViolation>,
}

fn same_dim(a: &Contraction, b: &Contraction) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

pub fn epsilon_min_discrete(a: &Contraction, b: &Contraction) -> Result<DiscreteEpsilon> {
    same_dim(a, b)?;
    let delta = b.matrix() - a.matrix();
    let primal = relative_constant(
        &left_defect(a.matrix())?,
        &delta,
        &right_defect(b.matrix())?,
        1.0,
    );
    let dual = relative_constant(
        &left_defect(b.matrix())?,
        &delta,
        &right_defect(a.matrix())?,
        1.0,
    );
    Ok(DiscreteEpsilon {
        epsilon: primal.value,
        range_compatible: primal.range_compatible,
        dual_epsilon: dual.value,
        violation: primal.violation,
    })
}

/// `Q(T) = lim T*ⁿTⁿ` by doubling `n`.
#[derive(Debug, Clone)]
pub struct QLimit {
    pub q: CMat,
    /// `n` whose doubling changed `T*ⁿTⁿ` by `residual`; `q` is the value at `2n`.
    pub converged_at_n: u64,
    pub residual: f64,
    pub converged: bool,
}

impl QLimit {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                what: "Q-limit",
                horizon: self.converged_at_n as f64,
                residual: self.residual,
            })
        }
    }
}

pub fn q_limit(t: &Contraction, n_max: u64) -> Result<QLimit> {
    let mut n: u64 = 1;
    let mut power = t.matrix().clone();
    let mut current = power.adjoint() * &power;
    let mut residual = f64::INFINITY;
    while n.saturating_mul(2) <= n_max {
        power = &power * &power;
        let next = power.adjoint() * &power;
        residual = operator_norm(&(&next - &current));
        current = next;
        if residual <= 1e-8 {
            let herm = HermitianPsd::certify_with_scale(hermitian_part(&current)?, 1e-8, 1.0)?;
            if herm.max_eigenvalue() > 1.0 + 1e-8 {
                return Err(Error::Inconsistent(format!(
                    "Q-limit exceeds identity: λ_max = {}",
                    herm.max_eigenvalue()
                )));
            }
            return Ok(QLimit {
                q: current,
                converged_at_n: n,
                residual,
                converged: true,
            });
        }
        n *= 2;
    }
    Ok(QLimit {
        q: current,
        converged_at_n: n,
        residual,
        converged: false,
    })
}

/// Default horizon for [`q_limit`].
pub const Q_LIMIT_MAX: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerBoundRow {
    pub n: u64,
    pub diff_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerBoundReport {
    pub dim: usize,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub dual_epsilon: f64,
    /// `ε·√(‖I − Q(A*)‖·‖I − Q(B)‖)`
    pub middle_bound: f64,
    pub rows: Vec<PowerBoundRow>,
    pub sup_diff: f64,
    /// The `n` attaining `sup_diff`.
    pub n_at_sup: u64,
    pub weak_checks: usize,
    pub stable_a: bool,
    pub stable_b: bool,
}

impl PowerBoundReport {
    pub const CSV_HEADER: &'static str =
        "dim,seed,epsilon,sup_diff,n_max,ratio,dual_epsilon,stable_A,stable_B";

    pub fn ratio(&self) -> f64 {
        crate::semigroup::bound_ratio(self.sup_diff, self.epsilon)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dim,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.epsilon,
            self.sup_diff,
            self.n_at_sup,
            self.ratio(),
            self.dual_epsilon,
            self.stable_a,
            self.stable_b
        )
    }
}

/// Verifies the norm and weak power-difference bounds for every `n` in `n_list`.
///
/// `weak_samples` seeded `(x, y)` pairs are drawn per `n` for the weak form.
pub fn verify_power_bound(
    a: &Contraction,
    b: &Contraction,
    n_list: &[u64],
    weak_samples: usize,
    seed: u64,
) -> Result<PowerBoundReport> {
    let eps = epsilon_min_discrete(a, b)?;
    if !eps.epsilon.is_finite() {
        return Err(Error::Precondition("discrete ε is infinite".into()));
    }
    let epsilon = eps.epsilon;
    let dim = a.dim();
    let q_a_adj = q_limit(&a.adjoint(), Q_LIMIT_MAX)?.require_converged()?;
    let q_b = q_limit(b, Q_LIMIT_MAX)?.require_converged()?;
    let w_y = identity(dim) - &q_a_adj.q;
    let w_x = identity(dim) - &q_b.q;
    let middle_bound = epsilon * (operator_norm(&w_y) * operator_norm(&w_x)).sqrt();
    if middle_bound > epsilon + 1e-10 {
        return Err(Error::BoundViolation {
            what: "Q-weighted bound exceeds ε",
            at: 0.0,
            measured: middle_bound,
            bound: epsilon,
        });
    }

    let mut wanted: Vec<u64> = n_list.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut rng = seeded(seed);
    let mut rows = Vec::with_capacity(wanted.len());
    let mut weak_checks = 0;
    let (mut pa, mut pb) = (identity(dim), identity(dim));
    let mut k = 0u64;
    for &n in &wanted {
        while k < n {
            pa = &pa * a.matrix();
            pb = &pb * b.matrix();
            k += 1;
        }
        let diff = &pb - &pa;
        let diff_norm = operator_norm(&diff);
        if diff_norm > middle_bound + BOUND_SLACK {
            return Err(Error::BoundViolation {
                what: "power-difference norm bound",
                at: n as f64,
                measured: diff_norm,
                bound: middle_bound,
            });
        }
        for _ in 0..weak_samples {
            let x = complex_gaussian_vec(dim, &mut rng);
            let y = complex_gaussian_vec(dim, &mut rng);
            let lhs = inner(&(&diff * &x), &y).norm_sqr();
            let rhs = epsilon * epsilon * inner(&(&w_x * &x), &x).re * inner(&(&w_y * &y), &y).re;
            let slack = BOUND_SLACK * x.norm_squared() * y.norm_squared();
            if lhs > rhs + slack {
                return Err(Error::BoundViolation {
                    what: "weak power-difference bound",
                    at: n as f64,
                    measured: lhs,
                    bound: rhs,
                });
            }
            weak_checks += 1;
        }
        rows.push(PowerBoundRow { n, diff_norm });
    }
    let (n_at_sup, sup_diff) = rows
        .iter()
        .fold((0, 0.0), |(nb, vb), r| if r.diff_norm > vb { (r.n, r.diff_norm) } else { (nb, vb) });
    Ok(PowerBoundReport {
        dim,
        seed: None,
        epsilon,
        dual_epsilon: eps.dual_epsilon,
        middle_bound,
        rows,
        sup_diff,
        n_at_sup,
        weak_checks,
        stable_a: discrete_stability(a)?.stable,
        stable_b: discrete_stability(b)?.stable,
    })
}

/// Residual of `Σ_{k<n} A^k(I − AB)B^k = I − AⁿBⁿ` for arbitrary square `A`, `B`,
/// relative to `max(1, max_k ‖A^k‖·‖B^k‖)`.
pub fn telescoping_residual(a: &CMat, b: &CMat, n: u64) -> Result<f64> {
    let dim = check_square(a)?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.nrows(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("telescoping identity needs n ≥ 1".into()));
    }
    let core = identity(dim) - a * b;
    let mut sum = CMat::zeros(dim, dim);
    let (mut pa, mut pb) = (identity(dim), identity(dim));
    let mut scale = 1.0f64;
    for _ in 0..n {
        sum += &pa * &core * &pb;
        pa = &pa * a;
        pb = &pb * b;
        scale = scale.max(operator_norm(&pa) * operator_norm(&pb));
    }
    let rhs = identity(dim) - &pa * &pb;
    Ok(operator_norm(&(sum - rhs)) / scale)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscreteStabilityWitness {
    pub stable: bool,
    pub spectral_radius: f64,
    /// Some `n` with `‖Tⁿ‖ < 1`.
    pub power_witness: Option<u64>,
}

/// Stable iff the spectral radius is below `1 − 1e−10`.
pub fn discrete_stability(t: &Contraction) -> Result<DiscreteStabilityWitness> {
    let rho = spectral_radius(t.matrix())?;
    let stable = rho < 1.0 - 1e-10;
    let mut power_witness = None;
    if stable {
        let mut n = 1u64;
        let mut p = t.matrix().clone();
        for _ in 0..48 {
            if operator_norm(&p) < 1.0 - 1e-12 {
                power_witness = Some(n);
                break;
            }
            p = &p * &p;
            n *= 2;
        }
    }
    Ok(DiscreteStabilityWitness {
        stable,
        spectral_radius: rho,
        power_witness,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DiscreteStabilityTransfer {
    Applies {
        epsilon: f64,
        a: DiscreteStabilityWitness,
        b: DiscreteStabilityWitness,
    },
    PreconditionNotMet {
        epsilon: f64,
    },
}

/// For `ε < 1`, checks that `A` and `B` are both stable or both not.
pub fn discrete_stability_transfer(a: &Contraction, b: &Contraction) -> Result<DiscreteStabilityTransfer> {
    let epsilon = epsilon_min_discrete(a, b)?.epsilon;
    if !(epsilon < 1.0) {
        return Ok(DiscreteStabilityTransfer::PreconditionNotMet { epsilon });
    }
    let wa = discrete_stability(a)?;
    let wb = discrete_stability(b)?;
    if wa.stable != wb.stable {
        return Err(Error::Inconsistent(format!(
            "discrete ε = {epsilon} < 1 but spectral radii are {} and {}",
            wa.spectral_radius, wb.spectral_radius
        )));
    }
    Ok(DiscreteStabilityTransfer::Applies {
        epsilon,
        a: wa,
        b: wb,
    })
}

/// Contraction with norm `target_norm` built from a seeded Gaussian matrix.
pub fn random_contraction<R: rand::Rng + ?Sized>(n: usize, target_norm: f64, rng: &mut R) -> CMat {
    let g = crate::kernel::random::complex_gaussian(n, n, rng);
    let norm = operator_norm(&g);
    g * num_complex::Complex64::new(target_norm / norm, 0.0)
}
