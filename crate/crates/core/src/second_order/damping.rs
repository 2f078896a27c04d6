use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::phase::{build_aplus, certify_accretive, generator_operator, SecondOrderSystem};
use crate::error::{Error, Result};
use crate::kernel::{
    hermitian_part, inverse, operator_norm, skew_part, subspace_gap, CMat, HermitianPsd,
};
use crate::semigroup::{
    diff_norm_curve, epsilon_min, is_exponentially_stable, relative_constant, sup_of,
    validate_grid, DissipativeOperator, RangeViolation, BOUND_SLACK,
};

const ORDER_TOL: f64 = 1e-10;
const AGREE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DampingEpsilon {
    pub epsilon: f64,
    pub range_compatible: bool,
    pub violation: Option<RangeViolation>,
}

/// Least `ε` with `|((Ĉ − C)x, y)|² ≤ ε²·Re(Cy, y)·Re(Ĉx, x)`.
pub fn damping_epsilon(c: &CMat, c_hat: &CMat) -> Result<DampingEpsilon> {
    if c.shape() != c_hat.shape() {
        return Err(Error::DimensionMismatch {
            expected: c.nrows(),
            found: c_hat.nrows(),
        });
    }
    let h = certify_accretive(c)?;
    let h_hat = certify_accretive(c_hat)?;
    let scale = operator_norm(c).max(operator_norm(c_hat));
    let r = relative_constant(&h, &(c_hat - c), &h_hat, scale);
    Ok(DampingEpsilon {
        epsilon: r.value,
        range_compatible: r.range_compatible,
        violation: r.violation,
    })
}

/// Least `N` with `|Im(Cy, y)| ≤ N·Re(Cy, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct SectorConstant {
    pub value: f64,
    pub range_compatible: bool,
}

pub fn sector_constant(c: &CMat) -> Result<SectorConstant> {
    let h = certify_accretive(c)?;
    // skew_part gives (C − C*)/2; the imaginary part is that divided by i.
    let s = skew_part(c)? * Complex64::new(0.0, -1.0);
    let r = relative_constant(&h, &s, &h, operator_norm(c));
    Ok(SectorConstant {
        value: r.value,
        range_compatible: r.range_compatible,
    })
}

/// Damping perturbation seen through the induced phase-space operators.
#[derive(Debug, Clone, Serialize)]
pub struct DampingBridge {
    pub damping_epsilon: f64,
    /// `ε(𝒜̂⁺, 𝒜⁺)`
    pub aplus_epsilon: f64,
    /// Distance between `𝒩(𝒜⁺)` and `𝒩(𝒜̂⁺)`.
    pub null_gap: f64,
    /// `ε(𝒜̂, 𝒜)` on the common phase space, when the null spaces agree.
    pub generator_epsilon: Option<f64>,
    /// `ε(𝒜, 𝒜̂)`, the same pair in the opposite order.
    pub generator_epsilon_reversed: Option<f64>,
    /// `sup_t ‖e^{𝒜̂t}Q̂ − e^{𝒜t}Q‖` on the grid.
    pub sup_diff: f64,
    pub t_at_sup: f64,
    /// `sup_diff ≤ ε/2 + 1e−8`.
    pub bound_holds: bool,
    /// `(t, ‖e^{𝒜̂t}Q̂ − e^{𝒜t}Q‖)` over the grid.
    #[serde(skip)]
    pub curve: Vec<(f64, f64)>,
}

impl DampingBridge {
    /// The damping constant matches the phase-space constants to `1e−8·max(1, ε)`.
    pub fn consistent(&self) -> bool {
        let tol = AGREE_TOL * self.damping_epsilon.max(1.0);
        let close = |v: f64| {
            (v.is_infinite() && self.damping_epsilon.is_infinite())
                || (v - self.damping_epsilon).abs() <= tol
        };
        close(self.aplus_epsilon) && self.generator_epsilon.is_none_or(close)
    }
}

pub fn damping_bridge(sys: &SecondOrderSystem, c_hat: &CMat, t_grid: &[f64]) -> Result<DampingBridge> {
    validate_grid(t_grid)?;
    let eps = damping_epsilon(sys.damping(), c_hat)?.epsilon;
    let sys_hat = sys.with_damping(c_hat.clone())?;
    let phase = build_aplus(sys)?;
    let phase_hat = build_aplus(&sys_hat)?;
    let null_gap = if phase.split.nullity() == phase_hat.split.nullity() {
        subspace_gap(phase.null_basis(), phase_hat.null_basis())
    } else {
        1.0
    };
    if eps.is_finite() && null_gap > AGREE_TOL {
        return Err(Error::Inconsistent(format!(
            "finite damping ε = {eps} but phase spaces differ: gap {null_gap}"
        )));
    }
    let aplus_op = DissipativeOperator::new(phase.aplus.clone(), ORDER_TOL)?;
    let aplus_hat_op = DissipativeOperator::new(phase_hat.aplus.clone(), ORDER_TOL)?;
    let aplus_epsilon = epsilon_min(&aplus_hat_op, &aplus_op)?.epsilon;

    let (mut generator_epsilon, mut generator_epsilon_reversed) = (None, None);
    if null_gap <= AGREE_TOL && phase.phase_dim() > 0 {
        let x = phase.basis();
        let a_hat_inv = x.adjoint() * &phase_hat.aplus * x;
        let a_hat = inverse(&a_hat_inv)?;
        let op = generator_operator(&phase.a, &phase.a_inv)?;
        let op_hat = generator_operator(&a_hat, &a_hat_inv)?;
        generator_epsilon = Some(epsilon_min(&op_hat, &op)?.epsilon);
        generator_epsilon_reversed = Some(epsilon_min(&op, &op_hat)?.epsilon);
    }

    let curve: Vec<(f64, f64)> = if phase.phase_dim() > 0 && null_gap <= AGREE_TOL {
        let x = phase.basis();
        let a_hat = inverse(&(x.adjoint() * &phase_hat.aplus * x))?;
        diff_norm_curve(&phase.a, &a_hat, t_grid)?
    } else {
        t_grid
            .par_iter()
            .map(|&t| Ok((t, operator_norm(&(phase_hat.semigroup(t)? - phase.semigroup(t)?)))))
            .collect::<Result<_>>()?
    };
    let (t_at_sup, sup_diff) = sup_of(&curve);
    Ok(DampingBridge {
        damping_epsilon: eps,
        aplus_epsilon,
        null_gap,
        generator_epsilon,
        generator_epsilon_reversed,
        sup_diff,
        t_at_sup,
        bound_holds: sup_diff <= eps / 2.0 + BOUND_SLACK,
        curve,
    })
}

/// One system of a damping chain and the link to its successor.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainLink {
    pub k: usize,
    /// Damping constant from system `k` to system `k + 1`; `None` for the last system.
    pub epsilon: Option<f64>,
    /// Spectral abscissa of the generator on `𝒳`.
    pub abscissa: f64,
    pub stable: bool,
}

impl ChainLink {
    pub const CSV_HEADER: &'static str = "k,epsilon_k,abscissa_k,stable_k";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.k,
            self.epsilon.map(|e| e.to_string()).unwrap_or_default(),
            self.abscissa,
            self.stable
        )
    }
}

/// Spectral abscissa on `𝒳` and the stability verdict; `𝒳 = {0}` counts as stable.
pub fn system_stability(sys: &SecondOrderSystem) -> Result<(f64, bool)> {
    let phase = build_aplus(sys)?;
    if phase.phase_dim() == 0 {
        return Ok((f64::NEG_INFINITY, true));
    }
    let w = is_exponentially_stable(&phase.a)?;
    Ok((w.abscissa, w.stable))
}

/// Evaluates a chain `C_0, …, C_n` of dampings on a common mass.
fn run_chain(sys: &SecondOrderSystem, dampings: &[CMat]) -> Result<Vec<ChainLink>> {
    let n = dampings.len();
    (0..n)
        .into_par_iter()
        .map(|k| {
            let (abscissa, stable) = system_stability(&sys.with_damping(dampings[k].clone())?)?;
            let epsilon = if k + 1 < n {
                Some(damping_epsilon(&dampings[k], &dampings[k + 1])?.epsilon)
            } else {
                None
            };
            Ok(ChainLink {
                k,
                epsilon,
                abscissa,
                stable,
            })
        })
        .collect()
}

fn require_uniform_stability(links: &[ChainLink]) -> Result<bool> {
    let first = links.first().is_none_or(|l| l.stable);
    if let Some(l) = links.iter().find(|l| l.stable != first) {
        return Err(Error::Inconsistent(format!(
            "stability changes along the chain at k = {} (abscissa {})",
            l.k, l.abscissa
        )));
    }
    Ok(first)
}

fn require_links_below_two(links: &[ChainLink]) -> Result<()> {
    for l in links {
        if let Some(e) = l.epsilon {
            if !(e < 2.0) {
                return Err(Error::Inconsistent(format!(
                    "chain link {} has damping ε = {e} ≥ 2",
                    l.k
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyChain {
    pub alpha: f64,
    /// Number of links.
    pub n: usize,
    pub links: Vec<ChainLink>,
    pub stable: bool,
}

fn certify_hermitian(c: &CMat, scale: f64) -> Result<HermitianPsd> {
    HermitianPsd::certify_with_scale(c.clone(), ORDER_TOL, scale)
}

/// Homotopy `C_k = C + (k/n)(D − C)` for `0 ⪯ C ⪯ D ⪯ αC`, `n = ⌊(α−1)/2⌋ + 1`.
///
/// Every link has damping constant below `2`, so all systems of the chain share
/// one stability verdict.
pub fn homotopy_chain_stability(sys: &SecondOrderSystem, d: &CMat, alpha: f64) -> Result<HomotopyChain> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("α must be finite and ≥ 1, got {alpha}")));
    }
    let c = sys.damping();
    if d.shape() != c.shape() {
        return Err(Error::DimensionMismatch {
            expected: c.nrows(),
            found: d.nrows(),
        });
    }
    let scale = operator_norm(d).max(alpha * operator_norm(c));
    certify_hermitian(c, scale)?;
    certify_hermitian(d, scale)?;
    certify_hermitian(&hermitian_part(&(d - c))?, scale)?;
    certify_hermitian(&hermitian_part(&(c * Complex64::new(alpha, 0.0) - d))?, scale)?;
    let n = ((alpha - 1.0) / 2.0).floor() as usize + 1;
    let dampings: Vec<CMat> = (0..=n)
        .map(|k| c + (d - c) * Complex64::new(k as f64 / n as f64, 0.0))
        .collect();
    let links = run_chain(sys, &dampings)?;
    require_links_below_two(&links)?;
    let stable = require_uniform_stability(&links)?;
    Ok(HomotopyChain {
        alpha,
        n,
        links,
        stable,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SectorEquivalence {
    /// `C` is not sectorial; nothing is claimed.
    Inapplicable { sector_constant: f64 },
    /// Chain from `Re C` to `C` in `n = ⌊N/2⌋ + 1` links of constant `N/n`.
    Applies {
        sector_constant: f64,
        n: usize,
        links: Vec<ChainLink>,
        stable: bool,
    },
}

/// Stability of the system with damping `C` equals that with `Re C`, for sectorial `C`.
pub fn symmetric_part_equivalence(sys: &SecondOrderSystem) -> Result<SectorEquivalence> {
    let c = sys.damping();
    let big_n = sector_constant(c)?.value;
    if !big_n.is_finite() {
        return Ok(SectorEquivalence::Inapplicable {
            sector_constant: big_n,
        });
    }
    let n = (big_n / 2.0).floor() as usize + 1;
    let c_sym = hermitian_part(c)?;
    let dampings: Vec<CMat> = (0..=n)
        .map(|k| &c_sym + (c - &c_sym) * Complex64::new(k as f64 / n as f64, 0.0))
        .collect();
    let links = run_chain(sys, &dampings)?;
    let expected = big_n / n as f64;
    for l in &links {
        if let Some(e) = l.epsilon {
            if (e - expected).abs() > AGREE_TOL * big_n.max(1.0) {
                return Err(Error::Inconsistent(format!(
                    "link {} has damping ε = {e}, expected N/n = {expected}",
                    l.k
                )));
            }
        }
    }
    require_links_below_two(&links)?;
    let stable = require_uniform_stability(&links)?;
    Ok(SectorEquivalence::Applies {
        sector_constant: big_n,
        n,
        links,
        stable,
    })
}
