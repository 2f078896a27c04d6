use serde::Serialize;

use super::assembly::{assemble, AssembledWaveSystem};
use super::coefficients::{FemMesh, Piece, WaveCoefficients};
use crate::error::{Error, Result};
use crate::kernel::operator_norm;
use crate::second_order::{damping_bridge, damping_epsilon, system_stability};

/// `|new − old| / √(new·old)` with `0/0 = 0` and `x/0 = ∞`.
fn relative_change(old: f64, new: f64) -> f64 {
    if old == new {
        0.0
    } else if old == 0.0 || new == 0.0 {
        f64::INFINITY
    } else {
        (new - old).abs() / (new * old).sqrt()
    }
}

/// Pieces of both tables over their common refinement.
fn paired_pieces(base: &WaveCoefficients, hat: &WaveCoefficients) -> Result<Vec<(Piece, Piece)>> {
    base.validate()?;
    hat.validate()?;
    let len = base.b - base.a;
    if (base.a - hat.a).abs() > 1e-12 * len || (base.b - hat.b).abs() > 1e-12 * len {
        return Err(Error::Coefficients("perturbed coefficients live on a different interval".into()));
    }
    if base.zeta_times_k != hat.zeta_times_k {
        return Err(Error::Coefficients("boundary factor flag differs between tables".into()));
    }
    let mut cuts = vec![base.a];
    cuts.extend(base.breakpoints());
    cuts.extend(hat.breakpoints());
    cuts.push(base.b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * len);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let (p, q) = (*base.piece_at(mid), *hat.piece_at(mid));
        if p.rho != q.rho || p.k != q.k {
            return Err(Error::Coefficients(format!(
                "only damping may change; ρ or k differs near x = {mid}"
            )));
        }
        out.push((p, q));
    }
    Ok(out)
}

fn pointwise_epsilon(pairs: &[(Piece, Piece)], base: &WaveCoefficients, hat: &WaveCoefficients) -> f64 {
    pairs
        .iter()
        .flat_map(|(p, q)| [relative_change(p.gamma, q.gamma), relative_change(p.d, q.d)])
        .chain([relative_change(base.boundary_damping(), hat.boundary_damping())])
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct DampingPerturbation {
    /// Largest pointwise relative change of `γ`, `d`, `ζ`.
    pub epsilon_pointwise: f64,
    /// Damping constant of the assembled κ-coordinate matrices.
    pub epsilon_operator: f64,
    pub perturbed: AssembledWaveSystem,
}

/// Changes the damping coefficients to those of `hat`; `ρ` and `k` must agree.
///
/// The operator constant never exceeds the pointwise one; a violation beyond
/// `1e−8` is reported as [`Error::Inconsistent`].
pub fn perturb_damping(base: &AssembledWaveSystem, hat: &WaveCoefficients) -> Result<DampingPerturbation> {
    let pairs = paired_pieces(&base.coefficients, hat)?;
    let epsilon_pointwise = pointwise_epsilon(&pairs, &base.coefficients, hat);
    let perturbed = assemble(&base.mesh, hat)?;
    let epsilon_operator = damping_epsilon(&base.c_kappa, &perturbed.c_kappa)?.epsilon;
    if epsilon_operator > epsilon_pointwise + 1e-8 {
        return Err(Error::Inconsistent(format!(
            "operator ε = {epsilon_operator} exceeds pointwise ε = {epsilon_pointwise}"
        )));
    }
    Ok(DampingPerturbation {
        epsilon_pointwise,
        epsilon_operator,
        perturbed,
    })
}

/// `η/√(1 − η)` for `0 ≤ η < 1`.
pub fn eta_to_epsilon(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("η must lie in [0, 1), got {eta}")));
    }
    Ok(eta / (1.0 - eta).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaCheck {
    pub eta: f64,
    pub epsilon: f64,
    /// `|ĉ − c| ≤ η·c` for `c = γ, d, ζ`.
    pub premise_holds: bool,
    pub epsilon_pointwise: f64,
    /// `epsilon_pointwise ≤ η/√(1 − η)`.
    pub conclusion_holds: bool,
}

/// Checks that closeness relative to the unperturbed data implies the
/// symmetric relative closeness with `ε = η/√(1 − η)`.
pub fn eta_check(base: &WaveCoefficients, hat: &WaveCoefficients, eta: f64) -> Result<EtaCheck> {
    let epsilon = eta_to_epsilon(eta)?;
    let pairs = paired_pieces(base, hat)?;
    let within = |old: f64, new: f64| (new - old).abs() <= eta * old + 1e-14 * old.max(new);
    let premise_holds = pairs
        .iter()
        .all(|(p, q)| within(p.gamma, q.gamma) && within(p.d, q.d))
        && within(base.boundary_damping(), hat.boundary_damping());
    let epsilon_pointwise = pointwise_epsilon(&pairs, base, hat);
    let conclusion_holds = epsilon_pointwise <= epsilon * (1.0 + 1e-12);
    if premise_holds && !conclusion_holds {
        return Err(Error::Inconsistent(format!(
            "η = {eta} premise holds but pointwise ε = {epsilon_pointwise} > {epsilon}"
        )));
    }
    Ok(EtaCheck {
        eta,
        epsilon,
        premise_holds,
        epsilon_pointwise,
        conclusion_holds,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TransferVerdict {
    /// `ε < 2`: both systems decay exponentially or neither does.
    Applies { stable: bool },
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub abscissa_base: f64,
    pub abscissa_perturbed: f64,
    pub stable_base: bool,
    pub stable_perturbed: bool,
    pub epsilon_operator: f64,
    pub sup_diff: f64,
    pub t_at_sup: f64,
    /// `sup_diff ≤ ε/2 + 1e−8`.
    pub bound_holds: bool,
    pub verdict: TransferVerdict,
    /// `(t, ‖e^{𝒜̂t} − e^{𝒜t}‖)`
    #[serde(skip)]
    pub curve: Vec<(f64, f64)>,
}

/// Stability of both systems, their damping constant and semigroup distance.
pub fn decay_analysis(
    base: &AssembledWaveSystem,
    perturbed: &AssembledWaveSystem,
    t_grid: &[f64],
) -> Result<DecayReport> {
    if base.mesh != perturbed.mesh {
        return Err(Error::Coefficients("systems are assembled on different meshes".into()));
    }
    let mass_gap = operator_norm(&(base.m_kappa.matrix() - perturbed.m_kappa.matrix()));
    if mass_gap > 1e-12 * operator_norm(base.m_kappa.matrix()).max(1.0) {
        return Err(Error::Coefficients("systems differ in mass or stiffness".into()));
    }
    let sys = base.system()?;
    let sys_hat = perturbed.system()?;
    let bridge = damping_bridge(&sys, &perturbed.c_kappa, t_grid)?;
    let (abscissa_base, stable_base) = system_stability(&sys)?;
    let (abscissa_perturbed, stable_perturbed) = system_stability(&sys_hat)?;
    let verdict = if bridge.damping_epsilon < 2.0 {
        if stable_base != stable_perturbed {
            return Err(Error::Inconsistent(format!(
                "ε = {} < 2 but abscissae are {abscissa_base} and {abscissa_perturbed}",
                bridge.damping_epsilon
            )));
        }
        TransferVerdict::Applies { stable: stable_base }
    } else {
        TransferVerdict::NotApplicable
    };
    Ok(DecayReport {
        abscissa_base,
        abscissa_perturbed,
        stable_base,
        stable_perturbed,
        epsilon_operator: bridge.damping_epsilon,
        sup_diff: bridge.sup_diff,
        t_at_sup: bridge.t_at_sup,
        bound_holds: bridge.bound_holds,
        verdict,
        curve: bridge.curve,
    })
}

/// `ρ = 0, γ = 1` left of `split` and `ρ = 1, γ = gamma_right` right of it,
/// with `k = 1`, `d = 0`, `ζ = 0`.
pub fn mixed_type_scenario(mesh: &FemMesh, split: f64, gamma_right: f64) -> Result<AssembledWaveSystem> {
    let idx = mesh
        .node_index(split)
        .ok_or_else(|| Error::InvalidArgument(format!("split point {split} is not a mesh node")))?;
    let (a, b) = (mesh.a(), mesh.b());
    let left = Piece { x0: a, x1: split, rho: 0.0, gamma: 1.0, d: 0.0, k: 1.0 };
    let right = Piece { x0: split, x1: b, rho: 1.0, gamma: gamma_right, d: 0.0, k: 1.0 };
    let pieces = if idx == 0 {
        vec![Piece { x0: a, ..right }]
    } else if idx == mesh.dim() {
        vec![Piece { x1: b, ..left }]
    } else {
        vec![left, right]
    };
    assemble(
        mesh,
        &WaveCoefficients {
            a,
            b,
            zeta: 0.0,
            pieces,
            zeta_times_k: false,
        },
    )
}

/// Number of basis functions supported in `[a, split]`.
pub fn predicted_mass_nullity(mesh: &FemMesh, split: f64) -> usize {
    let nodes = mesh.nodes();
    let m = mesh.dim();
    let tol = 1e-12 * (mesh.b() - mesh.a());
    (1..=m)
        .filter(|&i| nodes[(i + 1).min(m)] <= split + tol)
        .count()
}
