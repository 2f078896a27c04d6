use std::collections::BTreeMap;

use dissipgap_core::discrete::{
    random_contraction, telescoping_residual, verify_power_bound, Contraction, CONTRACTION_TOL,
};
use dissipgap_core::kernel::random::{
    complex_gaussian, complex_gaussian_vec, named_stream, random_dissipative,
};
use dissipgap_core::kernel::{
    hermitian_part, matrix_exp_scaled, null_space_basis, operator_norm, psd_sqrt,
    smallest_singular_value, CMat, CVec, HermitianPsd, RANK_TOL,
};
use dissipgap_core::second_order::{
    build_aplus, damping_bridge, homotopy_chain_stability, null_space_formula_check,
    pseudo_resolvent_residual, random_system, symmetric_part_equivalence, system_stability,
    trotter_kato_error, ChainLink, SecondOrderSystem, SectorEquivalence, TrotterKatoTable,
};
use dissipgap_core::semigroup::{
    diff_norm_curve, epsilon_min, is_exponentially_stable, log_grid, standard_t_grid, sup_of,
    verify_pointwise, DissipativeOperator, PerturbationReport, BOUND_SLACK, DISSIPATIVITY_TOL,
};
use dissipgap_core::wave1d::{
    assemble, decay_analysis, eta_check, mixed_type_scenario, perturb_damping,
    predicted_mass_nullity, AssembledWaveSystem,
};
use num_complex::Complex64;
use serde_json::Value;

use crate::config::{
    self, dimension, grid, optional_matrix, pair_matrices, Assertions, DiscretePair, HomotopyChain,
    RandomPair, Scenario, SecondOrder, Sectorial, TrotterKato, Wave1d,
};
use crate::error::ScenarioError;
use crate::report::{num, Check, Curve, Table};

type Result<T> = std::result::Result<T, ScenarioError>;

/// Relative tolerance for agreement between two computed constants.
const AGREE_TOL: f64 = 1e-8;
/// Tolerance for isometry and contractivity of evolutions.
const EVOLUTION_TOL: f64 = 1e-10;

#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, Value>,
    pub curves: BTreeMap<String, Curve>,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn value(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.into(), v.into());
    }

    fn number(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), num(v));
    }

    fn curve(&mut self, name: &str, curve: Curve) {
        self.curves.insert(name.into(), curve);
    }
}

pub fn run_scenario(s: &Scenario) -> Result<Outcome> {
    match s {
        Scenario::RandomPair(s) => random_pair(s),
        Scenario::DiscretePair(s) => discrete_pair(s),
        Scenario::SecondOrder(s) => second_order(s),
        Scenario::HomotopyChain(s) => homotopy(s),
        Scenario::Sectorial(s) => sectorial(s),
        Scenario::Wave1d(s) => wave1d(s),
        Scenario::TrotterKato(s) => trotter_kato(s),
    }
}

#[derive(Default)]
struct Measured {
    epsilon: Option<f64>,
    sup_diff: Option<f64>,
    final_error: Option<f64>,
}

fn asserted(a: &Assertions, m: Measured, out: &mut Outcome) -> Result<()> {
    let items = [
        ("epsilon_at_most", a.epsilon_at_most, m.epsilon, "ε ≤ asserted value"),
        ("sup_diff_at_most", a.sup_diff_at_most, m.sup_diff, "sup difference ≤ asserted value"),
        ("final_error_at_most", a.final_error_at_most, m.final_error, "final error ≤ asserted value"),
    ];
    for (field, bound, measured, relation) in items {
        let Some(bound) = bound else { continue };
        let measured = measured.ok_or_else(|| {
            ScenarioError::config(format!("assert.{field}: this scenario does not measure it"))
        })?;
        out.checks.push(Check::at_most(&format!("assert.{field}"), relation, measured, bound, 0.0));
    }
    Ok(())
}

fn dissipative(m: CMat) -> Result<DissipativeOperator> {
    Ok(DissipativeOperator::new(m, DISSIPATIVITY_TOL)?)
}

fn random_pair(s: &RandomPair) -> Result<Outcome> {
    let (a, b) = match pair_matrices(&s.a, &s.b)? {
        Some(pair) => pair,
        None => {
            let n = dimension(s.dim)?;
            let mut rng = named_stream(s.seed, "random-pair");
            (random_dissipative(n, &mut rng), random_dissipative(n, &mut rng))
        }
    };
    let t_grid = grid(&s.t_grid)?;
    let (a, b) = (dissipative(a)?, dissipative(b)?);
    let mut out = Outcome::default();

    let eps = epsilon_min(&a, &b)?;
    let curve = diff_norm_curve(a.matrix(), b.matrix(), &t_grid)?;
    let (t_at_sup, sup) = sup_of(&curve);
    let report = PerturbationReport {
        dim: a.dim(),
        seed: Some(s.seed),
        epsilon: eps.epsilon,
        range_compatible: eps.range_compatible,
        sup_diff_norm: sup,
        t_at_sup,
        bound_ratio: dissipgap_core::semigroup::bound_ratio(sup, eps.epsilon / 2.0),
        dual_epsilon: eps.dual_epsilon,
        stable_a: is_exponentially_stable(a.matrix())?.stable,
        stable_b: is_exponentially_stable(b.matrix())?.stable,
    };
    out.value("dim", a.dim());
    out.number("epsilon", report.epsilon);
    out.number("dual_epsilon", report.dual_epsilon);
    out.value("range_compatible", report.range_compatible);
    out.number("sup_diff", sup);
    out.number("t_at_sup", t_at_sup);
    out.number("ratio", report.bound_ratio);
    out.value("stable_A", report.stable_a);
    out.value("stable_B", report.stable_b);

    if eps.is_finite() {
        out.checks.push(Check::at_most(
            "uniform-bound",
            "sup over t of ‖e^{Bt} − e^{At}‖ ≤ ε/2",
            sup,
            eps.epsilon / 2.0,
            BOUND_SLACK,
        ));
        if s.pointwise_samples > 0 {
            let pw = verify_pointwise(&a, &b, eps.epsilon, s.pointwise_samples, s.seed)?;
            out.checks.push(Check::at_most(
                "pointwise-form",
                "|(x, (B − A)y)|² ≤ ε²·Re(−Bx, x)·Re(−Ay, y) on sampled x, y",
                pw.max_ratio,
                pw.epsilon_sq,
                1e-8,
            ));
        }
    }
    asserted(
        &s.assert,
        Measured {
            epsilon: Some(eps.epsilon),
            sup_diff: Some(sup),
            final_error: None,
        },
        &mut out,
    )?;
    out.curve("diff-norm", Curve::new("t", "diff_norm", curve));
    out.tables.push(Table {
        file: "perturbation.csv".into(),
        header: PerturbationReport::CSV_HEADER.into(),
        rows: vec![report.csv_row()],
    });
    Ok(out)
}

fn discrete_pair(s: &DiscretePair) -> Result<Outcome> {
    for (field, v) in [("norm_a", s.norm_a), ("norm_b", s.norm_b)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(ScenarioError::config(format!("{field} = {v} must lie in (0, 1]")));
        }
    }
    if !(1..=100_000).contains(&s.n_max) {
        return Err(ScenarioError::config(format!("n_max = {} must lie in 1..=100000", s.n_max)));
    }
    let (a, b) = match pair_matrices(&s.a, &s.b)? {
        Some(pair) => pair,
        None => {
            let n = dimension(s.dim)?;
            let mut rng = named_stream(s.seed, "discrete-pair");
            (
                random_contraction(n, s.norm_a, &mut rng),
                random_contraction(n, s.norm_b, &mut rng),
            )
        }
    };
    let a = Contraction::new(a, CONTRACTION_TOL)?;
    let b = Contraction::new(b, CONTRACTION_TOL)?;
    let n_list: Vec<u64> = (1..=s.n_max).collect();
    let mut report = verify_power_bound(&a, &b, &n_list, s.weak_samples, s.seed)?;
    report.seed = Some(s.seed);
    let mut out = Outcome::default();

    out.value("dim", report.dim);
    out.number("epsilon", report.epsilon);
    out.number("dual_epsilon", report.dual_epsilon);
    out.number("middle_bound", report.middle_bound);
    out.number("sup_diff", report.sup_diff);
    out.value("n_at_sup", report.n_at_sup);
    out.number("ratio", report.ratio());
    out.value("weak_checks", report.weak_checks);
    out.value("stable_A", report.stable_a);
    out.value("stable_B", report.stable_b);

    out.checks.push(Check::at_most(
        "power-bound",
        "max over n of ‖Bⁿ − Aⁿ‖ ≤ ε",
        report.sup_diff,
        report.epsilon,
        BOUND_SLACK,
    ));
    out.checks.push(Check::at_most(
        "weighted-power-bound",
        "max over n of ‖Bⁿ − Aⁿ‖ ≤ ε·√(‖I − Q(A*)‖·‖I − Q(B)‖)",
        report.sup_diff,
        report.middle_bound,
        BOUND_SLACK,
    ));
    out.checks.push(Check::holds(
        "weak-power-bound",
        "|((Bⁿ − Aⁿ)x, y)|² ≤ ε²·((I − Q(B))x, x)·((I − Q(A*))y, y) on sampled x, y",
        true,
    ));
    let n_tel = s.n_max.min(100);
    let residual = telescoping_residual(a.matrix(), b.matrix(), n_tel)?;
    out.number("telescoping_residual", residual);
    out.checks.push(Check::at_most(
        "telescoping-identity",
        "‖Σ_{k<n} A^k(I − AB)B^k − (I − AⁿBⁿ)‖ relative residual ≤ 1e−12·n",
        residual,
        0.0,
        1e-12 * n_tel as f64,
    ));
    asserted(
        &s.assert,
        Measured {
            epsilon: Some(report.epsilon),
            sup_diff: Some(report.sup_diff),
            final_error: None,
        },
        &mut out,
    )?;
    out.curve(
        "power-diff",
        Curve::new("n", "diff_norm", report.rows.iter().map(|r| (r.n as f64, r.diff_norm))),
    );
    out.tables.push(Table {
        file: "power_bound.csv".into(),
        header: dissipgap_core::discrete::PowerBoundReport::CSV_HEADER.into(),
        rows: vec![report.csv_row()],
    });
    Ok(out)
}

/// `Ĉ = C + H^{1/2} G H^{1/2}` with `H = Re C` and `‖G‖ = 1/2`, so `Re Ĉ ⪰ H/2`.
fn range_compatible_perturbation(c: &CMat, seed: u64) -> Result<CMat> {
    let n = c.nrows();
    let root = psd_sqrt(&HermitianPsd::certify(hermitian_part(c)?, 1e-10)?);
    let mut rng = named_stream(seed, "damping-perturbation");
    let g = complex_gaussian(n, n, &mut rng);
    let g = &g * Complex64::new(0.5 / operator_norm(&g).max(f64::MIN_POSITIVE), 0.0);
    Ok(c + root.matrix() * g * root.matrix())
}

fn system_from(m: &Option<config::MatrixSpec>, c: &Option<config::MatrixSpec>) -> Result<Option<SecondOrderSystem>> {
    match (optional_matrix(m, "M")?, optional_matrix(c, "C")?) {
        (Some(m), Some(c)) => Ok(Some(SecondOrderSystem::new(m, c)?)),
        (None, None) => Ok(None),
        _ => Err(ScenarioError::config("give both M and C, or neither")),
    }
}

fn second_order(s: &SecondOrder) -> Result<Outcome> {
    let t_grid = grid(&s.t_grid)?;
    let sys = match system_from(&s.m, &s.c)? {
        Some(sys) => sys,
        None => {
            let n = dimension(s.dim)?;
            let mut rng = named_stream(s.seed, "second-order");
            random_system(
                n,
                s.mass_rank.unwrap_or(n),
                s.damping_rank.unwrap_or(n),
                s.skew,
                &mut rng,
            )?
        }
    };
    let lambdas: Vec<Complex64> = s
        .lambdas
        .clone()
        .unwrap_or_else(|| vec![[1.0, 0.0], [2.0, 1.0], [-3.0, 0.0]])
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect();
    let c_hat = match optional_matrix(&s.c_hat, "C_hat")? {
        Some(c_hat) if c_hat.shape() != sys.damping().shape() => {
            return Err(ScenarioError::config("C_hat and C have different sizes"));
        }
        Some(c_hat) => Some(c_hat),
        None if s.perturb => Some(range_compatible_perturbation(sys.damping(), s.seed)?),
        None => None,
    };
    let mut out = Outcome::default();

    let phase = build_aplus(&sys)?;
    out.value("dim", sys.dim());
    out.value("phase_dim", phase.phase_dim());
    out.value("null_dim", phase.split.nullity());
    out.number("null_gap", phase.null_gap);
    out.checks.push(Check::at_most(
        "null-space-symmetry",
        "𝒩(𝒜⁺) = 𝒩((𝒜⁺)*), as projector distance",
        phase.null_gap,
        0.0,
        AGREE_TOL,
    ));
    let verdict = null_space_formula_check(&sys, &phase)?;
    out.number("sector_constant", verdict.sector_constant);
    out.value("null_formula_dim", verdict.formula_dim);
    out.value("null_formula_equal", verdict.equal);
    out.checks.push(Check::at_most(
        "null-space-inclusion",
        "(𝒩(C) ∩ 𝒩(M)) ⊕ 𝒩(M) ⊆ 𝒩(𝒜⁺)",
        verdict.inclusion_residual,
        0.0,
        AGREE_TOL,
    ));
    if verdict.equality_expected {
        out.checks.push(Check::at_most(
            "null-space-equality",
            "𝒩(𝒜⁺) = (𝒩(C) ∩ 𝒩(M)) ⊕ 𝒩(M) for sectorial C",
            verdict.equality_gap,
            0.0,
            AGREE_TOL,
        ));
    }
    for lambda in &lambdas {
        let r = pseudo_resolvent_residual(&phase, *lambda)?;
        out.checks.push(Check::at_most(
            &format!("pseudo-resolvent({}{:+}i)", lambda.re, lambda.im),
            "second-order resolvent identity through the generator on 𝒳",
            r,
            0.0,
            AGREE_TOL,
        ));
    }
    let (abscissa, stable) = system_stability(&sys)?;
    out.number("abscissa", abscissa);
    out.value("stable", stable);

    let mut measured = Measured::default();
    if let Some(c_hat) = c_hat {
        let bridge = damping_bridge(&sys, &c_hat, &t_grid)?;
        let eps = bridge.damping_epsilon;
        out.number("damping_epsilon", eps);
        out.number("aplus_epsilon", bridge.aplus_epsilon);
        if let Some(g) = bridge.generator_epsilon {
            out.number("generator_epsilon", g);
        }
        out.number("sup_diff", bridge.sup_diff);
        out.number("t_at_sup", bridge.t_at_sup);
        let tol = AGREE_TOL * eps.max(1.0);
        if eps.is_finite() {
            out.checks.push(Check::close(
                "bridge-phase-operator",
                "damping ε(C, Ĉ) = ε of the induced 𝒜⁺ pair",
                bridge.aplus_epsilon,
                eps,
                tol,
            ));
            if let Some(g) = bridge.generator_epsilon {
                out.checks.push(Check::close(
                    "bridge-generator",
                    "damping ε(C, Ĉ) = ε of the induced generator pair on 𝒳",
                    g,
                    eps,
                    tol,
                ));
            }
            out.checks.push(Check::at_most(
                "uniform-bound",
                "sup over t of ‖e^{𝒜̂t} − e^{𝒜t}‖ ≤ ε/2",
                bridge.sup_diff,
                eps / 2.0,
                BOUND_SLACK,
            ));
        }
        measured = Measured {
            epsilon: Some(eps),
            sup_diff: Some(bridge.sup_diff),
            final_error: None,
        };
        out.curve("diff-norm", Curve::new("t", "diff_norm", bridge.curve));
    }
    asserted(&s.assert, measured, &mut out)?;
    Ok(out)
}

fn chain_outputs(links: &[ChainLink], out: &mut Outcome) {
    for l in links {
        if let Some(e) = l.epsilon {
            out.checks.push(Check::at_most(
                &format!("link-{}", l.k),
                "damping ε between consecutive systems < 2",
                e,
                2.0 * (1.0 - f64::EPSILON),
                0.0,
            ));
        }
    }
    let first = links.first().map(|l| l.stable);
    out.checks.push(Check::holds(
        "uniform-stability",
        "every system of the chain has the same stability verdict",
        links.iter().all(|l| Some(l.stable) == first),
    ));
    out.curve(
        "chain-epsilon",
        Curve::new("k", "epsilon_k", links.iter().filter_map(|l| l.epsilon.map(|e| (l.k as f64, e)))),
    );
    out.curve(
        "chain-abscissa",
        Curve::new("k", "abscissa_k", links.iter().map(|l| (l.k as f64, l.abscissa))),
    );
    out.tables.push(Table {
        file: "chain.csv".into(),
        header: ChainLink::CSV_HEADER.into(),
        rows: links.iter().map(ChainLink::csv_row).collect(),
    });
}

fn homotopy(s: &HomotopyChain) -> Result<Outcome> {
    let sys = match (system_from(&s.m, &s.c)?, &s.wave) {
        (Some(sys), None) => sys,
        (None, Some(w)) => {
            let mesh = w.mesh.build(w.coefficients.a, w.coefficients.b)?;
            assemble(&mesh, &w.coefficients)?.system()?
        }
        _ => return Err(ScenarioError::config("give either M and C, or wave")),
    };
    let d = match (optional_matrix(&s.d, "D")?, s.d_scale) {
        (Some(d), None) => d,
        (None, Some(scale)) if scale.is_finite() && scale > 0.0 => {
            sys.damping() * Complex64::new(scale, 0.0)
        }
        (None, Some(scale)) => return Err(ScenarioError::config(format!("d_scale = {scale} must be positive"))),
        _ => return Err(ScenarioError::config("give exactly one of D and d_scale")),
    };
    let chain = homotopy_chain_stability(&sys, &d, s.alpha)?;
    let mut out = Outcome::default();
    out.number("alpha", chain.alpha);
    out.value("links", chain.n);
    out.value("stable", chain.stable);
    chain_outputs(&chain.links, &mut out);
    Ok(out)
}

fn sectorial(s: &Sectorial) -> Result<Outcome> {
    let sys = SecondOrderSystem::new(s.m.to_matrix("M")?, s.c.to_matrix("C")?)?;
    let mut out = Outcome::default();
    match symmetric_part_equivalence(&sys)? {
        SectorEquivalence::Inapplicable { sector_constant } => {
            out.number("sector_constant", sector_constant);
            out.checks.push(Check::at_most(
                "sectorial",
                "sector constant N of C is finite",
                sector_constant,
                f64::MAX,
                0.0,
            ));
        }
        SectorEquivalence::Applies {
            sector_constant,
            n,
            links,
            stable,
        } => {
            out.number("sector_constant", sector_constant);
            out.value("links", n);
            out.value("stable", stable);
            let expected = sector_constant / n as f64;
            for l in &links {
                if let Some(e) = l.epsilon {
                    out.checks.push(Check::close(
                        &format!("link-{}-constant", l.k),
                        "link damping ε = N/n",
                        e,
                        expected,
                        AGREE_TOL * sector_constant.max(1.0),
                    ));
                }
            }
            chain_outputs(&links, &mut out);
        }
    }
    Ok(out)
}

/// `(t, ‖e^{𝒜t}‖, σ_min(e^{𝒜t}))` on the phase space.
fn evolution_norms(a: &CMat, t_grid: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    use rayon::prelude::*;
    t_grid
        .par_iter()
        .map(|&t| {
            let e = matrix_exp_scaled(a, t)?;
            Ok((t, operator_norm(&e), smallest_singular_value(&e)))
        })
        .collect()
}

fn wave1d(s: &Wave1d) -> Result<Outcome> {
    let (assembled, split): (AssembledWaveSystem, Option<(f64, dissipgap_core::wave1d::FemMesh)>) =
        match (&s.coefficients, &s.mixed) {
            (Some(c), None) => {
                let mesh = s.mesh.build(c.a, c.b)?;
                (assemble(&mesh, c)?, None)
            }
            (None, Some(m)) => {
                let mesh = s.mesh.build(m.a, m.b)?;
                (mixed_type_scenario(&mesh, m.split, m.gamma_right)?, Some((m.split, mesh)))
            }
            _ => return Err(ScenarioError::config("give exactly one of coefficients and mixed")),
        };
    if s.eta.is_some() && s.perturbed.is_none() {
        return Err(ScenarioError::config("eta needs perturbed coefficients"));
    }
    let evolution_grid = match &s.t_grid {
        Some(_) => grid(&s.t_grid)?,
        None => (0..=100).map(|i| i as f64 * 0.5).collect(),
    };
    let mut out = Outcome::default();

    let sys = assembled.system()?;
    let phase = build_aplus(&sys)?;
    let nullity = null_space_basis(assembled.m_kappa.matrix(), RANK_TOL)?.nullity();
    out.value("dim", assembled.dim());
    out.value("mass_nullity", nullity);
    out.value("phase_dim", phase.phase_dim());
    let (abscissa, stable) = system_stability(&sys)?;
    out.number("abscissa", abscissa);
    out.value("stable", stable);
    if let Some((split, mesh)) = &split {
        let predicted = predicted_mass_nullity(mesh, *split);
        out.value("predicted_mass_nullity", predicted);
        out.checks.push(Check::close(
            "mass-nullity",
            "dim 𝒩(M_κ) = number of basis functions supported where ρ = 0",
            nullity as f64,
            predicted as f64,
            0.0,
        ));
    }

    if phase.phase_dim() > 0 {
        let norms = evolution_norms(&phase.a, &evolution_grid)?;
        let growth = norms.iter().map(|r| r.1).fold(0.0, f64::max);
        out.number("max_evolution_norm", growth);
        let undamped = operator_norm(&assembled.theta) == 0.0;
        if undamped {
            let drift = norms
                .iter()
                .map(|&(_, hi, lo)| (hi - 1.0).abs().max((lo - 1.0).abs()))
                .fold(0.0, f64::max);
            out.number("isometry_drift", drift);
            out.checks.push(Check::at_most(
                "isometry",
                "without damping ‖e^{𝒜t}x‖ = ‖x‖ for all x on the grid",
                drift,
                0.0,
                EVOLUTION_TOL,
            ));
        }
        out.checks.push(Check::at_most(
            "contractive",
            "‖e^{𝒜t}‖ ≤ 1 on the grid",
            growth,
            1.0,
            EVOLUTION_TOL,
        ));
        out.curve("evolution-norm", Curve::new("t", "norm", norms.iter().map(|r| (r.0, r.1))));
    }

    let mut measured = Measured::default();
    if let Some(hat) = &s.perturbed {
        let diff_grid = match &s.t_grid {
            Some(_) => evolution_grid.clone(),
            None => standard_t_grid(),
        };
        let pert = perturb_damping(&assembled, hat)?;
        let rep = decay_analysis(&assembled, &pert.perturbed, &diff_grid)?;
        let eps = pert.epsilon_operator;
        out.number("epsilon_pointwise", pert.epsilon_pointwise);
        out.number("epsilon_operator", eps);
        out.number("abscissa_perturbed", rep.abscissa_perturbed);
        out.value("stable_perturbed", rep.stable_perturbed);
        out.number("sup_diff", rep.sup_diff);
        out.number("t_at_sup", rep.t_at_sup);
        out.checks.push(Check::at_most(
            "operator-below-pointwise",
            "damping ε of the assembled system ≤ largest pointwise relative change",
            eps,
            pert.epsilon_pointwise,
            AGREE_TOL,
        ));
        if eps.is_finite() {
            out.checks.push(Check::at_most(
                "uniform-bound",
                "sup over t of ‖e^{𝒜̂t} − e^{𝒜t}‖ ≤ ε/2",
                rep.sup_diff,
                eps / 2.0,
                BOUND_SLACK,
            ));
        }
        if eps < 2.0 {
            out.checks.push(Check::holds(
                "stability-transfer",
                "ε < 2: both systems decay exponentially or neither does",
                rep.stable_base == rep.stable_perturbed,
            ));
        }
        if let Some(eta) = s.eta {
            let e = eta_check(&assembled.coefficients, hat, eta)?;
            out.number("eta", eta);
            out.number("eta_epsilon", e.epsilon);
            out.value("eta_premise", e.premise_holds);
            if e.premise_holds {
                out.checks.push(Check::at_most(
                    "eta-conversion",
                    "|ĉ − c| ≤ ηc implies pointwise ε ≤ η/√(1 − η)",
                    e.epsilon_pointwise,
                    e.epsilon,
                    1e-12 * e.epsilon,
                ));
            }
        }
        measured = Measured {
            epsilon: Some(eps),
            sup_diff: Some(rep.sup_diff),
            final_error: None,
        };
        out.curve("diff-norm", Curve::new("t", "diff_norm", rep.curve));
    }
    asserted(&s.assert, measured, &mut out)?;
    Ok(out)
}

fn trotter_kato(s: &TrotterKato) -> Result<Outcome> {
    if s.n_list.is_empty() || s.n_list.contains(&0) || s.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ScenarioError::config("n_list must be nonempty, positive and strictly increasing"));
    }
    if !(s.t_end > 0.0 && s.t_end.is_finite()) || s.points < 2 {
        return Err(ScenarioError::config("need t_end > 0 and points ≥ 2"));
    }
    let sys = SecondOrderSystem::new(s.m.to_matrix("M")?, s.c.to_matrix("C")?)?;
    let phase = build_aplus(&sys)?;
    let x: CVec = match &s.x {
        Some(x) => {
            if x.len() != 2 * sys.dim() {
                return Err(ScenarioError::config(format!(
                    "x has {} entries, expected {}",
                    x.len(),
                    2 * sys.dim()
                )));
            }
            CVec::from_iterator(x.len(), x.iter().map(|[re, im]| Complex64::new(*re, *im)))
        }
        None => {
            let mut rng = named_stream(s.seed, "trotter-kato");
            &phase.q * complex_gaussian_vec(2 * sys.dim(), &mut rng)
        }
    };
    let step = s.t_end / (s.points - 1) as f64;
    let mut t_grid: Vec<f64> = (0..s.points).map(|i| i as f64 * step).collect();
    t_grid.extend(log_grid(1e-5, s.t_end, 200, false));
    t_grid.sort_by(f64::total_cmp);
    t_grid.dedup();

    let table = trotter_kato_error(&sys, &phase, &x, &t_grid, &s.n_list)?;
    let last = table.final_error().unwrap_or(f64::INFINITY);
    let mut out = Outcome::default();
    out.value("nonincreasing", table.nonincreasing);
    out.number("final_error", last);
    out.value("phase_dim", phase.phase_dim());
    out.checks.push(Check::holds(
        "monotone-error",
        "sup over t of ‖e^{𝒜_n t}x − e^{𝒜t}x‖ is nonincreasing in n within 1e−8",
        table.nonincreasing,
    ));
    out.checks.push(Check::at_most(
        "convergence",
        "sup over t of ‖e^{𝒜_n t}x − e^{𝒜t}x‖ ≤ 1e−6 at the largest n",
        last,
        1e-6,
        0.0,
    ));
    asserted(
        &s.assert,
        Measured {
            final_error: Some(last),
            ..Measured::default()
        },
        &mut out,
    )?;
    out.curve(
        "error",
        Curve::new("n", "sup_error", table.rows.iter().map(|r| (r.n as f64, r.sup_error))),
    );
    out.tables.push(Table {
        file: "trotter_kato.csv".into(),
        header: TrotterKatoTable::CSV_HEADER.into(),
        rows: table
            .rows
            .iter()
            .map(|r| format!("{},{},{}", r.n, r.sup_error, r.t_at_sup))
            .collect(),
    });
    Ok(out)
}
