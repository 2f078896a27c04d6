use dissipgap_core::kernel::CMat;
use dissipgap_core::semigroup::{log_grid, standard_t_grid, validate_grid};
use dissipgap_core::second_order::Skew;
use dissipgap_core::wave1d::{FemMesh, WaveCoefficients};
use num_complex::Complex64;
use serde::de::{DeserializeOwned, IgnoredAny};
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// A real matrix as rows, or a complex one as separate real and imaginary rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Real(Vec<Vec<f64>>),
    Complex { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

fn rows_shape(rows: &[Vec<f64>], field: &str) -> Result<(usize, usize), ScenarioError> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ScenarioError::config(format!("{field}: rows have different lengths")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ScenarioError::config(format!("{field}: entries must be finite")));
    }
    Ok((rows.len(), cols))
}

impl MatrixSpec {
    pub fn to_matrix(&self, field: &str) -> Result<CMat, ScenarioError> {
        let (re, im) = match self {
            MatrixSpec::Real(re) => (re, None),
            MatrixSpec::Complex { re, im } => (re, Some(im)),
        };
        let shape = rows_shape(re, field)?;
        if let Some(im) = im {
            if rows_shape(im, field)? != shape {
                return Err(ScenarioError::config(format!("{field}: re and im shapes differ")));
            }
        }
        if shape.0 != shape.1 || shape.0 == 0 {
            return Err(ScenarioError::config(format!(
                "{field}: expected a nonempty square matrix, got {}×{}",
                shape.0, shape.1
            )));
        }
        Ok(CMat::from_fn(shape.0, shape.1, |i, j| {
            Complex64::new(re[i][j], im.map_or(0.0, |m| m[i][j]))
        }))
    }
}

fn matrix(spec: &Option<MatrixSpec>, field: &str) -> Result<Option<CMat>, ScenarioError> {
    spec.as_ref().map(|m| m.to_matrix(field)).transpose()
}

/// Either explicit times or a log-spaced range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Log {
        start: f64,
        end: f64,
        points: usize,
        #[serde(default = "yes")]
        include_zero: bool,
    },
}

fn yes() -> bool {
    true
}

pub fn grid(spec: &Option<GridSpec>) -> Result<Vec<f64>, ScenarioError> {
    let g = match spec {
        None => standard_t_grid(),
        Some(GridSpec::Points(p)) => p.clone(),
        Some(GridSpec::Log {
            start,
            end,
            points,
            include_zero,
        }) => {
            if !(*start > 0.0 && end > start && *points >= 2) {
                return Err(ScenarioError::config(
                    "t_grid: need 0 < start < end and points ≥ 2".to_string(),
                ));
            }
            log_grid(*start, *end, *points, *include_zero)
        }
    };
    validate_grid(&g).map_err(|e| ScenarioError::config(format!("t_grid: {e}")))?;
    Ok(g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSpec {
    Elements { elements: usize },
    Nodes { nodes: Vec<f64> },
}

impl MeshSpec {
    pub fn build(&self, a: f64, b: f64) -> Result<FemMesh, ScenarioError> {
        let mesh = match self {
            MeshSpec::Elements { elements } => FemMesh::uniform(a, b, *elements),
            MeshSpec::Nodes { nodes } => FemMesh::from_nodes(nodes.clone()),
        };
        mesh.map_err(|e| ScenarioError::config(format!("mesh: {e}")))
    }
}

/// Optional extra assertions; a value that the run exceeds fails the scenario.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertions {
    pub epsilon_at_most: Option<f64>,
    pub sup_diff_at_most: Option<f64>,
    pub final_error_at_most: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPair {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    pub dim: Option<usize>,
    #[serde(rename = "A")]
    pub a: Option<MatrixSpec>,
    #[serde(rename = "B")]
    pub b: Option<MatrixSpec>,
    pub t_grid: Option<GridSpec>,
    #[serde(default = "default_samples")]
    pub pointwise_samples: usize,
    #[serde(default)]
    pub assert: Assertions,
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretePair {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    pub dim: Option<usize>,
    #[serde(rename = "A")]
    pub a: Option<MatrixSpec>,
    #[serde(rename = "B")]
    pub b: Option<MatrixSpec>,
    #[serde(default = "default_norm")]
    pub norm_a: f64,
    #[serde(default = "default_norm")]
    pub norm_b: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_weak")]
    pub weak_samples: usize,
    #[serde(default)]
    pub assert: Assertions,
}

fn default_norm() -> f64 {
    0.9
}

fn default_n_max() -> u64 {
    200
}

fn default_weak() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondOrder {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: Option<MatrixSpec>,
    #[serde(rename = "C")]
    pub c: Option<MatrixSpec>,
    #[serde(rename = "C_hat")]
    pub c_hat: Option<MatrixSpec>,
    pub dim: Option<usize>,
    pub mass_rank: Option<usize>,
    pub damping_rank: Option<usize>,
    #[serde(default = "default_skew")]
    pub skew: Skew,
    /// Draw a range-compatible `Ĉ` when none is given.
    #[serde(default = "yes")]
    pub perturb: bool,
    pub lambdas: Option<Vec<[f64; 2]>>,
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub assert: Assertions,
}

fn default_skew() -> Skew {
    Skew::Generic
}

/// A mass/damping pair given inline or assembled from wave coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSource {
    pub coefficients: WaveCoefficients,
    pub mesh: MeshSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyChain {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: Option<MatrixSpec>,
    #[serde(rename = "C")]
    pub c: Option<MatrixSpec>,
    pub wave: Option<WaveSource>,
    #[serde(rename = "D")]
    pub d: Option<MatrixSpec>,
    /// `D = d_scale·C` when `D` is absent.
    pub d_scale: Option<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sectorial {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: MatrixSpec,
    #[serde(rename = "C")]
    pub c: MatrixSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedSpec {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    pub split: f64,
    #[serde(default = "one")]
    pub gamma_right: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wave1d {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    pub coefficients: Option<WaveCoefficients>,
    pub mesh: MeshSpec,
    /// Mixed-type coefficients on the mesh; replaces `coefficients`.
    pub mixed: Option<MixedSpec>,
    pub perturbed: Option<WaveCoefficients>,
    pub eta: Option<f64>,
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub assert: Assertions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterKato {
    #[serde(default, rename = "kind", skip_serializing)]
    _kind: Option<IgnoredAny>,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: MatrixSpec,
    #[serde(rename = "C")]
    pub c: MatrixSpec,
    /// Initial state; a seeded vector projected onto the phase space when absent.
    pub x: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<u64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub assert: Assertions,
}

fn default_n_list() -> Vec<u64> {
    vec![2, 8, 32, 128, 1024]
}

fn default_t_end() -> f64 {
    10.0
}

fn default_points() -> usize {
    401
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    RandomPair(RandomPair),
    DiscretePair(DiscretePair),
    SecondOrder(SecondOrder),
    HomotopyChain(HomotopyChain),
    Sectorial(Sectorial),
    Wave1d(Wave1d),
    TrotterKato(TrotterKato),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::RandomPair(_) => "random-pair",
            Scenario::DiscretePair(_) => "discrete-pair",
            Scenario::SecondOrder(_) => "second-order",
            Scenario::HomotopyChain(_) => "homotopy-chain",
            Scenario::Sectorial(_) => "sectorial",
            Scenario::Wave1d(_) => "wave1d",
            Scenario::TrotterKato(_) => "trotter-kato",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scenario::RandomPair(s) => s.seed,
            Scenario::DiscretePair(s) => s.seed,
            Scenario::SecondOrder(s) => s.seed,
            Scenario::HomotopyChain(s) => s.seed,
            Scenario::Sectorial(s) => s.seed,
            Scenario::Wave1d(s) => s.seed,
            Scenario::TrotterKato(s) => s.seed,
        }
    }

    /// Parses a scenario; errors carry the line and column of the offending value.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        #[derive(Deserialize)]
        struct Kind {
            kind: String,
        }
        fn body<T: DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
            serde_json::from_str(text).map_err(|e| ScenarioError::config(format!("invalid scenario: {e}")))
        }
        let Kind { kind } = body(text)?;
        Ok(match kind.as_str() {
            "random-pair" => Scenario::RandomPair(body(text)?),
            "discrete-pair" => Scenario::DiscretePair(body(text)?),
            "second-order" => Scenario::SecondOrder(body(text)?),
            "homotopy-chain" => Scenario::HomotopyChain(body(text)?),
            "sectorial" => Scenario::Sectorial(body(text)?),
            "wave1d" => Scenario::Wave1d(body(text)?),
            "trotter-kato" => Scenario::TrotterKato(body(text)?),
            other => {
                return Err(ScenarioError::config(format!(
                    "invalid scenario: unknown kind {other:?}; expected one of random-pair, discrete-pair, \
                     second-order, homotopy-chain, sectorial, wave1d, trotter-kato"
                )))
            }
        })
    }
}

pub fn pair_matrices(
    a: &Option<MatrixSpec>,
    b: &Option<MatrixSpec>,
) -> Result<Option<(CMat, CMat)>, ScenarioError> {
    match (matrix(a, "A")?, matrix(b, "B")?) {
        (Some(a), Some(b)) => {
            if a.shape() != b.shape() {
                return Err(ScenarioError::config("A and B have different sizes".to_string()));
            }
            Ok(Some((a, b)))
        }
        (None, None) => Ok(None),
        _ => Err(ScenarioError::config("give both A and B, or neither".to_string())),
    }
}

pub fn optional_matrix(spec: &Option<MatrixSpec>, field: &str) -> Result<Option<CMat>, ScenarioError> {
    matrix(spec, field)
}

pub fn dimension(dim: Option<usize>) -> Result<usize, ScenarioError> {
    match dim {
        Some(n) if (1..=64).contains(&n) => Ok(n),
        Some(n) => Err(ScenarioError::config(format!("dim = {n} must lie in 1..=64"))),
        None => Err(ScenarioError::config("missing field `dim` (or explicit matrices)".to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let texts = [
            r#"{"kind":"random-pair","seed":1,"dim":3}"#,
            r#"{"kind":"discrete-pair","seed":1,"dim":3}"#,
            r#"{"kind":"second-order","seed":1,"dim":3,"mass_rank":1}"#,
            r#"{"kind":"homotopy-chain","seed":1,"M":[[1]],"C":[[1]],"d_scale":3,"alpha":3}"#,
            r#"{"kind":"sectorial","seed":1,"M":[[1]],"C":{"re":[[1]],"im":[[3]]}}"#,
            r#"{"kind":"wave1d","seed":1,"mesh":{"elements":4},"mixed":{"split":0.5}}"#,
            r#"{"kind":"trotter-kato","seed":1,"M":[[1]],"C":[[1]]}"#,
        ];
        for t in texts {
            Scenario::parse(t).unwrap_or_else(|e| panic!("{t}: {e}"));
        }
    }

    #[test]
    fn missing_seed_and_unknown_fields() {
        let err = Scenario::parse(r#"{"kind":"random-pair","dim":3}"#).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        assert!(Scenario::parse(r#"{"kind":"random-pair","seed":1,"dim":3,"dimm":4}"#).is_err());
        assert!(Scenario::parse(r#"{"kind":"nope","seed":1}"#).is_err());
    }

    #[test]
    fn matrix_specs() {
        let m: MatrixSpec = serde_json::from_str(r#"{"re":[[1,0],[0,1]],"im":[[0,2],[-2,0]]}"#).unwrap();
        let m = m.to_matrix("M").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, 2.0));
        let ragged: MatrixSpec = serde_json::from_str("[[1,2],[3]]").unwrap();
        assert!(ragged.to_matrix("M").is_err());
        let rect: MatrixSpec = serde_json::from_str("[[1,2]]").unwrap();
        assert!(rect.to_matrix("M").is_err());
    }
}
