use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::report::write_file;
use crate::run::{exit_code, run, scenario_id};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Scenario files, relative to the manifest's directory.
    pub scenarios: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub id: String,
    pub kind: Option<String>,
    pub passed: bool,
    pub exit_code: i32,
    pub checks_passed: usize,
    pub checks_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub scenarios: usize,
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<SuiteEntry>,
}

impl SuiteSummary {
    pub fn exit_code(&self) -> i32 {
        self.results.iter().map(|e| e.exit_code).max().unwrap_or(0)
    }
}

fn resolve(manifest_path: &Path) -> Result<Vec<(String, PathBuf)>, ScenarioError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| ScenarioError::io(manifest_path.display(), e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| ScenarioError::config(format!("{}: invalid manifest: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let paths: Vec<PathBuf> = manifest.scenarios.iter().map(|p| base.join(p)).collect();
    let missing: Vec<String> = paths
        .iter()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ScenarioError::config(format!(
            "{} missing scenario file(s):\n  {}",
            missing.len(),
            missing.join("\n  ")
        )));
    }
    let mut entries: Vec<(String, PathBuf)> = paths.into_iter().map(|p| (scenario_id(&p), p)).collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ScenarioError::config(format!("duplicate scenario id {:?}", w[0].0)));
    }
    Ok(entries)
}

/// Runs every scenario of the manifest into `out/<id>/` and writes `out/summary.json`.
pub fn suite(manifest_path: &Path, out: &Path) -> Result<SuiteSummary, ScenarioError> {
    let entries = resolve(manifest_path)?;
    let results: Vec<SuiteEntry> = entries
        .par_iter()
        .map(|(id, path)| match run(path, &out.join(id)) {
            Ok(r) => SuiteEntry {
                id: id.clone(),
                kind: Some(r.kind.clone()),
                passed: r.passed,
                exit_code: exit_code(&r),
                checks_passed: r.checks.iter().filter(|c| c.passed).count(),
                checks_total: r.checks.len(),
                error: r.error.clone(),
            },
            Err(e) => SuiteEntry {
                id: id.clone(),
                kind: None,
                passed: false,
                exit_code: e.exit_code(),
                checks_passed: 0,
                checks_total: 0,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let passed = results.iter().filter(|e| e.passed).count();
    let summary = SuiteSummary {
        scenarios: results.len(),
        passed,
        failed: results.len() - passed,
        results,
    };
    std::fs::create_dir_all(out).map_err(|e| ScenarioError::io(out.display(), e))?;
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_file(&out.join("summary.json"), &json)?;
    Ok(summary)
}
