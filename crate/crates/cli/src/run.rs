use std::path::Path;

use crate::config::Scenario;
use crate::error::ScenarioError;
use crate::report::RunReport;
use crate::scenarios::run_scenario;

/// Scenario id: the config file name without extension.
pub fn scenario_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path.display(), e))?;
    Scenario::parse(&text).map_err(|e| ScenarioError::config(format!("{}: {e}", path.display())))
}

/// Runs one scenario file and writes its outputs to `out`.
///
/// A module failure still produces a report, marked failed and carrying the
/// error text; configuration and validation failures produce none.
pub fn run(config: &Path, out: &Path) -> Result<RunReport, ScenarioError> {
    let scenario = load(config)?;
    let mut report = RunReport {
        scenario: scenario_id(config),
        kind: scenario.kind().into(),
        seed: scenario.seed(),
        config: serde_json::to_value(&scenario).expect("scenario serializes"),
        passed: false,
        error: None,
        checks: Vec::new(),
        values: Default::default(),
        curves: Default::default(),
        files: Vec::new(),
    };
    let tables = match run_scenario(&scenario) {
        Ok(outcome) => {
            report.passed = outcome.checks.iter().all(|c| c.passed);
            report.checks = outcome.checks;
            report.values = outcome.values;
            report.curves = outcome.curves;
            outcome.tables
        }
        Err(ScenarioError::Module(e)) => {
            report.error = Some(e.to_string());
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    report.write(out, &tables)?;
    Ok(report)
}

pub fn exit_code(report: &RunReport) -> i32 {
    if report.passed {
        0
    } else {
        1
    }
}
