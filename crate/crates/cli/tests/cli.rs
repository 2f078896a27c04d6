use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dissipgap"));
    cmd.env_remove("DISSIPGAP_THREADS");
    cmd
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, out: &Path) -> Output {
    bin().arg("run").arg(config).arg("--out").arg(out).output().unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn curve_rows(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn emit(report: &Path, name: &str) -> Output {
    bin().arg("emit-curve").arg(report).arg(name).output().unwrap()
}

#[test]
fn random_pair_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "pair.json", r#"{"kind":"random-pair","seed":42,"dim":6}"#);
    let out = dir.path().join("out");
    let o = run(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["scenario"], "pair");
    let eps = r["values"]["epsilon"].as_f64().unwrap();
    let ratio = r["values"]["ratio"].as_f64().unwrap();
    assert!(eps.is_finite() && eps > 0.0);
    assert!(ratio > 0.0 && ratio <= 1.0, "ratio {ratio}");
    assert_eq!(check(&r, "uniform-bound")["passed"], true);
    let files: Vec<&str> = r["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert_eq!(files, ["diff-norm.csv", "perturbation.csv", "report.json"]);
    for f in files {
        assert!(out.join(f).is_file());
    }
    let table = std::fs::read_to_string(out.join("perturbation.csv")).unwrap();
    assert!(table.starts_with("dim,seed,epsilon,sup_diff,t_at_sup,ratio,dual_epsilon,stable_A,stable_B\n6,42,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "so.json",
        r#"{"kind":"second-order","seed":5,"dim":3,"mass_rank":2,"skew":"sectorial"}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&cfg, &a).status.code(), Some(0));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    for f in ["report.json", "diff-norm.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn undamped_wave_is_isometric() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "wave.json",
        r#"{"kind":"wave1d","seed":1,"mesh":{"elements":8},
            "coefficients":{"a":0,"b":1,"zeta":0,
              "pieces":[{"x0":0,"x1":1,"rho":1,"gamma":0,"d":0,"k":1}]}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let r = report(&out);
    let iso = check(&r, "isometry");
    assert_eq!(iso["passed"], true);
    assert!(iso["measured"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"kind":"random-pair","dim":3}"#);
    let out = dir.path().join("out");
    let o = run(&cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing field `seed`"), "{err}");
    assert!(!out.join("report.json").exists());
}

#[test]
fn malformed_config_names_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"kind\": \"random-pair\",\n  \"seed\": 1,\n  \"dim\": \"six\"\n}");
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("at line 4 column"), "{err}");
}

#[test]
fn invalid_matrix_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"kind":"random-pair","seed":1,"A":[[1]],"B":[[-1]]}"#);
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not dissipative"));
}

#[test]
fn empty_manifest_passes() {
    let dir = TempDir::new().unwrap();
    let manifest = write(dir.path(), "manifest.json", r#"{"scenarios":[]}"#);
    let out = dir.path().join("out");
    let o = bin().arg("suite").arg(&manifest).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenarios"], 0);
    assert_eq!(summary["failed"], 0);
}

#[test]
fn doctored_assertion_fails_the_suite() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "good.json", r#"{"kind":"random-pair","seed":1,"dim":3}"#);
    write(
        dir.path(),
        "doctored.json",
        r#"{"kind":"random-pair","seed":1,"dim":3,"assert":{"epsilon_at_most":1e-6}}"#,
    );
    let manifest = write(dir.path(), "manifest.json", r#"{"scenarios":["good.json","doctored.json"]}"#);
    let out = dir.path().join("out");
    let o = bin().arg("suite").arg(&manifest).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!((summary["passed"].as_u64(), summary["failed"].as_u64()), (Some(1), Some(1)));
    let ids: Vec<&str> = summary["results"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["doctored", "good"]);
    let r = report(&out.join("doctored"));
    assert_eq!(check(&r, "assert.epsilon_at_most")["passed"], false);
}

#[test]
fn missing_manifest_entries_are_enumerated() {
    let dir = TempDir::new().unwrap();
    let manifest = write(dir.path(), "manifest.json", r#"{"scenarios":["nope1.json","nope2.json"]}"#);
    let o = bin().arg("suite").arg(&manifest).arg("--out").arg(dir.path().join("out")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nope1.json") && err.contains("nope2.json"), "{err}");
}

#[test]
fn trivial_pair_curve_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "same.json",
        r#"{"kind":"random-pair","seed":1,"A":[[-1,2],[-2,-3]],"B":[[-1,2],[-2,-3]]}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let o = emit(&out.join("report.json"), "diff-norm");
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("t,diff_norm\n") && !csv.contains('\r'));
    let rows = curve_rows(&csv);
    assert_eq!(rows.len(), 257);
    assert!(rows.iter().all(|&(_, v)| v == 0.0));
}

#[test]
fn scalar_curve_peaks_at_ln_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "scalar.json",
        r#"{"kind":"random-pair","seed":1,"A":[[-1]],"B":[[-2]],
            "t_grid":{"start":0.001,"end":50,"points":2001}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let file = dir.path().join("curve.csv");
    let o = bin()
        .arg("emit-curve")
        .arg(out.join("report.json"))
        .arg("diff-norm")
        .arg("--out")
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let rows = curve_rows(&std::fs::read_to_string(&file).unwrap());
    let (t, v) = rows.iter().copied().fold((0.0, 0.0), |b, r| if r.1 > b.1 { r } else { b });
    assert!((v - 0.25).abs() < 1e-6, "{v}");
    assert!((t - std::f64::consts::LN_2).abs() < 3e-3, "{t}");
    let r = report(&out);
    assert!((r["values"]["epsilon"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn unknown_curve_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "pair.json", r#"{"kind":"random-pair","seed":3,"dim":2}"#);
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let o = emit(&out.join("report.json"), "nonexistent");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diff-norm"));
}

#[test]
fn trotter_kato_error_is_nonincreasing() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "tk.json",
        r#"{"kind":"trotter-kato","seed":2,"M":[[4,0,0],[0,0.001,0],[0,0,0]],"C":[[1,0,0],[0,1,0],[0,0,1]],
            "n_list":[2,8,32,128],"points":101}"#,
    );
    let out = dir.path().join("out");
    run(&cfg, &out);
    let r = report(&out);
    assert_eq!(check(&r, "monotone-error")["passed"], true);
    let o = emit(&out.join("report.json"), "error");
    let rows = curve_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), [2.0, 8.0, 32.0, 128.0]);
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-8), "{rows:?}");
}

#[test]
fn bad_thread_setting_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "pair.json", r#"{"kind":"random-pair","seed":3,"dim":2}"#);
    let o = bin()
        .env("DISSIPGAP_THREADS", "zero")
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
