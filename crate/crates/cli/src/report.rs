use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ScenarioError;

/// An `f64` that keeps infinities and NaN in JSON as the strings `"inf"`, `"-inf"`, `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            F(f64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::F(v) => Ok(Num(v)),
            Raw::S(s) => match s.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

/// One asserted relation `measured ≤ bound + tolerance` (or equality within tolerance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: String,
    pub measured: Num,
    pub bound: Num,
    pub tolerance: Num,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, relation: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            relation: relation.into(),
            measured: Num(measured),
            bound: Num(bound),
            tolerance: Num(tolerance),
            passed: measured <= bound + tolerance,
        }
    }

    pub fn close(name: &str, relation: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            relation: relation.into(),
            measured: Num(measured),
            bound: Num(expected),
            tolerance: Num(tolerance),
            passed: (measured - expected).abs() <= tolerance,
        }
    }

    /// A yes/no condition, recorded as `1` or `0` against `1`.
    pub fn holds(name: &str, relation: &str, ok: bool) -> Self {
        Check {
            name: name.into(),
            relation: relation.into(),
            measured: Num(if ok { 1.0 } else { 0.0 }),
            bound: Num(1.0),
            tolerance: Num(0.0),
            passed: ok,
        }
    }
}

/// A plot-ready two-column series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub x: String,
    pub y: String,
    pub points: Vec<(Num, Num)>,
}

impl Curve {
    pub fn new(x: &str, y: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Curve {
            x: x.into(),
            y: y.into(),
            points: points.into_iter().map(|(a, b)| (Num(a), Num(b))).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.x, self.y);
        for (a, b) in &self.points {
            let _ = writeln!(out, "{},{}", a.0, b.0);
        }
        out
    }
}

/// A CSV table written next to the report.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub passed: bool,
    /// Module error that stopped the run, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub curves: BTreeMap<String, Curve>,
    pub files: Vec<String>,
}

impl RunReport {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::io(path.display(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| ScenarioError::config(format!("{}: invalid report: {e}", path.display())))
    }

    pub fn curve(&self, name: &str) -> Result<&Curve, ScenarioError> {
        self.curves.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.curves.keys().map(String::as_str).collect();
            ScenarioError::config(format!(
                "unknown curve {name:?}; available: {}",
                if known.is_empty() { "none".to_string() } else { known.join(", ") }
            ))
        })
    }

    /// Writes `report.json`, one CSV per curve and the tables into `dir`.
    pub fn write(&mut self, dir: &Path, tables: &[Table]) -> Result<(), ScenarioError> {
        std::fs::create_dir_all(dir).map_err(|e| ScenarioError::io(dir.display(), e))?;
        let mut files = vec!["report.json".to_string()];
        for (name, curve) in &self.curves {
            let file = format!("{name}.csv");
            write_file(&dir.join(&file), &curve.to_csv())?;
            files.push(file);
        }
        for t in tables {
            write_file(&dir.join(&t.file), &t.to_csv())?;
            files.push(t.file.clone());
        }
        files.sort();
        self.files = files;
        let mut json = serde_json::to_string_pretty(self).expect("report serializes");
        json.push('\n');
        write_file(&dir.join("report.json"), &json)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), ScenarioError> {
    std::fs::write(path, text).map_err(|e| ScenarioError::io(path.display(), e))
}

/// JSON value of an `f64`, with non-finite values as strings.
pub fn num(v: f64) -> serde_json::Value {
    serde_json::to_value(Num(v)).expect("number serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_round_trips() {
        for v in [0.1 + 0.2, f64::INFINITY, f64::NEG_INFINITY, -0.0, 1e-300, f64::MAX] {
            let s = serde_json::to_string(&Num(v)).unwrap();
            let back: Num = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0.to_bits(), v.to_bits(), "{s}");
        }
        let nan: Num = serde_json::from_str(&serde_json::to_string(&Num(f64::NAN)).unwrap()).unwrap();
        assert!(nan.0.is_nan());
    }

    #[test]
    fn csv_values_round_trip() {
        let values = [std::f64::consts::LN_2, 1.0 / 3.0, 2.0f64.sqrt() * 1e-17, 123456789.12345679];
        let csv = Curve::new("t", "v", values.iter().map(|&v| (v, -v))).to_csv();
        assert!(csv.starts_with("t,v\n") && !csv.contains('\r'));
        for (line, v) in csv.lines().skip(1).zip(values) {
            let (a, b) = line.split_once(',').unwrap();
            assert_eq!(a.parse::<f64>().unwrap(), v);
            assert_eq!(b.parse::<f64>().unwrap(), -v);
        }
    }

    #[test]
    fn checks() {
        assert!(Check::at_most("a", "x ≤ y", 1.0, 1.0, 0.0).passed);
        assert!(!Check::at_most("a", "x ≤ y", 1.1, 1.0, 1e-3).passed);
        assert!(Check::at_most("a", "x ≤ y", 1.0, f64::INFINITY, 0.0).passed);
        assert!(!Check::close("a", "x = y", f64::NAN, 1.0, 1.0).passed);
    }
}
