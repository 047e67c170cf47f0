use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, HarnessError, OutputFormat};

/// One acceptance check: `value` compared against `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"<"`, `"<="`, `">"` or `"=="`.
    pub comparison: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, "<", value < threshold)
    }

    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, "<=", value <= threshold)
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value, threshold, ">", value > threshold)
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 1.0, "==", ok)
    }

    fn new(name: &str, value: f64, threshold: f64, comparison: &str, passed: bool) -> Self {
        Self { name: name.to_string(), value, threshold, comparison: comparison.to_string(), passed }
    }
}

/// Summary of one run, written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub config: ExperimentConfig,
    pub derived: BTreeMap<String, serde_json::Value>,
    pub checks: Vec<Check>,
    /// Files written by the run, relative to the output directory.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            kind: config.kind.name().to_string(),
            seed: config.seed,
            trials: config.kind.is_stochastic().then(|| config.monte_carlo.as_ref().map(|m| m.trials)).flatten(),
            config: config.clone(),
            derived: BTreeMap::new(),
            checks: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn derive(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("derived value serialises");
        self.derived.insert(key.to_string(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A named result table, available as CSV text and as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
    pub json: serde_json::Value,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(&target, e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(&target, e))?;
    tmp.persist(&target).map_err(|e| HarnessError::io(&target, e.error))?;
    Ok(())
}

/// Writes every artifact in `format`, then `report.json` listing them.
///
/// Each file is written to a temporary file in `dir` and renamed into
/// place, so readers never see partial output.
pub fn write_outputs(
    report: &mut RunReport,
    artifacts: &[Artifact],
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<String>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files = Vec::new();
    for a in artifacts {
        let (name, bytes) = match format {
            OutputFormat::Csv => (format!("{}.csv", a.name), a.csv.clone().into_bytes()),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&a.json).expect("artifact serialises");
                s.push('\n');
                (format!("{}.json", a.name), s.into_bytes())
            }
        };
        write_atomic(dir, &name, &bytes)?;
        files.push(name);
    }
    files.push("report.json".to_string());
    report.files = files.clone();
    let mut json = serde_json::to_string_pretty(report).expect("report serialises");
    json.push('\n');
    write_atomic(dir, "report.json", json.as_bytes())?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    fn report() -> RunReport {
        let cfg = parse_config("kind = \"diffract\"\n[slit]\na = 1e-4\nlambda = 7e-7\nz2 = 1.0\nx2 = {start = -1e-3, stop = 1e-3, count = 3}\n").unwrap();
        RunReport::new(&cfg)
    }

    #[test]
    fn empty_result_writes_only_report() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = report();
        let files = write_outputs(&mut r, &[], dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(files, vec!["report.json"]);
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn rerun_replaces_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = |csv: &str| Artifact { name: "t".into(), csv: csv.into(), json: serde_json::json!([1]) };
        write_outputs(&mut report(), &[a("x\n1\n")], dir.path(), OutputFormat::Csv).unwrap();
        write_outputs(&mut report(), &[a("x\n2\n")], dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x\n2\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn json_keeps_full_precision() {
        let mut r = report();
        r.derive("x", 0.1f64 + 0.2);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("0.30000000000000004"));
    }

    #[test]
    fn checks() {
        assert!(Check::below("a", 1.0, 2.0).passed);
        assert!(!Check::above("a", 1.0, 2.0).passed);
        assert!(Check::at_most("a", 2.0, 2.0).passed);
        let mut r = report();
        assert!(r.all_passed());
        r.check(Check::holds("b", false));
        assert!(!r.all_passed());
    }
}
