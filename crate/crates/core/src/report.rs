//! Machine-readable run reports: JSON with a fixed key order, CSV defect
//! rows, and the mapping from check statuses to exit codes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::{DefectRow, Witness, CSV_HEADER};

pub const ARTIFACT_VERSION: &str = "sqclab-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub witness: Option<Witness>,
    pub n_samples: usize,
    pub seed: u64,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub artifact_version: String,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}` (expected json or csv)")),
        }
    }
}

impl Report {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckResult>) -> Self {
        Report {
            suite: suite.into(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            checks,
        }
    }

    /// 0 when nothing failed, 1 when any check failed.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.status == Status::Fail) {
            1
        } else {
            0
        }
    }

    /// One warning line per hypothesis failure.
    pub fn warnings(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::HypothesisFailure)
            .map(|c| format!("warning: {}: hypothesis not satisfied, conclusion not tested", c.name))
            .collect()
    }

    /// JSON (keys in declaration order) or one CSV defect row per witness.
    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let rows: Vec<DefectRow> = self
                    .checks
                    .iter()
                    .filter_map(|c| c.witness.as_ref())
                    .map(DefectRow::from_witness)
                    .collect();
                csv_lines(&rows)
            }
        }
    }
}

pub fn csv_lines(rows: &[DefectRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector;

    fn sample() -> Report {
        let w = Witness {
            x: Vector::new(vec![1.0, 0.0]).unwrap(),
            y: Vector::new(vec![1.0, 1.0]).unwrap(),
            lambda: 0.5,
            defect: 0.000125,
            f_values: [1.0, 1.0, 1.0],
            sigma: 1e-3,
        };
        let mut params = BTreeMap::new();
        params.insert("sigma".to_string(), 1e-3);
        Report::new(
            "paper",
            vec![
                CheckResult {
                    name: "ex-halfspace".into(),
                    params,
                    status: Status::Pass,
                    sigma_hat: Some(0.1 + 0.2),
                    sigma: Some(1e-3),
                    witness: Some(w),
                    n_samples: 10,
                    seed: 7,
                    runtime_ms: 3,
                },
                CheckResult {
                    name: "ex-projection-collapse".into(),
                    params: BTreeMap::new(),
                    status: Status::HypothesisFailure,
                    sigma_hat: None,
                    sigma: None,
                    witness: None,
                    n_samples: 0,
                    seed: 7,
                    runtime_ms: 0,
                },
            ],
        )
    }

    #[test]
    fn empty_report_layout() {
        let r = Report::new("paper", vec![]);
        let j: serde_json::Value = serde_json::from_str(&r.emit(Format::Json)).unwrap();
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            r#"{"artifact_version":"sqclab-report/1","checks":[],"suite":"paper"}"#
        );
        let compact = serde_json::to_string(&r).unwrap();
        assert_eq!(compact, r#"{"suite":"paper","artifact_version":"sqclab-report/1","checks":[]}"#);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn round_trips_losslessly() {
        let r = sample();
        let back: Report = serde_json::from_str(&r.emit(Format::Json)).unwrap();
        assert_eq!(back, r);
        let text = r.emit(Format::Json);
        assert!(text.find("\"name\"").unwrap() < text.find("\"params\"").unwrap());
        assert!(text.contains("\"witness\": null"));
        assert!(text.contains("hypothesis-failure"));
    }

    #[test]
    fn exit_codes_and_warnings() {
        let mut r = sample();
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.warnings().len(), 1);
        r.checks[0].status = Status::Fail;
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn csv_rows_follow_header() {
        let text = sample().emit(Format::Csv);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("1;0,1;1,0.5,1,1,1,0.000125,"));
        assert!(lines.next().is_none());
    }
}
