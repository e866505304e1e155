//! Verification reports: one record per check, serializable to JSON and CSV.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

/// Non-finite floats are written as strings so reports stay valid JSON.
mod lenient_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub status: Status,
    #[serde(with = "lenient_f64")]
    pub worst_residual: f64,
    #[serde(with = "lenient_f64")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    pub fn new(id: &str, anchor: &str) -> Self {
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            status: Status::Pass,
            worst_residual: 0.0,
            tolerance: 0.0,
            witness: Vec::new(),
            note: String::new(),
        }
    }

    pub fn verdict(mut self, pass: bool, residual: f64, tolerance: f64) -> Self {
        self.status = if pass { Status::Pass } else { Status::Fail };
        self.worst_residual = residual;
        self.tolerance = tolerance;
        self
    }

    pub fn skipped(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = reason.into();
        self
    }

    pub fn witness(mut self, points: Vec<Vec<f64>>) -> Self {
        self.witness = points;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub wall_time_ms: u64,
}

impl VerifyReport {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            checks: Vec::new(),
            grid: None,
            tolerances: BTreeMap::new(),
            seed: crate::tol::DEFAULT_SEED,
            wall_time_ms: 0,
        }
    }

    pub fn push(&mut self, check: Check) {
        if check.status != Status::Skipped && check.tolerance.is_finite() {
            self.tolerances.entry(check.id.clone()).or_insert(check.tolerance);
        }
        self.checks.push(check);
    }

    /// Append another report's checks, prefixing their ids.
    pub fn absorb(&mut self, prefix: &str, other: VerifyReport) {
        for mut c in other.checks {
            c.id = if prefix.is_empty() { c.id } else { format!("{prefix}/{}", c.id) };
            self.push(c);
        }
    }

    pub fn set_grid(&mut self, grid: &GridSpec) {
        self.grid = Some(grid.describe());
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per check: id, anchor, status, residual, tolerance.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "anchor", "status", "worst_residual", "tolerance"])?;
        for c in &self.checks {
            w.write_record([
                c.id.as_str(),
                c.anchor.as_str(),
                c.status.as_str(),
                &fmt_float(c.worst_residual),
                &fmt_float(c.tolerance),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8 csv"))
    }
}

pub(crate) fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// Aggregated view over several reports. Wall times are left out so that
/// identical inputs give identical summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub reports: Vec<SummaryEntry>,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub rows: Vec<SummaryRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub source: String,
    pub suite: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub suite: String,
    pub check: String,
    pub anchor: String,
    pub status: Status,
    #[serde(with = "lenient_f64")]
    pub worst_residual: f64,
}

impl Summary {
    /// Build from (source name, report) pairs; order follows the input.
    pub fn build(reports: &[(String, VerifyReport)]) -> Self {
        let mut rows = Vec::new();
        for (_, r) in reports {
            for c in &r.checks {
                rows.push(SummaryRow {
                    suite: r.suite.clone(),
                    check: c.id.clone(),
                    anchor: c.anchor.clone(),
                    status: c.status,
                    worst_residual: c.worst_residual,
                });
            }
        }
        let count = |s: Status| rows.iter().filter(|r| r.status == s).count();
        Summary {
            reports: reports
                .iter()
                .map(|(src, r)| SummaryEntry { source: src.clone(), suite: r.suite.clone() })
                .collect(),
            total: rows.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            skipped: count(Status::Skipped),
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "check", "anchor", "status", "worst_residual"])?;
        for r in &self.rows {
            w.write_record([
                r.suite.as_str(),
                r.check.as_str(),
                r.anchor.as_str(),
                r.status.as_str(),
                &fmt_float(r.worst_residual),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8 csv"))
    }
}
