//! Deterministic run reports. Identical configs serialize to identical
//! bytes: field order is fixed by the struct definitions, floats print via
//! the shortest round-trip representation, and nothing time- or
//! machine-dependent enters the file (wall-clock goes to stderr).

use serde::{Deserialize, Serialize};

use crate::config::{Command, Dims, InstanceSpec, MatrixData, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One verified quantity: the measured value against its pinned threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn bounded(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.to_string(),
            status: if value <= threshold {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            value: Some(value),
            threshold: Some(threshold),
            note: None,
        }
    }

    pub fn flag(name: &str, ok: bool, note: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            value: None,
            threshold: None,
            note: Some(note.into()),
        }
    }

    pub fn skipped(name: &str, note: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            status: CheckStatus::Skipped,
            value: None,
            threshold: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub values: Vec<f64>,
}

/// Echo of the matrices the run actually used.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InstanceEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<MatrixData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<MatrixData>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixData>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub command: Command,
    pub seed: u64,
    pub dims: Dims,
    pub tolerance: ToleranceConfig,
    pub instance_spec: InstanceSpec,
    pub instance: InstanceEcho,
    pub checks: Vec<Check>,
    pub curves: Vec<Curve>,
    pub verdict: String,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status != CheckStatus::Fail)
    }

    pub fn finalize(mut self) -> Self {
        self.verdict = if self.all_passed() { "pass" } else { "fail" }.to_string();
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Flat table with header `step,quantity,value`, one row per curve step.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("step,quantity,value\n");
        for curve in &self.curves {
            for (i, v) in curve.values.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", i + 1, curve.name, v));
            }
        }
        out
    }
}
