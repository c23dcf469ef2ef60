//! Machine-readable check results.

use std::fmt;

use serde::Serialize;

/// One verified property. `statistic` is compared against `bound`; how they
/// are compared is part of the check's name and detail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statistic: f64, bound: f64, pass: bool) -> Self {
        CheckReport { name: name.into(), statistic, bound, pass, detail: String::new() }
    }

    /// Passes when `statistic <= bound`.
    pub fn at_most(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        Self::new(name, statistic, bound, statistic <= bound)
    }

    /// Passes when `statistic >= bound`.
    pub fn at_least(name: impl Into<String>, statistic: f64, bound: f64) -> Self {
        Self::new(name, statistic, bound, statistic >= bound)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report fields serialize")
    }
}

/// Scientific notation for very small or large magnitudes.
fn num(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-3..1e7).contains(&x.abs()) {
        format!("{x:.4e}")
    } else {
        format!("{x}")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: statistic={} bound={}", self.name, num(self.statistic), num(self.bound))?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Renders reports as JSONL, one per line.
pub fn to_jsonl(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| r.to_json() + "\n").collect()
}
