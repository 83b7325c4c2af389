//! Named verification outcomes shared by every module and the CLI.

use std::time::Instant;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One verification: `metric` is an error magnitude, compared against `tolerance`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub metric: f64,
    pub tolerance: f64,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Pass iff `metric <= tolerance` (NaN fails).
    pub fn within(name: impl Into<String>, metric: f64, tolerance: f64) -> Check {
        let status = if metric <= tolerance { Status::Pass } else { Status::Fail };
        Check {
            name: name.into(),
            status,
            metric,
            tolerance,
            elapsed_ms: 0,
            detail: None,
        }
    }

    /// Exact comparison of two counts.
    pub fn count(name: impl Into<String>, found: usize, expected: usize) -> Check {
        Check::within(name, found.abs_diff(expected) as f64, 0.0)
            .with_detail(format!("found {found}, expected {expected}"))
    }

    /// A boolean condition, reported as metric 0 (holds) or 1 (violated).
    pub fn holds(name: impl Into<String>, ok: bool) -> Check {
        Check::within(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn error(name: impl Into<String>, err: &crate::Error) -> Check {
        Check {
            name: name.into(),
            status: Status::Error,
            metric: f64::NAN,
            tolerance: 0.0,
            elapsed_ms: 0,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = Some(detail.into());
        self
    }

    pub fn since(mut self, start: Instant) -> Check {
        self.elapsed_ms = start.elapsed().as_millis() as u64;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

/// Largest value of an iterator of non-negative errors (0 when empty, NaN propagates).
pub fn max_error(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}
