//! Machine-readable verification reports shared by the CLI and the tests.

use serde::Serialize;

/// Version of every JSON document this crate emits.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl Report {
    pub fn new(suite: &str, params: serde_json::Value) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            suite: suite.to_string(),
            params,
            checks: Vec::new(),
            data: None,
        }
    }

    /// Records a check from any fallible verification.
    pub fn record<T, E: std::fmt::Display>(&mut self, name: &str, outcome: &Result<T, E>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: outcome.is_ok(),
            detail: outcome.as_ref().err().map(|e| e.to_string()),
        });
    }

    pub fn record_bool(&mut self, name: &str, passed: bool, detail: impl Into<Option<String>>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: if passed { None } else { detail.into() },
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
