//! Versioned JSON reports.
//!
//! ```text
//! {
//!   "schema": 1,
//!   "command": "simulate",
//!   "config": { ...every resolved setting except workers and report path... },
//!   "results": { ...command-specific... },
//!   "validations": [ { "name": ..., "passed": ..., "detail": ... } ],
//!   "passed": true
//! }
//! ```
//! Object keys are sorted.

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validation {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Validation {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    /// Passes iff `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("{value:.6e} <= {limit:.6e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub validations: Vec<Validation>,
    /// True iff every validation passed.
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: Value, results: Value, validations: Vec<Validation>) -> Self {
        let passed = validations.iter().all(|v| v.passed);
        Self {
            schema: SCHEMA,
            command: command.into(),
            config,
            results,
            validations,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports hold only JSON-safe values");
        s.push('\n');
        s
    }
}

/// `serde_json::to_value` for types whose serialization cannot fail.
pub fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}
