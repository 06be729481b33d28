//! Experiment reports: measured versus expected values plus a content hash
//! of the inputs.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Bumped whenever the report layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// How a measured value is compared with its expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
    AtLeast,
    /// `|measured - expected| <= tolerance`.
    Within,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: Value,
    pub expected: Value,
    pub relation: Relation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn equal(name: &str, measured: impl Serialize, expected: impl Serialize) -> Self {
        let measured = to_value(measured);
        let expected = to_value(expected);
        let passed = measured == expected;
        Check {
            name: name.into(),
            measured,
            expected,
            relation: Relation::Equal,
            tolerance: None,
            passed,
        }
    }

    pub fn at_most(name: &str, measured: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            measured: to_value(measured),
            expected: to_value(bound),
            relation: Relation::AtMost,
            tolerance: None,
            passed: measured <= bound,
        }
    }

    pub fn at_least(name: &str, measured: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            measured: to_value(measured),
            expected: to_value(bound),
            relation: Relation::AtLeast,
            tolerance: None,
            passed: measured >= bound,
        }
    }

    pub fn within(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured: to_value(measured),
            expected: to_value(expected),
            relation: Relation::Within,
            tolerance: Some(tolerance),
            passed: (measured - expected).abs() <= tolerance,
        }
    }

    /// A boolean property that must hold.
    pub fn holds(name: &str, ok: bool) -> Self {
        Check::equal(name, ok, true)
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    pub source: String,
    pub parameters: Value,
    pub tolerances: Value,
    pub checks: Vec<Check>,
    /// Free-form measurements for plotting.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    /// Every check passed.
    pub passed: bool,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub within_budget: bool,
    /// Git-style SHA-256 of the canonical JSON of the experiment inputs.
    pub input_hash: String,
}

impl ExperimentReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} ({:.3} s of {:.3} s budget)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.experiment,
            self.runtime_s,
            self.budget_s
        );
        for c in &self.checks {
            let tol = c.tolerance.map(|t| format!(" ± {t}")).unwrap_or_default();
            out.push_str(&format!(
                "  [{}] {}: measured {} vs {:?} {}{}\n",
                if c.passed { "ok" } else { "!!" },
                c.name,
                c.measured,
                c.relation,
                c.expected,
                tol
            ));
        }
        out
    }
}

/// `sha256("blob <len>\0" + bytes)`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks() {
        assert!(Check::within("x", 0.5, 0.49, 0.011).passed);
        assert!(!Check::within("x", 0.5, 0.48, 0.011).passed);
        assert!(Check::at_most("x", -4100.0, -4000.0).passed);
        assert!(!Check::at_least("x", 3.0, 4.0).passed);
        assert!(Check::equal("x", vec![1, 2], [1, 2]).passed);
        assert!(!Check::holds("x", false).passed);
    }

    #[test]
    fn hash_is_git_style() {
        // Matches `git hash-object --stdin` framing, with SHA-256.
        let h = content_hash(b"");
        assert_eq!(h.len(), 64);
        assert_eq!(h, content_hash(b""));
        assert_ne!(h, content_hash(b"x"));
    }
}
