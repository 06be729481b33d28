//! The tolerance manifest: one TOML table per experiment. Each table holds
//! the parameters with their tolerances next to a wall-clock budget.

use std::collections::BTreeMap;

use normlab_core::pnormal::parse_rational;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The manifest shipped with the binary.
pub const BUILTIN: &str = include_str!("../tolerances.toml");

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct Manifest {
    pub schema: u32,
    pub experiments: BTreeMap<String, ExperimentConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct ExperimentConfig {
    pub criterion: Option<u32>,
    pub source: String,
    pub budget_s: f64,
    pub summary: String,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub tolerances: toml::Table,
}

impl Manifest {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled manifest is valid")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))
    }

    pub fn get(&self, name: &str) -> Result<&ExperimentConfig, CliError> {
        self.experiments
            .get(name)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment {name:?}")))
    }
}

impl ExperimentConfig {
    /// Applies `key=value` overrides to the parameters. Values are read as
    /// TOML literals, falling back to plain strings.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut cfg = self.clone();
        for (key, raw) in overrides {
            if !cfg.params.contains_key(key) {
                return Err(CliError::Usage(format!(
                    "experiment has no parameter {key:?}"
                )));
            }
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.clone()));
            cfg.params.insert(key.clone(), value);
        }
        Ok(cfg)
    }

    fn lookup<'a>(
        table: &'a toml::Table,
        kind: &str,
        key: &str,
    ) -> Result<&'a toml::Value, CliError> {
        table
            .get(key)
            .ok_or_else(|| CliError::Usage(format!("missing {kind} {key:?}")))
    }

    pub fn param_u64(&self, key: &str) -> Result<u64, CliError> {
        Self::lookup(&self.params, "parameter", key)?
            .as_integer()
            .and_then(|v| u64::try_from(v).ok())
            .ok_or_else(|| {
                CliError::Usage(format!("parameter {key:?} must be a nonnegative integer"))
            })
    }

    pub fn param_usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.param_u64(key)? as usize)
    }

    pub fn param_f64(&self, key: &str) -> Result<f64, CliError> {
        use num_traits::ToPrimitive;
        let bad = || CliError::Usage(format!("parameter {key:?} must be a number"));
        let v = Self::lookup(&self.params, "parameter", key)?;
        match v {
            toml::Value::String(s) => parse_rational(s)
                .ok()
                .and_then(|r| r.to_f64())
                .ok_or_else(bad),
            other => as_f64(other).ok_or_else(bad),
        }
    }

    /// Exact value of a parameter written as `"1/5"`, `"0.2"` or an integer.
    pub fn param_rational(&self, key: &str) -> Result<BigRational, CliError> {
        let v = Self::lookup(&self.params, "parameter", key)?;
        let text = match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            _ => {
                return Err(CliError::Usage(format!(
                    "parameter {key:?} must be a rational"
                )))
            }
        };
        parse_rational(&text).map_err(|e| CliError::Usage(format!("parameter {key:?}: {e}")))
    }

    pub fn param_str(&self, key: &str) -> Result<String, CliError> {
        let v = Self::lookup(&self.params, "parameter", key)?;
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
    }

    pub fn param(&self, key: &str) -> Result<&toml::Value, CliError> {
        Self::lookup(&self.params, "parameter", key)
    }

    pub fn tol(&self, key: &str) -> Result<f64, CliError> {
        as_f64(Self::lookup(&self.tolerances, "tolerance", key)?)
            .ok_or_else(|| CliError::Usage(format!("tolerance {key:?} must be a number")))
    }
}

pub(crate) fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}
