//! JSON run configuration. Flags override the file; the file overrides defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;
use wco_core::Symbol;

use crate::syntax::parse_symbol;

/// Largest truncation degree accepted from a flag or config.
pub const MAX_DEGREE: usize = 4096;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mini-syntax string or JSON expression.
    pub psi: Option<Value>,
    pub phi: Option<Value>,
    pub degree: Option<usize>,
    pub n_max: Option<usize>,
    pub terms: Option<usize>,
    pub grid: Option<String>,
    pub lift: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub class_tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.degree {
            check_degree(d)?;
        }
        for (name, v) in [("tolerance", self.tolerance), ("class_tolerance", self.class_tolerance)] {
            if let Some(v) = v {
                check_positive(name, v)?;
            }
        }
        Ok(())
    }
}

pub fn check_degree(d: usize) -> Result<usize> {
    if d == 0 || d > MAX_DEGREE {
        bail!("degree must lie in 1..={MAX_DEGREE}, got {d}");
    }
    Ok(d)
}

pub fn check_positive(name: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        bail!("{name} must be positive, got {v}");
    }
    Ok(v)
}

fn value_symbol(v: &Value) -> Result<Symbol> {
    match v {
        Value::String(s) => parse_symbol(s),
        other => Ok(Symbol::from_json(&other.to_string())?),
    }
}

/// Symbol from a flag if given, else from the config.
pub fn symbol(flag: Option<&str>, cfg: Option<&Value>, name: &str) -> Result<Symbol> {
    match (flag, cfg) {
        (Some(s), _) => parse_symbol(s).with_context(|| format!("--{name}")),
        (None, Some(v)) => value_symbol(v).with_context(|| format!("config field {name}")),
        (None, None) => bail!("missing --{name}"),
    }
}
