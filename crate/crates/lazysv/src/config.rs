//! Experiment configuration documents.
//!
//! A configuration file is one JSON object:
//!
//! ```json
//! { "schema_version": 1, "command": "tail",
//!   "params": { "n": 64, "trials": 10000 },
//!   "budgets": { "grid_cap": 2000000 },
//!   "constants": { "norm_const": 4.0 } }
//! ```
//!
//! `params` uses the subcommand's flag names with `-` replaced by `_`.
//! Command-line flags override file values; unknown keys are rejected.

use std::path::Path;

use lazysv_core::{Budgets, CalibrationConstants};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub schema_version: u32,
    pub command: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub budgets: Option<Budgets>,
    #[serde(default)]
    pub constants: Option<CalibrationConstants>,
}

pub fn load(path: &Path) -> CliResult<ConfigDoc> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn parse(text: &str) -> CliResult<ConfigDoc> {
    let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    Ok(doc)
}

/// Overlays the non-null fields of `flags` on the file parameters.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<&Map<String, Value>>, flags: &T) -> CliResult<T> {
    let mut merged = file.cloned().unwrap_or_default();
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::config(e.to_string()))? else {
        return Err(CliError::config("flags do not form a record"));
    };
    for (k, v) in given {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::config(format!("params: {e}")))
}

/// Budget overrides from `LAZYSV_GRID_CAP`, `LAZYSV_ENUM_BUDGET` and
/// `LAZYSV_FOURIER_BUDGET`.
pub fn apply_budget_env(mut b: Budgets) -> CliResult<Budgets> {
    let read = |name: &str| -> CliResult<Option<u64>> {
        match std::env::var(name) {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map(Some)
                .map_err(|_| CliError::config(format!("{name}={v:?} is not a nonnegative integer"))),
            Err(_) => Ok(None),
        }
    };
    if let Some(v) = read("LAZYSV_GRID_CAP")? {
        b.grid_cap = v;
    }
    if let Some(v) = read("LAZYSV_ENUM_BUDGET")? {
        b.tuple_enumeration = v;
        b.subset_enumeration = v;
        b.exhaustive_space = v;
    }
    if let Some(v) = read("LAZYSV_FOURIER_BUDGET")? {
        b.fourier_work = v;
    }
    Ok(b)
}
