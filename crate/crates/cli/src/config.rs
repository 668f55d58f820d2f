//! Config loading, `--set` overrides and the canonical config hash.

use std::fs;
use std::path::Path;

use fracobs_core::ExperimentConfig;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Reads a JSON config file, applies `key=value` overrides and deserializes.
pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    from_value(value)
}

pub fn from_value(value: Value) -> Result<ExperimentConfig, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Sets a dotted path (`grid.t_end=20`) in a JSON tree. The value is parsed as
/// JSON when possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override `{spec}` has an empty key")));
    }
    let new = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(CliError::Config(format!("override `{key}`: `{}` is not a section", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), new);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// SHA-256 of the config serialized with sorted keys.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    // serde_json's default map is ordered by key, so this is canonical.
    let value = serde_json::to_value(cfg).expect("config serializes");
    let text = serde_json::to_string(&value).expect("value serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}
