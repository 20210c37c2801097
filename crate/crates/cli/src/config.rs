//! Run configuration: a flat `key = value` file or a previously emitted
//! JSON manifest, merged under the command-line flags.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Settings read from a config file. Every field is optional; flags win.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct FileConfig {
    pub command: Option<String>,
    pub format: Option<String>,
    pub params: Map<String, Value>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            Self::from_manifest(&text)
        } else {
            Self::from_flat(&text)
        }
    }

    /// A manifest written by this tool: `{command, format, params, ...}`.
    pub fn from_manifest(text: &str) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(CliError::Usage("JSON config must be an object".into()));
        };
        let take_string = |obj: &mut Map<String, Value>, key: &str| -> Result<Option<String>, CliError> {
            match obj.remove(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s)),
                Some(other) => Err(CliError::Usage(format!(
                    "config key '{key}' must be a string, got {other}"
                ))),
            }
        };
        let command = take_string(&mut obj, "command")?;
        let format = take_string(&mut obj, "format")?;
        let params = match obj.remove("params") {
            None => Map::new(),
            Some(Value::Object(m)) => m,
            Some(_) => return Err(CliError::Usage("config key 'params' must be an object".into())),
        };
        Ok(Self {
            command,
            format,
            params,
        })
    }

    /// Lines of `key = value`; `#` starts a comment. Values that parse as
    /// JSON scalars (numbers, booleans, null) are typed, the rest are strings.
    pub fn from_flat(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_lowercase().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "command" => config.command = Some(value.to_string()),
                "format" => config.format = Some(value.to_string()),
                _ => {
                    let typed = match serde_json::from_str::<Value>(value) {
                        Ok(v @ (Value::Number(_) | Value::Bool(_) | Value::Null)) => v,
                        _ => Value::String(value.to_string()),
                    };
                    config.params.insert(key, typed);
                }
            }
        }
        Ok(config)
    }
}

/// Overlays the flags that were given onto the config parameters and
/// deserializes the fully resolved parameter set.
pub fn resolve<F: Serialize, P: DeserializeOwned>(flags: &F, base: &Map<String, Value>) -> Result<P, CliError> {
    let mut merged = base.clone();
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Internal(e.to_string()))? else {
        return Err(CliError::Internal("flags did not serialize to an object".into()));
    };
    for (key, value) in given {
        if !value.is_null() {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid parameters: {e}")))
}
