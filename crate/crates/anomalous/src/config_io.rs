//! Resolving a [`DetectorConfig`] from defaults, a preset, a JSON file and
//! `key=value` overrides, in that order of precedence.

use std::fs;
use std::path::Path;

use anomalous_core::config::{ConfigValue, CONFIG_KEYS};
use anomalous_core::{CoreError, DetectorConfig, Preset};
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: DetectorConfig,
    pub preset: Option<Preset>,
}

pub fn parse_preset(name: &str) -> Result<Preset> {
    name.parse().map_err(|_| Error::UnknownPreset(name.to_string()))
}

pub fn load_config(
    path: Option<&Path>,
    preset: Option<&str>,
    overrides: &[String],
) -> Result<LoadedConfig> {
    let preset = preset.map(parse_preset).transpose()?;
    let mut config = preset.map(Preset::config).unwrap_or_default();

    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        apply_document(&mut config, &doc)?;
    }

    for item in overrides {
        let (key, raw) = item.split_once('=').ok_or_else(|| CoreError::InvalidValue {
            key: item.clone(),
            reason: "override must be key=value".into(),
        })?;
        let key = key.trim();
        let value = match serde_json::from_str::<Value>(raw) {
            Ok(v) => to_config_value(key, &v)?,
            Err(_) => ConfigValue::Str(raw.to_string()),
        };
        config.set(key, &value)?;
    }
    config.validate()?;
    Ok(LoadedConfig { config, preset })
}

/// Applies a config document; nested objects are read as dotted keys.
pub fn apply_document(config: &mut DetectorConfig, doc: &Value) -> Result<()> {
    let Value::Object(map) = doc else {
        return Err(Error::Config(CoreError::InvalidValue {
            key: "<document>".into(),
            reason: "config must be a JSON object".into(),
        }));
    };
    let mut flat = Vec::new();
    flatten("", map, &mut flat);
    for (key, value) in flat {
        config.set(&key, &to_config_value(&key, value)?)?;
    }
    Ok(())
}

fn flatten<'a>(prefix: &str, map: &'a Map<String, Value>, out: &mut Vec<(String, &'a Value)>) {
    for (k, v) in map {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => flatten(&key, inner, out),
            other => out.push((key, other)),
        }
    }
}

fn to_config_value(key: &str, v: &Value) -> Result<ConfigValue, CoreError> {
    Ok(match v {
        Value::Null => ConfigValue::Null,
        Value::Bool(b) => ConfigValue::Bool(*b),
        Value::Number(n) => ConfigValue::Number(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => ConfigValue::Str(s.clone()),
        Value::Array(items) => ConfigValue::List(
            items
                .iter()
                .map(|i| match i {
                    Value::String(s) => Ok(s.clone()),
                    other => Err(CoreError::InvalidValue {
                        key: key.to_string(),
                        reason: format!("list items must be strings, got {other}"),
                    }),
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Object(_) => {
            return Err(CoreError::InvalidValue {
                key: key.to_string(),
                reason: "unexpected object".into(),
            })
        }
    })
}

fn to_json(v: &ConfigValue) -> Value {
    match v {
        ConfigValue::Null => Value::Null,
        ConfigValue::Bool(b) => Value::Bool(*b),
        ConfigValue::Number(x) if x.fract() == 0.0 && x.abs() < 1e15 => Value::Number(Number::from(*x as i64)),
        ConfigValue::Number(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
        ConfigValue::Str(s) => Value::String(s.clone()),
        ConfigValue::List(items) => Value::Array(items.iter().cloned().map(Value::String).collect()),
    }
}

/// The resolved config as a nested JSON document, keys in canonical order.
pub fn config_to_json(config: &DetectorConfig) -> Value {
    let mut root = Map::new();
    for (key, value) in config.entries() {
        match key.split_once('.') {
            Some((section, name)) => {
                let entry = root
                    .entry(section.to_string())
                    .or_insert_with(|| Value::Object(Map::new()));
                if let Value::Object(m) = entry {
                    m.insert(name.to_string(), to_json(&value));
                }
            }
            None => {
                root.insert(key.to_string(), to_json(&value));
            }
        }
    }
    Value::Object(root)
}

/// SHA-256 over the canonical serialization of the resolved config.
pub fn config_digest(config: &DetectorConfig) -> String {
    let canonical = serde_json::to_vec(&config_to_json(config)).unwrap_or_default();
    hex::encode(Sha256::digest(&canonical))
}

/// The keys accepted in config documents and overrides.
pub fn known_keys() -> &'static [&'static str] {
    &CONFIG_KEYS
}
