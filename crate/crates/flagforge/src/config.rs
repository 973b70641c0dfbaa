//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key `{key}`: cannot parse `{value}`")]
    Value { key: String, value: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: format!("expected key = value, found `{line}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line: n + 1, message: format!("bad key `{k}`") });
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(ConfigError::Syntax { line: n + 1, message: format!("key `{k}` repeated") });
            }
        }
        Ok(Config { values })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|_| ConfigError::Value { key: key.into(), value: v.clone() }))
            .transpose()
    }

    /// Fails on the first key outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), ConfigError> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }
}

/// The flag value when given, else the config value, else `default`.
pub fn layered<T: FromStr>(flag: Option<T>, config: &Config, key: &str, default: T) -> Result<T, ConfigError> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get(key)?.unwrap_or(default)),
    }
}
