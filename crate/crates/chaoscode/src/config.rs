//! Plain `key = value` configuration files for the simulation CLI.
//!
//! Keys mirror the CLI flag names; `#` starts a comment. Command-line flags
//! override file values.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::path::Path;

/// Keys accepted in a config file, matching the CLI flag names.
pub const KNOWN_KEYS: &[&str] = &[
    "code", "n", "beta", "puncture", "snr-start", "snr-stop", "snr-step", "trials", "seed",
    "out", "threads", "bits", "pam",
];

/// Parse `key = value` lines; unknown keys and malformed lines are rejected.
pub fn parse_config_str(text: &str) -> Result<HashMap<String, String>> {
    let mut values = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        if values.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "config line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(values)
}

/// Read and parse a config file.
pub fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}
