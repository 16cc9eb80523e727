//! Flat `key=value` settings merged from a config file and command-line flags.

use std::collections::BTreeMap;
use std::path::Path;

use pp_borrow::{BetaParams, DEFAULT_TOL};

use crate::CliError;

pub const TOL_ENV: &str = "PP_BORROW_TOL";

/// Settings keyed by flag name (without the leading dashes).
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    /// Parses a config file. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str, allowed: &[&str]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = normalize_key(k);
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Invalid(format!(
                    "config line {}: unknown key '{}'",
                    lineno + 1,
                    k.trim()
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, allowed)
    }

    /// Overrides `key` when the flag was given.
    pub fn set(&mut self, key: &str, value: Option<String>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Invalid(format!("missing --{key}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.require(key)?)
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if !(v > 0.0) {
            return Err(CliError::Invalid(format!("{} must be positive", key.replace('-', "_"))));
        }
        Ok(v)
    }

    pub fn count(&self, key: &str) -> Result<u64, CliError> {
        let s = self.require(key)?;
        s.parse()
            .map_err(|_| CliError::Invalid(format!("--{key}: expected a non-negative integer, got '{s}'")))
    }

    pub fn prior(&self) -> Result<BetaParams, CliError> {
        match self.get("prior") {
            None => Ok(BetaParams::uniform()),
            Some(s) => parse_prior(s),
        }
    }

    pub fn grid_points(&self) -> Result<usize, CliError> {
        match self.get("grid-points") {
            None => Ok(512),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Invalid(format!("--grid-points: expected a positive integer, got '{s}'"))),
        }
    }

    /// Flag, then config file, then the environment, then the default.
    pub fn tol(&self) -> Result<f64, CliError> {
        let (source, text) = match self.get("tol") {
            Some(s) => ("--tol", s.to_string()),
            None => match std::env::var(TOL_ENV) {
                Ok(s) => (TOL_ENV, s),
                Err(_) => return Ok(DEFAULT_TOL),
            },
        };
        let tol = parse_f64(source, &text)?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Invalid(format!("{source} must lie in (0, 1), got {text}")));
        }
        Ok(tol)
    }
}

pub fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("--{key}: expected a number, got '{s}'")))?;
    if !v.is_finite() {
        return Err(CliError::Invalid(format!("--{key} must be finite")));
    }
    Ok(v)
}

pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|t| parse_f64(key, t)).collect()
}

pub fn parse_prior(s: &str) -> Result<BetaParams, CliError> {
    let v = parse_list("prior", s)?;
    if v.len() != 2 {
        return Err(CliError::Invalid(format!("--prior expects p,q, got '{s}'")));
    }
    BetaParams::new(v[0], v[1]).map_err(|e| CliError::Invalid(format!("--prior: {e}")))
}
