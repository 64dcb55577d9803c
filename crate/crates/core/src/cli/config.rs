//! Flat `key = value` configuration files with `#` comments and dotted keys.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Every key the front end understands; anything else is rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "system",
    "seed",
    "time.start",
    "time.end",
    "grid.points",
    "initial",
    "integrator.method",
    "integrator.step",
    "integrator.tol",
    "integrator.max_steps",
    "envelope",
    "envelope.value",
    "envelope.a",
    "envelope.b",
    "envelope.amplitude",
    "envelope.frequency",
    "envelope.phase",
    "two_level.b",
    "drive.b",
    "drive.amplitude",
    "drive.frequency",
    "drive.phase",
    "n_level.diag",
    "three_body.mu",
    "three_body.varpi",
    "three_body.guard",
    "custom.n",
    "custom.h",
    "symmetry.momentum",
    "verify.samples",
    "verify.tol",
    "reduction.mu",
    "rep.tol",
    "rep.guess",
    "stability.radius",
    "stability.samples",
    "stability.fd_step",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    /// key -> (line number, raw value)
    entries: BTreeMap<String, (usize, String)>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl Config {
    pub fn parse(src: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let (k, v) = text
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, got `{text}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                return Err(err(line, format!("unknown key `{k}`")));
            }
            if v.is_empty() {
                return Err(err(line, format!("empty value for `{k}`")));
            }
            if entries.insert(k.to_string(), (line, v.to_string())).is_some() {
                return Err(err(line, format!("duplicate key `{k}`")));
            }
        }
        Ok(Config { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(l, _)| *l)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| err(0, format!("missing required key `{key}`")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let x: f64 = v.parse().map_err(|_| err(self.line(key), format!("`{key}`: not a number: {v}")))?;
                if !x.is_finite() {
                    return Err(err(self.line(key), format!("`{key}` must be finite")));
                }
                Ok(x)
            }
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| err(self.line(key), format!("`{key}`: not a non-negative integer: {v}"))),
        }
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(hex, 16),
                    None => v.parse(),
                };
                parsed.map_err(|_| err(self.line(key), format!("`{key}`: not an integer: {v}")))
            })
            .transpose()
    }

    /// Comma-separated list of finite numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        let x: f64 = s
                            .trim()
                            .parse()
                            .map_err(|_| err(self.line(key), format!("`{key}`: bad list entry `{}`", s.trim())))?;
                        if x.is_finite() {
                            Ok(x)
                        } else {
                            Err(err(self.line(key), format!("`{key}` entries must be finite")))
                        }
                    })
                    .collect()
            })
            .transpose()
    }

    /// Wraps a downstream validation failure as a config error at `key`.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> Error {
        err(self.line(key), format!("`{key}`: {}", message.into()))
    }
}
