use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::UsageError;

/// Keys accepted in a config file. Command-line flags use the same names.
pub const KNOWN_KEYS: &[&str] = &[
    "protocol",
    "replicas",
    "clients",
    "rate",
    "service-rate",
    "async-ms",
    "fixed-ms",
    "processing-us",
    "delay-rate-read",
    "delay-rate-write",
    "ops",
    "keys",
    "seed",
    "out",
    "tol",
    "sizes",
    "max-m",
    "crash",
];

/// Merged key=value settings. Every lookup is recorded with its resolved
/// value, defaults included, so the hash covers what the run actually used.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

impl Settings {
    /// Parses a flat `key=value` file. Blank lines and `#` lines are skipped.
    pub fn parse_file(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key=value, got `{line}`", i + 1)))?;
            let k = k.trim();
            if !KNOWN_KEYS.contains(&k) {
                return Err(UsageError(format!("config line {}: unknown key `{k}`", i + 1)));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Settings {
            values,
            used: RefCell::default(),
        })
    }

    /// Flag values override file values.
    pub fn set(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.used.borrow_mut().insert(key.to_string(), v.clone());
        }
        v
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| UsageError(format!("invalid value `{v}` for {key}: {e}")))
            })
            .transpose()
    }

    pub fn get<T: FromStr + Display>(&self, key: &str, default: T) -> Result<T, UsageError>
    where
        T::Err: Display,
    {
        match self.opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.used.borrow_mut().insert(key.to_string(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Records a derived input, such as the digest of an input file.
    pub fn note(&self, key: &str, value: impl Display) {
        self.used.borrow_mut().insert(key.to_string(), value.to_string());
    }

    /// First 16 hex digits of SHA-256 over the command name and every
    /// setting read so far, sorted by key. The output location is left out
    /// so that the same run written to two places hashes the same.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        for (k, v) in self.used.borrow().iter().filter(|(k, _)| *k != "out") {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// `3-7` or `2,4,8` or a mix such as `2,5-7`.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn parse_sizes(text: &str) -> Result<Vec<usize>, UsageError> {
    let bad = || UsageError(format!("invalid size list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}
