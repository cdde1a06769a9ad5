//! Run configuration files.
//!
//! Grammar: one `key = value` pair per line. `#` starts a comment that runs to
//! the end of the line, blank lines are ignored, whitespace around keys and
//! values is trimmed, and a repeated key keeps its last value. Keys are the
//! long flag names with `_` in place of `-` (`n_samples`, `tail_tol`, ...).
//!
//! Values resolve as: command-line flag, then config file, then default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    origin: String,
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`, got `{line}`", i + 1))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                bail!("{origin}:{}: invalid key `{key}`", i + 1);
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self {
            origin: origin.to_string(),
            values,
        })
    }

    /// Rejects keys the command does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                bail!("{}: unknown key `{key}` (expected one of: {})", self.origin, allowed.join(", "));
            }
        }
        Ok(())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("{}: bad value for `{key}`: {e}", self.origin)))
            .transpose()
    }
}

/// Flag, then config value, then default.
pub fn resolve<T>(flag: Option<T>, config: Option<&ConfigFile>, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match config {
        Some(c) => Ok(c.get(key)?.unwrap_or(default)),
        None => Ok(default),
    }
}

/// As [`resolve`] without a default.
pub fn resolve_opt<T>(flag: Option<T>, config: Option<&ConfigFile>, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match config {
        Some(c) => c.get(key),
        None => Ok(None),
    }
}
