//! Flat `key = value` configuration with command-line overrides.
//!
//! Precedence is flag, then file, then built-in default. Every value a
//! command looks up is recorded so the resolved configuration can be echoed
//! next to the outputs.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Ok(Self {
            file: parse(&text).with_context(|| format!("in config {}", path.display()))?,
            resolved: BTreeMap::new(),
        })
    }

    fn lookup<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key {key}: cannot parse {raw:?}: {e}")),
        }
    }

    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Like [`Resolver::value`] with no default; absent values echo as `none`.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.lookup(key, flag)?;
        let shown = v.as_ref().map_or_else(|| "none".to_string(), ToString::to_string);
        self.resolved.insert(key.to_string(), shown);
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.optional(key, flag)? {
            Some(v) => Ok(v),
            None => bail!("missing required setting --{}", key.replace('_', "-")),
        }
    }

    /// Resolved settings as sorted `key=value` lines; fails on file keys the
    /// command never read.
    pub fn finish(&self) -> Result<String> {
        let unused: Vec<&str> = self
            .file
            .keys()
            .filter(|k| !self.resolved.contains_key(*k))
            .map(String::as_str)
            .collect();
        if !unused.is_empty() {
            bail!("config keys not used by this command: {}", unused.join(", "));
        }
        Ok(self.resolved.iter().map(|(k, v)| format!("{k}={v}\n")).collect())
    }
}

fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value", no + 1);
        };
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("line {}: duplicate key {key}", no + 1);
        }
    }
    Ok(out)
}
