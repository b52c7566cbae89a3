//! `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; later keys override
//! earlier ones.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse { line: n + 1, msg: format!("expected key=value, got `{line}`") })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse { line: n + 1, msg: "empty key".into() });
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses `key` if present.
    pub fn get_parsed<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line: 0, msg: format!("{key}: cannot parse `{v}`") }),
        }
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        Ok(self.get_parsed(key)?.unwrap_or(default))
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let c = Config::parse("# constants\nA_dir = 0.7\n\nphi22=2.5\nA_dir=0.8\n").unwrap();
        assert_eq!(c.get_parsed::<f64>("A_dir").unwrap(), Some(0.8));
        assert_eq!(c.get_or("phi22", 1.0).unwrap(), 2.5);
        assert_eq!(c.get_or("missing", 3usize).unwrap(), 3);
        assert!(Config::parse("novalue").is_err());
        assert!(c.get_parsed::<f64>("A_dir").is_ok());
        let bad = Config::parse("x = abc").unwrap();
        assert!(bad.get_parsed::<f64>("x").is_err());
    }
}
