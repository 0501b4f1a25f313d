//! Flat `key = value` documents with dotted, sectioned keys.
//!
//! ```text
//! # comment
//! traffic.light.family = poisson
//! traffic.light.lambda = 0.3
//! ```
//!
//! Keys are `[a-z0-9_]` segments joined by dots. Values are taken verbatim
//! after trimming; numbers are kept as the exact decimal strings written in
//! the file and only converted when read.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvDoc {
    entries: BTreeMap<String, Entry>,
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            !seg.is_empty()
                && seg
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
        })
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !valid_key(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("empty value for `{key}`"),
                });
            }
            if doc.entries.contains_key(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            doc.entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(doc)
    }

    /// Insert or replace a key. Panics on a malformed key (programmer error).
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        assert!(valid_key(&key), "invalid key {key:?}");
        self.entries.insert(
            key,
            Entry {
                value: value.to_string(),
                line: 0,
            },
        );
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::config(key, "missing required key"))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        parse_f64(key, self.require(key)?)
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key).map(|v| parse_u64(key, v)).transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(Error::config(
                    key,
                    format!("expected true/false, got `{v}`"),
                )),
            })
            .transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| v.split(',').map(|s| parse_f64(key, s.trim())).collect())
            .transpose()
    }

    pub fn u64_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.get(key)
            .map(|v| v.split(',').map(|s| parse_u64(key, s.trim())).collect())
            .transpose()
    }

    /// Keys starting with `prefix.` that are not in `known` (relative names).
    pub fn unknown_keys(&self, prefix: &str, known: &[&str]) -> Vec<String> {
        let dotted = format!("{prefix}.");
        self.entries
            .keys()
            .filter_map(|k| k.strip_prefix(&dotted).map(|rest| (k, rest)))
            .filter(|(_, rest)| {
                !known
                    .iter()
                    .any(|n| rest == n || rest.starts_with(&format!("{n}.")))
            })
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Render in key order, one `key = value` per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.entries {
            let _ = writeln!(out, "{k} = {}", e.value);
        }
        out
    }
}

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::config(
            key,
            format!("expected a finite number, got `{v}`"),
        ));
    }
    Ok(x)
}

pub(crate) fn parse_u64(key: &str, v: &str) -> Result<u64> {
    // Accept integral scientific notation such as `1e7`.
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let x = parse_f64(key, v)?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 / 2.0 {
        return Err(Error::config(
            key,
            format!("expected a non-negative integer, got `{v}`"),
        ));
    }
    Ok(x as u64)
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn fmt_f64_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(",")
}
