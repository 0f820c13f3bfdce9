//! Flat key-value JSON configuration with flag precedence.
//!
//! Command-line flags override file entries; keys in the file use the same
//! names as the long flags. Unknown keys are rejected after the owning
//! command has consumed everything it understands.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde_json::Value;

use crate::CliError;

pub struct Settings {
    entries: BTreeMap<String, Value>,
    consumed: RefCell<BTreeSet<String>>,
}

impl Settings {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
            consumed: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {path:?}: {e}")))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {path:?} is not valid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(CliError::validation(
                "config must be a flat JSON object of key-value pairs",
            ));
        };
        Ok(Self {
            entries: map.into_iter().collect(),
            consumed: RefCell::new(BTreeSet::new()),
        })
    }

    fn lookup(&self, key: &str) -> Option<&Value> {
        let v = self.entries.get(key);
        if v.is_some() {
            self.consumed.borrow_mut().insert(key.to_string());
        }
        v
    }

    /// Flag value, then config value, then `None`.
    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            self.lookup(key);
            return Ok(flag);
        }
        match self.lookup(key) {
            None => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(other) => Err(CliError::validation(format!(
                "config key '{key}' must be a number, got {other}"
            ))),
        }
    }

    pub fn require_f64(&self, key: &str, flag: Option<f64>) -> Result<f64, CliError> {
        self.f64(key, flag)?
            .ok_or_else(|| CliError::validation(format!("missing required parameter: {key}")))
    }

    pub fn usize(&self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        if flag.is_some() {
            self.lookup(key);
            return Ok(flag);
        }
        match self.lookup(key) {
            None => Ok(None),
            Some(Value::Number(n)) if n.as_u64().is_some() => {
                Ok(Some(n.as_u64().unwrap() as usize))
            }
            Some(other) => Err(CliError::validation(format!(
                "config key '{key}' must be a non-negative integer, got {other}"
            ))),
        }
    }

    pub fn string(&self, key: &str, flag: Option<&str>) -> Result<Option<String>, CliError> {
        if let Some(s) = flag {
            self.lookup(key);
            return Ok(Some(s.to_string()));
        }
        match self.lookup(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(CliError::validation(format!(
                "config key '{key}' must be a string, got {other}"
            ))),
        }
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        if flag {
            self.lookup(key);
            return Ok(true);
        }
        match self.lookup(key) {
            None => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(other) => Err(CliError::validation(format!(
                "config key '{key}' must be a boolean, got {other}"
            ))),
        }
    }

    /// Reject any config key no getter has consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let consumed = self.consumed.borrow();
        for key in self.entries.keys() {
            if !consumed.contains(key) {
                return Err(CliError::validation(format!(
                    "unknown configuration key: {key}"
                )));
            }
        }
        Ok(())
    }
}
