use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Named numeric parameters of a strategy or policy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(BTreeMap<String, f64>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_owned(), value);
        self
    }

    pub fn insert(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_owned(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Overlays `self` on `defaults`, rejecting keys the defaults do not name.
    pub(crate) fn completed(&self, owner: &str, defaults: Params) -> Result<Params, ConfigError> {
        let mut out = defaults;
        for (key, value) in self.iter() {
            if !out.contains(key) {
                return Err(ConfigError::UnknownParam {
                    owner: owner.to_owned(),
                    key: key.to_owned(),
                });
            }
            out.insert(key, value);
        }
        Ok(out)
    }

    pub(crate) fn real(&self, owner: &str, key: &str) -> Result<f64, ConfigError> {
        let value = self.get(key).ok_or_else(|| ConfigError::UnknownParam {
            owner: owner.to_owned(),
            key: key.to_owned(),
        })?;
        if !value.is_finite() {
            return Err(invalid(owner, key, value, "must be finite"));
        }
        Ok(value)
    }

    pub(crate) fn non_negative(&self, owner: &str, key: &str) -> Result<f64, ConfigError> {
        let value = self.real(owner, key)?;
        if value < 0.0 {
            return Err(invalid(owner, key, value, "must be non-negative"));
        }
        Ok(value)
    }

    pub(crate) fn count(&self, owner: &str, key: &str, min: u64) -> Result<u64, ConfigError> {
        let value = self.real(owner, key)?;
        if value.fract() != 0.0 {
            return Err(invalid(owner, key, value, "must be an integer"));
        }
        if value < min as f64 {
            return Err(invalid(owner, key, value, "below the allowed minimum"));
        }
        if value > u32::MAX as f64 {
            return Err(invalid(owner, key, value, "too large"));
        }
        Ok(value as u64)
    }
}

impl<const N: usize> From<[(&str, f64); N]> for Params {
    fn from(pairs: [(&str, f64); N]) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
    }
}

pub(crate) fn invalid(owner: &str, key: &str, value: f64, reason: &'static str) -> ConfigError {
    ConfigError::InvalidParam {
        owner: owner.to_owned(),
        key: key.to_owned(),
        value,
        reason,
    }
}
