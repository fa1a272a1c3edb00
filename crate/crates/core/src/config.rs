//! Run configuration: a flat file of `key = value` lines with `#` comments.
//! Command-line flags override anything set here.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::lemmas::FleetConfig;
use crate::roots::RootOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Working precision floor in bits.
    pub precision_bits: Option<u32>,
    /// Target decimal digits for root certification.
    pub digits: Option<u32>,
    /// Sample count on each circle in the lemma fleet.
    pub circle_samples: Option<usize>,
    /// Multiplier on the right-hand side of upper bounds.
    pub margin: Option<f64>,
    /// Random samples per grid cell in the lemma fleet.
    pub seeds: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.margin.is_some_and(|m| !(m.is_finite() && m >= 1.0)) {
            return Err(ConfigError::Parse("margin must be a finite number >= 1".into()));
        }
        if self.digits == Some(0) {
            return Err(ConfigError::Parse("digits must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Values from `other` win where present.
    pub fn overridden_by(&self, other: &Self) -> Self {
        Self {
            precision_bits: other.precision_bits.or(self.precision_bits),
            digits: other.digits.or(self.digits),
            circle_samples: other.circle_samples.or(self.circle_samples),
            margin: other.margin.or(self.margin),
            seeds: other.seeds.or(self.seeds),
        }
    }

    /// Starts from the environment-aware defaults; a configured precision
    /// raises the floor but never lowers it.
    pub fn root_options(&self) -> RootOptions {
        let mut opts = RootOptions::from_env();
        if let Some(d) = self.digits {
            opts.target_digits = d;
        }
        if let Some(p) = self.precision_bits {
            opts.precision_floor = opts.precision_floor.max(p);
        }
        opts
    }

    pub fn fleet_config(&self) -> FleetConfig {
        let mut cfg = FleetConfig::default();
        if let Some(s) = self.seeds {
            cfg.seeds = s;
        }
        if let Some(m) = self.margin {
            cfg.options.margin = m;
        }
        cfg.options.samples = self.circle_samples;
        cfg
    }
}
