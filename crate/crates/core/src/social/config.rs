use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the reproduction and death thresholds are set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Thresholds {
    /// Fixed values in cumulative reward units.
    Absolute { r_plus: f64, r_minus: f64 },
    /// Scaled from the median per-agent return over the first `rounds`
    /// rounds, during which nobody reproduces or dies.
    Warmup {
        #[serde(default = "default_rounds")]
        rounds: usize,
        #[serde(default = "default_plus")]
        plus_factor: f64,
        #[serde(default = "default_minus")]
        minus_factor: f64,
    },
}

fn default_rounds() -> usize {
    5
}

fn default_plus() -> f64 {
    1.5
}

fn default_minus() -> f64 {
    0.25
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds::Warmup {
            rounds: default_rounds(),
            plus_factor: default_plus(),
            minus_factor: default_minus(),
        }
    }
}

impl Thresholds {
    /// Resolve warm-up factors against a median return `m`.
    ///
    /// The factors apply to `m` when it is positive; otherwise the same
    /// distances are taken around `m` so that `r_minus < r_plus` still holds.
    pub fn from_median(m: f64, plus_factor: f64, minus_factor: f64) -> (f64, f64) {
        let spread = m.abs().max(1e-9);
        (
            m + (plus_factor - 1.0) * spread,
            m - (1.0 - minus_factor) * spread,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub n0: usize,
    pub n_max: usize,
    pub thresholds: Thresholds,
    pub sl_enabled: bool,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            n0: 2,
            n_max: 32,
            thresholds: Thresholds::default(),
            sl_enabled: true,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 || self.n0 > self.n_max {
            return Err(Error::InvalidConfig("need 1 <= n0 <= n_max".into()));
        }
        match self.thresholds {
            Thresholds::Absolute { r_plus, r_minus } if !(r_minus < r_plus) => {
                Err(Error::InvalidConfig("r_minus must be below r_plus".into()))
            }
            Thresholds::Warmup { rounds: 0, .. } => Err(Error::InvalidConfig(
                "warm-up needs at least one round".into(),
            )),
            Thresholds::Warmup {
                plus_factor,
                minus_factor,
                ..
            } if !(minus_factor < 1.0 && plus_factor > 1.0) => Err(Error::InvalidConfig(
                "warm-up factors must satisfy minus_factor < 1 < plus_factor".into(),
            )),
            _ => Ok(()),
        }
    }
}
