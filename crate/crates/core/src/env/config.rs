use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the ecology and of the agent action costs.
///
/// Defaults are a working calibration: a rare domesticate that is outcompeted
/// by the weed in mixed seed banks, a fast-dispersing weed, and a slow trickle
/// of wild plants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub season_length: usize,
    pub cycles_per_episode: usize,
    /// Baseline germination rate of P1 seeds.
    pub alpha1: f64,
    /// Baseline germination rate of P2 seeds.
    pub alpha2: f64,
    /// Inhibition of P2 germination by P1 seeds.
    pub beta12: f64,
    /// Inhibition of P1 germination by P2 seeds.
    pub beta21: f64,
    /// Inverse temperature of the germination competition.
    pub temp: f64,
    /// Per-neighbour dispersal rate of P1.
    pub d1: f64,
    /// Per-neighbour dispersal rate of P2.
    pub d2: f64,
    /// Probability that a stored seed survives a winter onset.
    pub seed_survival: f64,
    /// Per-cell, per-step probability that a wild plant appears.
    pub eta3: f64,
    /// Steepness of the logistic harvest value of P1.
    pub xi: f64,
    pub c_harvest: f64,
    /// Per-step probability that an agent-watered cell dries out.
    pub evap_prob: f64,
    /// Side length of the central water source.
    pub water_patch: usize,
    /// Probability that a cell starts an episode holding a seed of a given type.
    pub init_seed_fraction: f64,
    pub move_cost: f64,
    pub pick_drop_cost: f64,
    pub protect_cost: f64,
    /// Maximum units of each item an agent can carry.
    pub inventory_capacity: u32,
    pub rng_seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            grid_width: 30,
            grid_height: 30,
            season_length: 20,
            cycles_per_episode: 25,
            alpha1: 0.5,
            alpha2: 0.8,
            beta12: 1.0,
            beta21: 1.0,
            temp: 5.0,
            d1: 0.05,
            d2: 0.1,
            seed_survival: 0.8,
            eta3: 0.001,
            xi: 5.0,
            c_harvest: 0.1,
            evap_prob: 0.05,
            water_patch: 5,
            init_seed_fraction: 0.05,
            move_cost: 0.01,
            pick_drop_cost: 0.01,
            protect_cost: 0.05,
            inventory_capacity: 1,
            rng_seed: 0,
        }
    }
}

impl EnvConfig {
    /// Steps per episode: two seasons per cycle.
    pub fn episode_length(&self) -> usize {
        self.cycles_per_episode * 2 * self.season_length
    }

    /// Number of cells in the grid.
    pub fn area(&self) -> usize {
        self.grid_width * self.grid_height
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("seed_survival", self.seed_survival),
            ("eta3", self.eta3),
            ("evap_prob", self.evap_prob),
            ("init_seed_fraction", self.init_seed_fraction),
            ("d1", self.d1),
            ("d2", self.d2),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        let non_negative = [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta12", self.beta12),
            ("beta21", self.beta21),
            ("c_harvest", self.c_harvest),
            ("move_cost", self.move_cost),
            ("pick_drop_cost", self.pick_drop_cost),
            ("protect_cost", self.protect_cost),
        ];
        for (name, x) in non_negative {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {x} must be finite and >= 0"
                )));
            }
        }
        if !(self.temp > 0.0 && self.temp.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "temp = {} must be > 0",
                self.temp
            )));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "xi = {} must be > 0",
                self.xi
            )));
        }
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(Error::InvalidConfig(
                "grid dimensions must be positive".into(),
            ));
        }
        if self.grid_width < self.water_patch || self.grid_height < self.water_patch {
            return Err(Error::InvalidConfig(format!(
                "grid {}x{} smaller than water patch {}",
                self.grid_width, self.grid_height, self.water_patch
            )));
        }
        if self.season_length < 2 {
            return Err(Error::InvalidConfig(
                "season_length must be at least 2".into(),
            ));
        }
        if self.cycles_per_episode == 0 {
            return Err(Error::InvalidConfig(
                "cycles_per_episode must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
