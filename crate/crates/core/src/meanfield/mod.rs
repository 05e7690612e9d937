//! Three-variable mean-field reduction: agriculturalist fraction A under
//! replicator dynamics, domesticate cover P1 and wild cover P3, with the
//! weed cover P2 taking up the rest.

mod equilibria;
mod hysteresis;
mod integrate;
mod model;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use equilibria::{equilibria, jacobian, Equilibrium, Stability};
pub use hysteresis::{hysteresis_sweep, near_foraging_start, HysteresisResult, NEAR_FORAGING_A};
pub use integrate::{
    integrate, ForcingSchedule, IntegratorConfig, MFTrajectory, TrajectoryPoint, TRAJECTORY_HEADER,
};
pub use model::{
    mf_derivatives, payoff_difference, payoffs, wild_equilibrium, MFParams, MFState, SearchCost,
    SIMPLEX_TOL,
};

use crate::error::Result;

/// A complete forcing experiment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanfieldConfig {
    pub params: MFParams,
    pub schedule: ForcingSchedule,
    pub integrator: IntegratorConfig,
    /// Defaults to [`near_foraging_start`].
    pub initial: Option<MFState>,
    pub threshold: Option<f64>,
}

impl MeanfieldConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.params.validate()?;
        cfg.schedule.validate()?;
        cfg.integrator.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn initial_state(&self) -> MFState {
        self.initial
            .unwrap_or_else(|| near_foraging_start(&self.params, &self.schedule))
    }

    pub fn run(&self) -> Result<HysteresisResult> {
        hysteresis_sweep(
            self.initial_state(),
            &self.params,
            &self.schedule,
            self.threshold.unwrap_or(0.5),
            &self.integrator,
        )
    }
}
