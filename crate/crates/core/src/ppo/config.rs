use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PPOConfig {
    pub gamma: f64,
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub gae_lambda: f64,
    pub learning_rate: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    /// Parallel environment episodes collected per update.
    pub episodes_per_update: usize,
    pub value_coef: f64,
    /// Half-width of the value clipping band, in return units.
    pub value_clip: f64,
    pub max_grad_norm: f64,
    /// An agent's update stops once the approximate KL of a minibatch exceeds this.
    pub kl_ceiling: f64,
    pub adam_eps: f64,
}

impl Default for PPOConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            clip_eps: 0.2,
            entropy_coef: 0.036,
            gae_lambda: 0.95,
            learning_rate: 3e-4,
            epochs_per_update: 4,
            minibatch_size: 512,
            episodes_per_update: 16,
            value_coef: 0.5,
            value_clip: 1.0,
            max_grad_norm: 0.5,
            kl_ceiling: 0.05,
            adam_eps: 1e-5,
        }
    }
}

impl PPOConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let checks = [
            (unit(self.gamma), "gamma must lie in [0, 1]"),
            (unit(self.gae_lambda), "gae_lambda must lie in [0, 1]"),
            (self.clip_eps > 0.0, "clip_eps must be positive"),
            (
                self.entropy_coef >= 0.0,
                "entropy_coef must be non-negative",
            ),
            (
                self.learning_rate >= 0.0,
                "learning_rate must be non-negative",
            ),
            (
                self.epochs_per_update > 0,
                "epochs_per_update must be positive",
            ),
            (self.minibatch_size > 0, "minibatch_size must be positive"),
            (
                self.episodes_per_update > 0,
                "episodes_per_update must be positive",
            ),
            (self.value_coef >= 0.0, "value_coef must be non-negative"),
            (self.value_clip > 0.0, "value_clip must be positive"),
            (self.max_grad_norm > 0.0, "max_grad_norm must be positive"),
            (self.kl_ceiling > 0.0, "kl_ceiling must be positive"),
            (self.adam_eps > 0.0, "adam_eps must be positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidConfig(msg.into()));
            }
        }
        Ok(())
    }
}
