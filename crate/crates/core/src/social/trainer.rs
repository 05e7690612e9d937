use std::fmt::Write as _;
use std::path::Path;

use super::config::{PopulationConfig, Thresholds};
use super::population::{population_update, PopulationEvent, PopulationState};
use crate::error::{Error, Result};
use crate::ppo::{
    metrics_row, ppo_round, save_checkpoints, TrainConfig, Trainer, UpdateStats, METRICS_HEADER,
};
use crate::rng::derive_seed;

const CLONE_STREAM: u64 = 4;

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub stats: Vec<UpdateStats>,
    pub events: Vec<PopulationEvent>,
    /// Population size after the roster update.
    pub population: usize,
}

/// PPO with reward-threshold reproduction.
///
/// A round is one PPO update: every living agent plays `episodes_per_update`
/// episodes, learns from them, and its mean return over those episodes is
/// the per-episode reward fed to the population update.
#[derive(Debug, Clone)]
pub struct SocialTrainer {
    pub train: TrainConfig,
    pub population_cfg: PopulationConfig,
    pub pop: PopulationState,
    pub round: u64,
    pub episodes: usize,
    /// Resolved `(r_plus, r_minus)`; `None` while warming up.
    pub thresholds: Option<(f64, f64)>,
    warmup_returns: Vec<f64>,
}

impl SocialTrainer {
    pub fn new(train: TrainConfig, population_cfg: PopulationConfig) -> Result<Self> {
        population_cfg.validate()?;
        if train.n_agents != population_cfg.n0 {
            return Err(Error::InvalidConfig(
                "n_agents must equal the initial population n0".into(),
            ));
        }
        let learners = Trainer::new(train.clone())?.learners;
        let thresholds = match population_cfg.thresholds {
            Thresholds::Absolute { r_plus, r_minus } => Some((r_plus, r_minus)),
            Thresholds::Warmup { .. } => None,
        };
        Ok(Self {
            train,
            population_cfg,
            pop: PopulationState::new(learners),
            round: 0,
            episodes: 0,
            thresholds,
            warmup_returns: Vec::new(),
        })
    }

    pub fn finished(&self) -> bool {
        self.pop.extinct || self.episodes >= self.train.total_episodes
    }

    pub fn step(&mut self) -> Result<RoundReport> {
        let stats = ppo_round(&self.train, &mut self.pop.learners, self.round)?;
        let rewards: Vec<f64> = stats.iter().map(|s| s.mean_return).collect();
        self.round += 1;
        self.episodes += self.train.ppo.episodes_per_update;

        let events = match self.thresholds {
            Some(t) => {
                let seed = self.train.seed;
                population_update(
                    &mut self.pop,
                    &rewards,
                    &self.population_cfg,
                    t,
                    &self.train.ppo,
                    |id| derive_seed(seed, &[CLONE_STREAM, id]),
                )?
            }
            None => {
                self.pop.episode += 1;
                self.warmup_returns.extend(&rewards);
                if let Thresholds::Warmup {
                    rounds,
                    plus_factor,
                    minus_factor,
                } = self.population_cfg.thresholds
                {
                    if self.round as usize >= rounds {
                        let m = median(&mut self.warmup_returns);
                        self.thresholds =
                            Some(Thresholds::from_median(m, plus_factor, minus_factor));
                    }
                }
                Vec::new()
            }
        };
        Ok(RoundReport {
            stats,
            events,
            population: self.pop.len(),
        })
    }

    /// Train until the episode budget is spent or the population dies out.
    /// Appends training metrics to `metrics` and roster events to `events`.
    pub fn run(
        &mut self,
        metrics: &mut String,
        events: &mut Vec<PopulationEvent>,
        checkpoint_dir: Option<&Path>,
    ) -> Result<()> {
        if metrics.is_empty() {
            let _ = writeln!(metrics, "{METRICS_HEADER},population");
        }
        while !self.finished() {
            let report = self.step()?;
            for s in &report.stats {
                let _ = writeln!(
                    metrics,
                    "{},{}",
                    metrics_row(self.round, self.episodes, s),
                    report.population
                );
            }
            events.extend(report.events);
            let every = self.train.checkpoint_every as u64;
            if let Some(dir) = checkpoint_dir {
                if every > 0 && self.round.is_multiple_of(every) {
                    save_checkpoints(dir, &self.pop.learners, self.round)?;
                }
            }
        }
        Ok(())
    }
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
