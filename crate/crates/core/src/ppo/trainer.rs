use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rollout::collect_batches;
use super::update::{train_update_all, Learner, UpdateStats};
use super::PPOConfig;
use crate::agents::AgentId;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    collect_episode_metrics, simulate_with_ids, Controller, EpisodeMetrics, Neighbourhood,
};
use crate::policy::{Architecture, PolicyHandle};
use crate::rng::derive_seed;

const POLICY_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;
const SHUFFLE_STREAM: u64 = 3;

/// Everything a training run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub env: EnvConfig,
    pub ppo: PPOConfig,
    pub n_agents: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
    /// Stop once this many environment episodes have been played.
    pub total_episodes: usize,
    /// Write checkpoints every this many updates; 0 disables them.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig {
                grid_width: 15,
                grid_height: 15,
                ..Default::default()
            },
            ppo: PPOConfig::default(),
            n_agents: 2,
            hidden: vec![64],
            seed: 0,
            total_episodes: 2_000,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.ppo.validate()?;
        if self.n_agents == 0 {
            return Err(Error::InvalidConfig("n_agents must be positive".into()));
        }
        Architecture::grid(self.hidden.clone()).validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::grid(self.hidden.clone())
    }

    /// Seed of the `index`-th freshly initialised policy.
    pub fn policy_seed(&self, index: u64) -> u64 {
        derive_seed(self.seed, &[POLICY_STREAM, index])
    }
}

pub const METRICS_HEADER: &str =
    "update,episodes,agent,mean_return,policy_loss,value_loss,entropy,clip_fraction,approx_kl,steps,kl_stopped";

/// One CSV row of the training metrics stream.
pub fn metrics_row(update: u64, episodes: usize, s: &UpdateStats) -> String {
    format!(
        "{update},{episodes},{},{},{},{},{},{},{},{},{}",
        s.agent,
        s.mean_return,
        s.policy_loss,
        s.value_loss,
        s.entropy,
        s.clip_fraction,
        s.approx_kl,
        s.steps,
        u8::from(s.kl_stopped)
    )
}

/// Collect `episodes_per_update` episodes with every learner acting in the
/// same environments, then update each learner on its own experience.
///
/// Seeds depend only on the run seed, the round index and agent ids, so any
/// caller holding the same learners reproduces the same round.
pub fn ppo_round(
    cfg: &TrainConfig,
    learners: &mut [Learner],
    round: u64,
) -> Result<Vec<UpdateStats>> {
    if learners.is_empty() {
        return Ok(Vec::new());
    }
    let env_seeds: Vec<u64> = (0..cfg.ppo.episodes_per_update as u64)
        .map(|k| derive_seed(cfg.seed, &[ENV_STREAM, round, k]))
        .collect();
    let sampler_seeds: Vec<u64> = learners.iter_mut().map(|l| l.policy.rng.gen()).collect();
    let ids: Vec<AgentId> = learners.iter().map(|l| l.id).collect();
    let batches = {
        let policies: Vec<&PolicyHandle> = learners.iter().map(|l| &l.policy).collect();
        collect_batches(&cfg.env, &policies, &ids, &env_seeds, &sampler_seeds)?
    };
    let shuffle: Vec<u64> = ids
        .iter()
        .map(|&id| derive_seed(cfg.seed, &[SHUFFLE_STREAM, round, id]))
        .collect();
    train_update_all(learners, &batches, &cfg.ppo, &shuffle)
}

/// Decentralized PPO over a fixed set of agents sharing one environment.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub cfg: TrainConfig,
    pub learners: Vec<Learner>,
    /// Completed updates.
    pub update: u64,
    /// Environment episodes played so far.
    pub episodes: usize,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let learners = (0..cfg.n_agents as u64)
            .map(|i| {
                Ok(Learner::new(
                    i,
                    PolicyHandle::new(cfg.architecture(), cfg.policy_seed(i))?,
                    &cfg.ppo,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            learners,
            update: 0,
            episodes: 0,
        })
    }

    pub fn ids(&self) -> Vec<AgentId> {
        self.learners.iter().map(|l| l.id).collect()
    }

    pub fn finished(&self) -> bool {
        self.episodes >= self.cfg.total_episodes
    }

    /// One collection-and-update round; see [`ppo_round`].
    pub fn step(&mut self) -> Result<Vec<UpdateStats>> {
        let stats = ppo_round(&self.cfg, &mut self.learners, self.update)?;
        self.update += 1;
        self.episodes += self.cfg.ppo.episodes_per_update;
        Ok(stats)
    }

    /// Train until the episode budget is spent, appending metrics rows to
    /// `metrics` and writing checkpoints under `checkpoint_dir` if given.
    pub fn run(&mut self, metrics: &mut String, checkpoint_dir: Option<&Path>) -> Result<()> {
        if metrics.is_empty() {
            metrics.push_str(METRICS_HEADER);
            metrics.push('\n');
        }
        while !self.finished() {
            let stats = self.step()?;
            for s in &stats {
                let _ = writeln!(metrics, "{}", metrics_row(self.update, self.episodes, s));
            }
            let every = self.cfg.checkpoint_every as u64;
            if let Some(dir) = checkpoint_dir {
                if every > 0 && self.update.is_multiple_of(every) {
                    self.save_checkpoints(dir)?;
                }
            }
        }
        Ok(())
    }

    /// Write every learner's parameters as `agent{id}_update{n}.bin`.
    pub fn save_checkpoints(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        save_checkpoints(dir, &self.learners, self.update)
    }

    /// Play `episodes` evaluation episodes with the current policies.
    pub fn evaluate(
        &self,
        episodes: usize,
        seed: u64,
        nb: Neighbourhood,
    ) -> Result<Vec<EpisodeMetrics>> {
        evaluate_learners(&self.cfg.env, &self.learners, episodes, seed, nb)
    }
}

/// Write each learner's parameter blob as `agent{id}_update{update}.bin`.
pub fn save_checkpoints(dir: &Path, learners: &[Learner], update: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    learners
        .iter()
        .map(|l| {
            let path = dir.join(format!("agent{}_update{update}.bin", l.id));
            fs::write(&path, l.policy.to_blob())?;
            Ok(path)
        })
        .collect()
}

/// Play `episodes` episodes with copies of the learners' policies. Sampling
/// uses fresh generators, so the learners themselves are untouched.
pub fn evaluate_learners(
    env: &EnvConfig,
    learners: &[Learner],
    episodes: usize,
    seed: u64,
    nb: Neighbourhood,
) -> Result<Vec<EpisodeMetrics>> {
    let ids: Vec<AgentId> = learners.iter().map(|l| l.id).collect();
    (0..episodes as u64)
        .map(|k| {
            let mut controllers = learners
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let s = derive_seed(seed, &[k, i as u64]);
                    let p = PolicyHandle::from_parts(
                        l.policy.arch().clone(),
                        l.policy.params().to_vec(),
                        s,
                    )?;
                    Ok(Controller::Policy(Box::new(p)))
                })
                .collect::<Result<Vec<_>>>()?;
            let trace =
                simulate_with_ids(env, &mut controllers, &ids, derive_seed(seed, &[k]), nb)?;
            collect_episode_metrics(&trace)
        })
        .collect()
}
