#![allow(dead_code)]

use agrisim::policy::{Architecture, Decision, PolicyHandle, PolicyInput};
use agrisim::ppo::{train_update, Learner, PPOConfig, Trajectory, TrajectoryBatch, TrajectoryStep};
use agrisim::rng::{derive_seed, rng_from};

pub const BANDIT_OBS: [f32; 1] = [1.0];

pub fn bandit_input() -> PolicyInput<'static> {
    PolicyInput {
        obs: &BANDIT_OBS,
        past: Vec::new(),
    }
}

pub fn bandit_config() -> PPOConfig {
    PPOConfig {
        learning_rate: 0.01,
        episodes_per_update: 32,
        minibatch_size: 32,
        ..Default::default()
    }
}

/// One batch of single-step episodes on a deterministic bandit.
pub fn bandit_batch(
    policy: &mut PolicyHandle,
    rewards: &[f64],
    episodes: usize,
) -> TrajectoryBatch {
    use rand::Rng;
    let out = policy.forward(&bandit_input()).unwrap();
    let mut rng = rng_from(policy.rng.gen());
    let trajectories = (0..episodes)
        .map(|_| {
            let d: Decision = out.dist.sample(policy.layout(), &mut rng);
            Trajectory {
                mem_len: 0,
                steps: vec![TrajectoryStep {
                    obs: BANDIT_OBS.to_vec(),
                    tuple: Vec::new(),
                    decision: d,
                    log_prob_old: out.dist.log_prob(policy.layout(), d),
                    reward: rewards[d.root],
                    value: out.value,
                    done: true,
                }],
            }
        })
        .collect();
    TrajectoryBatch { trajectories }
}

/// Probability of each arm after `updates` PPO updates.
pub fn train_bandit(rewards: &[f64], updates: usize, seed: u64, cfg: &PPOConfig) -> Vec<f64> {
    let policy = PolicyHandle::new(Architecture::bandit(rewards.len()), seed).unwrap();
    let mut learner = Learner::new(0, policy, cfg);
    for u in 0..updates {
        let batch = bandit_batch(&mut learner.policy, rewards, cfg.episodes_per_update);
        train_update(&mut learner, &batch, cfg, derive_seed(seed, &[u as u64])).unwrap();
    }
    learner.policy.forward(&bandit_input()).unwrap().dist.probs[0].clone()
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
