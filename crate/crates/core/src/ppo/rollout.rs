use rayon::prelude::*;

use super::trajectory::{Trajectory, TrajectoryBatch, TrajectoryStep};
use crate::agents::{joint_step, observe, place_agents, AgentId};
use crate::env::{EnvConfig, EnvState};
use crate::error::Result;
use crate::policy::{Decision, HistoryWindow, PolicyHandle};
use crate::rng::{derive_seed, rng_from};

/// Play one episode with agent `i` sampling from `policies[i]`.
///
/// `sampler_seeds[i]` seeds agent `i`'s action sampling, so the episode is a
/// pure function of the policies and the seeds.
pub fn collect_episode(
    cfg: &EnvConfig,
    policies: &[&PolicyHandle],
    ids: &[AgentId],
    env_seed: u64,
    sampler_seeds: &[u64],
) -> Result<Vec<Trajectory>> {
    assert!(policies.len() == ids.len() && ids.len() == sampler_seeds.len());
    let cfg = EnvConfig {
        rng_seed: env_seed,
        ..cfg.clone()
    };
    cfg.validate()?;
    let mut state = EnvState::reset(&cfg);
    let mut agents = place_agents(&mut state, ids);
    let mut samplers: Vec<_> = sampler_seeds.iter().map(|&s| rng_from(s)).collect();
    let mut histories: Vec<HistoryWindow> = agents
        .iter()
        .zip(policies)
        .map(|(a, p)| HistoryWindow::new(p.arch().mem_len, observe(&state, a, cfg.season_length)))
        .collect();
    let len = cfg.episode_length();
    let mut trajs: Vec<Trajectory> = policies
        .iter()
        .map(|p| Trajectory::new(p.arch().mem_len))
        .collect();
    for t in &mut trajs {
        t.steps.reserve(len);
    }

    for step in 0..len {
        let mut actions = Vec::with_capacity(policies.len());
        for (i, p) in policies.iter().enumerate() {
            let out = p.forward(&histories[i].input())?;
            let decision: Decision = out.dist.sample(p.layout(), &mut samplers[i]);
            let action = decision
                .to_action()
                .expect("grid policies yield grid actions");
            trajs[i].steps.push(TrajectoryStep {
                obs: histories[i].current_features().to_vec(),
                tuple: Vec::new(),
                decision,
                log_prob_old: out.dist.log_prob(p.layout(), decision),
                reward: 0.0,
                value: out.value,
                done: step + 1 == len,
            });
            actions.push(action);
        }
        let res = joint_step(&mut state, &mut agents, &actions, &cfg);
        for (i, obs) in res.observations.into_iter().enumerate() {
            histories[i].push(actions[i], res.rewards[i], obs);
            let last = trajs[i].steps.last_mut().expect("step just pushed");
            last.reward = res.rewards[i];
            if let Some(tuple) = histories[i].last_tuple() {
                last.tuple = tuple.to_vec();
            }
        }
    }
    Ok(trajs)
}

/// Play one episode per entry of `env_seeds` and regroup the trajectories
/// by agent. Agent `i` in episode `e` samples with
/// `derive_seed(sampler_seeds[i], [e])`.
pub fn collect_batches(
    cfg: &EnvConfig,
    policies: &[&PolicyHandle],
    ids: &[AgentId],
    env_seeds: &[u64],
    sampler_seeds: &[u64],
) -> Result<Vec<TrajectoryBatch>> {
    let episodes = env_seeds
        .par_iter()
        .enumerate()
        .map(|(e, &seed)| {
            let s: Vec<u64> = sampler_seeds
                .iter()
                .map(|&s| derive_seed(s, &[e as u64]))
                .collect();
            collect_episode(cfg, policies, ids, seed, &s)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut batches = vec![TrajectoryBatch::default(); policies.len()];
    for ep in episodes {
        for (i, traj) in ep.into_iter().enumerate() {
            batches[i].trajectories.push(traj);
        }
    }
    Ok(batches)
}
