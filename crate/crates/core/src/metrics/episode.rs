use super::composition::{composition_counts, Neighbourhood};
use super::trace::{AgentStepRecord, EpisodeTrace, StepRecord};
use crate::agents::{joint_step, observe, place_agents, AgentAction, AgentId};
use crate::env::{EnvConfig, EnvState};
use crate::error::Result;
use crate::policy::{
    policy_forward, sample_action, scripted_farmer, scripted_forager, HistoryWindow, PolicyHandle,
};

/// Memory length given to scripted controllers.
const SCRIPTED_MEMORY: usize = 8;

/// What chooses an agent's actions during evaluation.
#[derive(Debug, Clone)]
pub enum Controller {
    Farmer,
    Forager,
    Policy(Box<PolicyHandle>),
}

impl Controller {
    fn memory(&self) -> usize {
        match self {
            Controller::Policy(p) => p.arch().mem_len,
            _ => SCRIPTED_MEMORY,
        }
    }

    fn act(&mut self, h: &HistoryWindow) -> Result<AgentAction> {
        Ok(match self {
            Controller::Farmer => scripted_farmer(h),
            Controller::Forager => scripted_forager(h),
            Controller::Policy(p) => {
                let (dist, _) = policy_forward(p, h)?;
                sample_action(&dist, &mut p.rng).0
            }
        })
    }
}

/// Run one full episode with agent `i` driven by `controllers[i]` and the
/// environment seeded with `seed`.
pub fn simulate_episode(
    cfg: &EnvConfig,
    controllers: &mut [Controller],
    seed: u64,
    nb: Neighbourhood,
) -> Result<EpisodeTrace> {
    let ids: Vec<AgentId> = (0..controllers.len() as AgentId).collect();
    simulate_with_ids(cfg, controllers, &ids, seed, nb)
}

pub fn simulate_with_ids(
    cfg: &EnvConfig,
    controllers: &mut [Controller],
    ids: &[AgentId],
    seed: u64,
    nb: Neighbourhood,
) -> Result<EpisodeTrace> {
    let cfg = EnvConfig {
        rng_seed: seed,
        ..cfg.clone()
    };
    cfg.validate()?;
    let mut state = EnvState::reset(&cfg);
    let mut agents = place_agents(&mut state, ids);
    let mut histories: Vec<HistoryWindow> = agents
        .iter()
        .zip(controllers.iter())
        .map(|(a, c)| HistoryWindow::new(c.memory(), observe(&state, a, cfg.season_length)))
        .collect();

    let len = cfg.episode_length();
    let mut trace = EpisodeTrace::new(len, cfg.season_length, nb);
    for step in 0..len {
        let actions = controllers
            .iter_mut()
            .zip(&histories)
            .map(|(c, h)| c.act(h))
            .collect::<Result<Vec<_>>>()?;
        let res = joint_step(&mut state, &mut agents, &actions, &cfg);
        let mut records = Vec::with_capacity(agents.len());
        for (i, obs) in res.observations.into_iter().enumerate() {
            records.push(AgentStepRecord::new(
                agents[i].id,
                actions[i],
                &res.outcomes[i],
            ));
            histories[i].push(actions[i], res.rewards[i], obs);
        }
        let (weeds, crops) = composition_counts(&state, nb);
        trace.steps.push(StepRecord {
            step,
            agents: records,
            p1: crops as usize,
            p2: state.p2_count(),
            p3: state.p3_count(),
            weeds_near_p1: weeds,
        });
    }
    trace.complete = true;
    Ok(trace)
}
