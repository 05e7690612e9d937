use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{observe, AgentAction, Item, Observation};
use crate::env::{harvest, EnvConfig, EnvState, Harvest};

pub type AgentId = u64;

/// Items carried by an agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub water_units: u32,
    pub seeds1: u32,
    pub seeds2: u32,
}

impl Inventory {
    fn slot(&mut self, item: Item) -> &mut u32 {
        match item {
            Item::Water => &mut self.water_units,
            Item::Seed1 => &mut self.seeds1,
            Item::Seed2 => &mut self.seeds2,
        }
    }

    pub fn count(&self, item: Item) -> u32 {
        match item {
            Item::Water => self.water_units,
            Item::Seed1 => self.seeds1,
            Item::Seed2 => self.seeds2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub position: (usize, usize),
    pub inventory: Inventory,
    pub cumulative_episode_reward: f64,
}

/// Effects of one applied action, used for rewards and episode metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ActionOutcome {
    pub reward: f64,
    /// False when the action could not take effect (its cost is still paid).
    pub effective: bool,
    pub moved: bool,
    /// Water was dropped on soil.
    pub watered: bool,
    /// A P2 plant or P2 seeds were removed by protect or harvest.
    pub p2_removed: bool,
    pub harvest: Option<Harvest>,
}

/// Put one agent per id at uniformly random cells.
pub fn place_agents(state: &mut EnvState, ids: &[AgentId]) -> Vec<AgentState> {
    ids.iter()
        .map(|&id| {
            let x = state.rng.gen_range(0..state.width());
            let y = state.rng.gen_range(0..state.height());
            state.cell_mut(x, y).agents_here += 1;
            AgentState {
                id,
                position: (x, y),
                inventory: Inventory::default(),
                cumulative_episode_reward: 0.0,
            }
        })
        .collect()
}

/// Apply a single action. Infeasible actions leave the world unchanged but
/// still cost the agent.
pub fn apply_action(
    state: &mut EnvState,
    agent: &mut AgentState,
    action: AgentAction,
    cfg: &EnvConfig,
) -> ActionOutcome {
    let (x, y) = agent.position;
    let cap = cfg.inventory_capacity;
    let mut out = ActionOutcome::default();
    match action {
        AgentAction::Move(dir) => {
            out.reward = -cfg.move_cost;
            let (dx, dy) = dir.delta();
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if state.in_bounds(nx, ny) {
                let (nx, ny) = (nx as usize, ny as usize);
                state.cell_mut(x, y).agents_here -= 1;
                state.cell_mut(nx, ny).agents_here += 1;
                agent.position = (nx, ny);
                out.effective = true;
                out.moved = true;
            }
        }
        AgentAction::Pick(item) => {
            out.reward = -cfg.pick_drop_cost;
            if agent.inventory.count(item) < cap {
                let irrigated = state.is_irrigated(x, y);
                let cell = state.cell_mut(x, y);
                let available = match item {
                    Item::Water => cell.water_source || cell.watered,
                    Item::Seed1 => cell.seeds1 > 0,
                    Item::Seed2 => cell.seeds2 > 0,
                };
                if available {
                    match item {
                        // Sources and their irrigated ring are refilled continuously.
                        Item::Water if !cell.water_source && !irrigated => cell.watered = false,
                        Item::Water => {}
                        Item::Seed1 => cell.seeds1 -= 1,
                        Item::Seed2 => cell.seeds2 -= 1,
                    }
                    *agent.inventory.slot(item) += 1;
                    out.effective = true;
                }
            }
        }
        AgentAction::Drop(item) => {
            out.reward = -cfg.pick_drop_cost;
            if agent.inventory.count(item) > 0 {
                *agent.inventory.slot(item) -= 1;
                let cell = state.cell_mut(x, y);
                match item {
                    Item::Water => {
                        cell.watered = true;
                        out.watered = true;
                    }
                    Item::Seed1 => cell.seeds1 += 1,
                    Item::Seed2 => cell.seeds2 += 1,
                }
                out.effective = true;
            }
        }
        AgentAction::Harvest => {
            let h = harvest(state.cell_mut(x, y), cfg);
            out.reward = h.reward;
            out.effective = h.took_p1 || h.took_p2 || h.took_p3;
            out.p2_removed = h.took_p2;
            out.harvest = Some(h);
        }
        AgentAction::Protect(offset) => {
            out.reward = -cfg.protect_cost;
            let (tx, ty) = (
                x as i64 + i64::from(offset.dx()),
                y as i64 + i64::from(offset.dy()),
            );
            if state.in_bounds(tx, ty) {
                let cell = state.cell_mut(tx as usize, ty as usize);
                if cell.has_p2() || cell.seeds2 > 0 {
                    cell.growth2 = 0.0;
                    cell.seeds2 = 0;
                    out.p2_removed = true;
                    out.effective = true;
                }
            }
        }
    }
    agent.cumulative_episode_reward += out.reward;
    out
}

/// Per-agent results of a joint step, indexed like the agent slice.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub rewards: Vec<f64>,
    pub outcomes: Vec<ActionOutcome>,
    pub observations: Vec<Observation>,
}

/// Apply every agent's action in a freshly shuffled order, then run the
/// ecology for the current step and advance the clock.
pub fn joint_step(
    state: &mut EnvState,
    agents: &mut [AgentState],
    actions: &[AgentAction],
    cfg: &EnvConfig,
) -> StepResult {
    assert_eq!(agents.len(), actions.len(), "one action per agent");
    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.shuffle(&mut state.rng);

    let mut outcomes = vec![ActionOutcome::default(); agents.len()];
    for i in order {
        outcomes[i] = apply_action(state, &mut agents[i], actions[i], cfg);
    }
    state.ecology_step(cfg);

    let observations = agents
        .iter()
        .map(|a| observe(state, a, cfg.season_length))
        .collect();
    StepResult {
        rewards: outcomes.iter().map(|o| o.reward).collect(),
        outcomes,
        observations,
    }
}
