use super::{AgentState, Inventory};
use crate::env::{EnvState, Season};

/// Side of the square egocentric window.
pub const OBS_SIDE: usize = 11;
pub const CHANNELS: usize = 8;
/// Value written to every channel of a cell outside the grid.
pub const OUT_OF_BOUNDS: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    P1Growth,
    P2Growth,
    P3,
    Seeds1,
    Seeds2,
    WaterSource,
    Watered,
    Agents,
}

/// Partial view of the world from one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Row-major `[dy][dx][channel]`, centred on the agent.
    pub window: Vec<f64>,
    pub inventory: Inventory,
    /// Position within the current season, in [0, 1).
    pub season_phase: f64,
    pub season: Season,
}

impl Observation {
    pub fn radius() -> i64 {
        (OBS_SIDE / 2) as i64
    }

    /// Value at relative position (dx, dy), both in -5..=5.
    pub fn get(&self, dx: i64, dy: i64, ch: Channel) -> f64 {
        let r = Self::radius();
        let row = (dy + r) as usize;
        let col = (dx + r) as usize;
        self.window[(row * OBS_SIDE + col) * CHANNELS + ch as usize]
    }

    pub fn in_bounds(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::Agents) != OUT_OF_BOUNDS
    }

    /// An all-zero observation, used to pad histories.
    pub fn zeros() -> Self {
        Self {
            window: vec![0.0; OBS_SIDE * OBS_SIDE * CHANNELS],
            inventory: Inventory::default(),
            season_phase: 0.0,
            season: Season::Summer,
        }
    }
}

/// Egocentric window, inventory and season clock of `agent`. Pure.
pub fn observe(state: &EnvState, agent: &AgentState, season_length: usize) -> Observation {
    let r = Observation::radius();
    let mut window = Vec::with_capacity(OBS_SIDE * OBS_SIDE * CHANNELS);
    let (ax, ay) = (agent.position.0 as i64, agent.position.1 as i64);
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (ax + dx, ay + dy);
            if !state.in_bounds(x, y) {
                window.extend([OUT_OF_BOUNDS; CHANNELS]);
                continue;
            }
            let c = state.cell(x as usize, y as usize);
            window.extend([
                c.growth1,
                c.growth2,
                f64::from(u8::from(c.p3_present)),
                f64::from(c.seeds1),
                f64::from(c.seeds2),
                f64::from(u8::from(c.water_source)),
                f64::from(u8::from(c.watered)),
                f64::from(c.agents_here),
            ]);
        }
    }
    Observation {
        window,
        inventory: agent.inventory,
        season_phase: state.season_step as f64 / season_length as f64,
        season: state.season,
    }
}
