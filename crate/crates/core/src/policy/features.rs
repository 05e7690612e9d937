//! Flat float encodings of observations and history tuples.

use crate::agents::{AgentAction, Channel, Observation, CHANNELS, OBS_SIDE, OUT_OF_BOUNDS};
use crate::env::Season;

/// Window cells, inventory (3), season phase, winter flag.
pub const OBS_DIM: usize = OBS_SIDE * OBS_SIDE * CHANNELS + 5;

/// Side of the local patch kept in a history tuple.
const TUPLE_SIDE: usize = 3;
const ACTION_DIM: usize = 5 + 4 + 3 + 9;

/// Local 3x3 patch, inventory, season phase and flag, action one-hots, reward.
pub const TUPLE_DIM: usize = TUPLE_SIDE * TUPLE_SIDE * CHANNELS + 5 + ACTION_DIM + 1;

fn channel_scale(ch: usize) -> f32 {
    match ch {
        c if c == Channel::Seeds1 as usize || c == Channel::Seeds2 as usize => 0.25,
        c if c == Channel::Agents as usize => 0.5,
        _ => 1.0,
    }
}

fn encode_cell(window: &[f64], cell: usize, out: &mut Vec<f32>) {
    for ch in 0..CHANNELS {
        let v = window[cell * CHANNELS + ch];
        out.push(if v == OUT_OF_BOUNDS {
            -1.0
        } else {
            (v as f32 * channel_scale(ch)).min(2.0)
        });
    }
}

fn encode_scalars(obs: &Observation, out: &mut Vec<f32>) {
    let inv = obs.inventory;
    out.extend([inv.water_units, inv.seeds1, inv.seeds2].map(|n| (n as f32).min(4.0)));
    out.push(obs.season_phase as f32);
    out.push(if obs.season == Season::Winter {
        1.0
    } else {
        0.0
    });
}

pub fn encode_observation(obs: &Observation) -> Vec<f32> {
    let mut out = Vec::with_capacity(OBS_DIM);
    for cell in 0..OBS_SIDE * OBS_SIDE {
        encode_cell(&obs.window, cell, &mut out);
    }
    encode_scalars(obs, &mut out);
    out
}

/// Signed log compression so large watered harvests stay O(1).
fn squash_reward(r: f64) -> f32 {
    (r.signum() * r.abs().ln_1p()) as f32
}

/// Encode the tuple (observation seen, action taken, reward received).
pub fn encode_tuple(obs: &Observation, action: AgentAction, reward: f64) -> Vec<f32> {
    let mut out = Vec::with_capacity(TUPLE_DIM);
    let r = Observation::radius() as usize;
    for dy in r - 1..=r + 1 {
        for dx in r - 1..=r + 1 {
            encode_cell(&obs.window, dy * OBS_SIDE + dx, &mut out);
        }
    }
    encode_scalars(obs, &mut out);
    let mut onehot = [0.0f32; ACTION_DIM];
    let (kind, sub) = action.to_factors();
    onehot[kind] = 1.0;
    if let (Some(f), Some(s)) = (AgentAction::sub_factor(kind), sub) {
        let offset = [0, 5, 9, 12][f];
        onehot[offset + s] = 1.0;
    }
    out.extend(onehot);
    out.push(squash_reward(reward));
    out
}
