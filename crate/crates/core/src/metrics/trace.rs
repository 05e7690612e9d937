//! Step-level episode traces and their CSV form.
//!
//! The CSV has one header line and three row kinds: `env` rows with the plant
//! counts after each step, `agent` rows with one agent's action and its
//! effects, and a final `end` row whose presence marks a complete trace. The
//! `end` row carries the episode length in `step`, the season length in
//! `agent` and the neighbourhood used for `weeds_near_p1` in `action`.

use std::fmt::Write as _;
use std::path::Path;

use super::composition::Neighbourhood;
use crate::agents::{ActionOutcome, AgentAction, AgentId};
use crate::env::Season;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str =
    "step,kind,agent,action,reward,effective,moved,watered,p2_removed,took_p1,took_p3,p1,p2,p3,weeds_near_p1";

#[derive(Debug, Clone, PartialEq)]
pub struct AgentStepRecord {
    pub agent: AgentId,
    pub action: AgentAction,
    pub reward: f64,
    pub effective: bool,
    pub moved: bool,
    pub watered: bool,
    pub p2_removed: bool,
    pub took_p1: bool,
    pub took_p3: bool,
}

impl AgentStepRecord {
    pub fn new(agent: AgentId, action: AgentAction, out: &ActionOutcome) -> Self {
        Self {
            agent,
            action,
            reward: out.reward,
            effective: out.effective,
            moved: out.moved,
            watered: out.watered,
            p2_removed: out.p2_removed,
            took_p1: out.harvest.is_some_and(|h| h.took_p1),
            took_p3: out.harvest.is_some_and(|h| h.took_p3),
        }
    }
}

/// Everything recorded for one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub agents: Vec<AgentStepRecord>,
    /// Plant counts after the step's ecology.
    pub p1: usize,
    pub p2: usize,
    pub p3: usize,
    /// Sum over P1 cells of the P2 plants in their neighbourhood.
    pub weeds_near_p1: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub episode_length: usize,
    pub season_length: usize,
    pub neighbourhood: Neighbourhood,
    pub steps: Vec<StepRecord>,
    /// False when the trace was cut short.
    pub complete: bool,
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

fn nb_name(nb: Neighbourhood) -> &'static str {
    match nb {
        Neighbourhood::Moore => "moore",
        Neighbourhood::VonNeumann => "von_neumann",
    }
}

impl EpisodeTrace {
    pub fn new(episode_length: usize, season_length: usize, neighbourhood: Neighbourhood) -> Self {
        Self {
            episode_length,
            season_length,
            neighbourhood,
            steps: Vec::with_capacity(episode_length),
            complete: false,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * self.steps.len() * 2);
        s.push_str(TRACE_HEADER);
        s.push('\n');
        for r in &self.steps {
            for a in &r.agents {
                let _ = writeln!(
                    s,
                    "{},agent,{},{},{},{},{},{},{},{},{},,,,",
                    r.step,
                    a.agent,
                    a.action.code(),
                    a.reward,
                    flag(a.effective),
                    flag(a.moved),
                    flag(a.watered),
                    flag(a.p2_removed),
                    flag(a.took_p1),
                    flag(a.took_p3),
                );
            }
            let _ = writeln!(
                s,
                "{},env,,,,,,,,,,{},{},{},{}",
                r.step, r.p1, r.p2, r.p3, r.weeds_near_p1
            );
        }
        if self.complete {
            let _ = writeln!(
                s,
                "{},end,{},{},,,,,,,,,,,",
                self.episode_length,
                self.season_length,
                nb_name(self.neighbourhood)
            );
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    /// Parse a trace. A missing `end` row yields an incomplete trace, which
    /// metric collection rejects.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(TRACE_HEADER) {
            return Err(Error::Parse("missing or unexpected trace header".into()));
        }
        let mut trace = EpisodeTrace::new(0, 0, Neighbourhood::Moore);
        let mut pending: Vec<AgentStepRecord> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let bad = |what: &str| Error::Parse(format!("trace line {}: {what}", lineno + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 15 {
                return Err(bad("wrong field count"));
            }
            if trace.complete {
                return Err(bad("rows after end"));
            }
            let int = |i: usize| f[i].parse::<u64>().map_err(|_| bad("integer field"));
            let bit = |i: usize| match f[i] {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad("flag field")),
            };
            let step = int(0)? as usize;
            match f[1] {
                "agent" => pending.push(AgentStepRecord {
                    agent: int(2)?,
                    action: AgentAction::from_code(f[3]).ok_or_else(|| bad("action code"))?,
                    reward: f[4].parse().map_err(|_| bad("reward"))?,
                    effective: bit(5)?,
                    moved: bit(6)?,
                    watered: bit(7)?,
                    p2_removed: bit(8)?,
                    took_p1: bit(9)?,
                    took_p3: bit(10)?,
                }),
                "env" => {
                    if step != trace.steps.len() {
                        return Err(bad("steps out of order"));
                    }
                    trace.steps.push(StepRecord {
                        step,
                        agents: std::mem::take(&mut pending),
                        p1: int(11)? as usize,
                        p2: int(12)? as usize,
                        p3: int(13)? as usize,
                        weeds_near_p1: int(14)?,
                    });
                }
                "end" => {
                    if !pending.is_empty() {
                        return Err(bad("agent rows without env row"));
                    }
                    trace.episode_length = step;
                    trace.season_length = int(2)? as usize;
                    if trace.season_length == 0 {
                        return Err(bad("season length"));
                    }
                    trace.neighbourhood = match f[3] {
                        "moore" => Neighbourhood::Moore,
                        "von_neumann" => Neighbourhood::VonNeumann,
                        _ => return Err(bad("neighbourhood")),
                    };
                    trace.complete = true;
                }
                _ => return Err(bad("row kind")),
            }
        }
        if !trace.complete {
            trace.episode_length = trace.steps.len();
        }
        Ok(trace)
    }
}

/// Episode-level measures.
///
/// - `p1_abundance`: mean over steps of the number of P1 plants after the step.
/// - `final_p1_abundance`: the same mean over the steps of the last summer.
/// - `p3_foraging`: harvest actions that removed a P3 plant.
/// - `p1_harvests`: harvest actions that removed a P1 plant.
/// - `watering_events`: effective `drop:water` actions.
/// - `p2_removals`: protect or harvest actions that removed a P2 plant or P2 seeds.
/// - `movement_rate`: move actions per agent per step.
/// - `neighbourhood_composition`: mean over steps of the P2-around-P1 average
///   (0 on steps without P1).
/// - `returns`: undiscounted return per agent, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub p1_abundance: f64,
    pub final_p1_abundance: f64,
    pub p3_foraging: u64,
    pub p1_harvests: u64,
    pub watering_events: u64,
    pub p2_removals: u64,
    pub movement_rate: f64,
    pub neighbourhood_composition: f64,
    pub agent_ids: Vec<AgentId>,
    pub returns: Vec<f64>,
}

impl EpisodeMetrics {
    pub fn mean_return(&self) -> f64 {
        if self.returns.is_empty() {
            0.0
        } else {
            self.returns.iter().sum::<f64>() / self.returns.len() as f64
        }
    }

    pub fn max_return(&self) -> f64 {
        self.returns
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn collect_episode_metrics(trace: &EpisodeTrace) -> Result<EpisodeMetrics> {
    if !trace.complete || trace.steps.len() != trace.episode_length {
        return Err(Error::TruncatedTrace {
            expected: trace
                .episode_length
                .max(trace.steps.len() + usize::from(!trace.complete)),
            found: trace.steps.len(),
        });
    }
    let n_steps = trace.steps.len();
    let mut m = EpisodeMetrics {
        p1_abundance: 0.0,
        final_p1_abundance: 0.0,
        p3_foraging: 0,
        p1_harvests: 0,
        watering_events: 0,
        p2_removals: 0,
        movement_rate: 0.0,
        neighbourhood_composition: 0.0,
        agent_ids: Vec::new(),
        returns: Vec::new(),
    };
    let mut moves = 0u64;
    let mut agent_steps = 0u64;
    let mut p1_sum = 0u64;
    let mut n1_sum = 0.0;
    for r in &trace.steps {
        p1_sum += r.p1 as u64;
        if r.p1 > 0 {
            n1_sum += r.weeds_near_p1 as f64 / r.p1 as f64;
        }
        for a in &r.agents {
            agent_steps += 1;
            moves += u64::from(matches!(a.action, AgentAction::Move(_)));
            m.watering_events += u64::from(a.watered);
            m.p2_removals += u64::from(a.p2_removed);
            m.p3_foraging += u64::from(a.took_p3);
            m.p1_harvests += u64::from(a.took_p1);
            match m.agent_ids.iter().position(|&id| id == a.agent) {
                Some(i) => m.returns[i] += a.reward,
                None => {
                    m.agent_ids.push(a.agent);
                    m.returns.push(a.reward);
                }
            }
        }
    }
    if trace.season_length == 0 {
        return Err(Error::InvalidConfig("trace season length is zero".into()));
    }
    let summers: Vec<&StepRecord> = trace
        .steps
        .iter()
        .filter(|r| Season::at(r.step, trace.season_length).0 == Season::Summer)
        .collect();
    if let Some(last) = summers.last() {
        let block = last.step / trace.season_length;
        let tail: Vec<usize> = summers
            .iter()
            .filter(|r| r.step / trace.season_length == block)
            .map(|r| r.p1)
            .collect();
        m.final_p1_abundance = tail.iter().sum::<usize>() as f64 / tail.len() as f64;
    }
    if n_steps > 0 {
        m.p1_abundance = p1_sum as f64 / n_steps as f64;
        m.neighbourhood_composition = n1_sum / n_steps as f64;
    }
    if agent_steps > 0 {
        m.movement_rate = moves as f64 / agent_steps as f64;
    }
    Ok(m)
}
