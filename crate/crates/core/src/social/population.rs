use std::fmt::Write as _;

use super::config::PopulationConfig;
use crate::agents::AgentId;
use crate::error::Result;
use crate::policy::PolicyHandle;
use crate::ppo::{Learner, PPOConfig};

/// Bookkeeping kept next to each living learner.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberInfo {
    /// Accumulated per-episode return since birth or last reproduction.
    pub cumulative: f64,
    pub parent: Option<AgentId>,
    pub birth_episode: u64,
}

/// One agent that ever lived.
#[derive(Debug, Clone, PartialEq)]
pub struct LineageRecord {
    pub id: AgentId,
    pub parent: Option<AgentId>,
    pub birth_episode: u64,
    pub death_episode: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth,
    Death,
    Extinction,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Birth => "birth",
            EventKind::Death => "death",
            EventKind::Extinction => "extinction",
        }
    }
}

/// A roster change. For births `agent` is the child and `cumulative` the
/// parent's accumulator before it was reset; extinction carries no agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationEvent {
    pub episode: u64,
    pub kind: EventKind,
    pub agent: AgentId,
    pub parent: Option<AgentId>,
    pub cumulative: f64,
}

pub const EVENT_HEADER: &str = "episode,event,agent,parent,r_i";

pub fn events_csv(events: &[PopulationEvent]) -> String {
    let mut s = format!("{EVENT_HEADER}\n");
    for e in events {
        let parent = e.parent.map(|p| p.to_string()).unwrap_or_default();
        let agent = if e.kind == EventKind::Extinction {
            String::new()
        } else {
            e.agent.to_string()
        };
        let _ = writeln!(
            s,
            "{},{},{agent},{parent},{}",
            e.episode,
            e.kind.name(),
            e.cumulative
        );
    }
    s
}

/// Living agents, parallel to their bookkeeping, plus everyone who has died.
///
/// `learners[i]` and `members[i]` describe the same agent.
#[derive(Debug, Clone)]
pub struct PopulationState {
    pub learners: Vec<Learner>,
    pub members: Vec<MemberInfo>,
    pub lineage: Vec<LineageRecord>,
    pub next_id: AgentId,
    /// Number of completed population updates.
    pub episode: u64,
    pub extinct: bool,
}

impl PopulationState {
    /// Founders take ids `0..n`.
    pub fn new(learners: Vec<Learner>) -> Self {
        let members = learners
            .iter()
            .map(|_| MemberInfo {
                cumulative: 0.0,
                parent: None,
                birth_episode: 0,
            })
            .collect();
        let lineage = learners
            .iter()
            .map(|l| LineageRecord {
                id: l.id,
                parent: None,
                birth_episode: 0,
                death_episode: None,
            })
            .collect();
        let next_id = learners.iter().map(|l| l.id + 1).max().unwrap_or(0);
        Self {
            learners,
            members,
            lineage,
            next_id,
            episode: 0,
            extinct: false,
        }
    }

    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    pub fn ids(&self) -> Vec<AgentId> {
        self.learners.iter().map(|l| l.id).collect()
    }

    /// `parent child` edges, one per line, in birth order.
    pub fn lineage_edges(&self) -> String {
        let mut s = String::from("# parent child\n");
        for r in &self.lineage {
            if let Some(p) = r.parent {
                let _ = writeln!(s, "{p} {}", r.id);
            }
        }
        s
    }
}

/// Exact copy of `parent`'s parameters with a fresh sampling generator.
pub fn clone_policy(parent: &PolicyHandle, sampler_seed: u64) -> Result<PolicyHandle> {
    PolicyHandle::from_parts(
        parent.arch().clone(),
        parent.params().to_vec(),
        sampler_seed,
    )
}

/// Which agents reproduce and which die, before any roster change.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UpdatePlan {
    /// Parents allowed to reproduce, in reproduction order.
    pub parents: Vec<AgentId>,
    pub deaths: Vec<AgentId>,
    /// Eligible parents turned away by the cap.
    pub suppressed: Vec<AgentId>,
}

/// Decide births and deaths from accumulated rewards alone.
pub fn plan_update(
    roster: &[(AgentId, f64)],
    r_plus: f64,
    r_minus: f64,
    n_max: usize,
) -> UpdatePlan {
    let deaths: Vec<AgentId> = roster
        .iter()
        .filter(|(_, r)| *r <= r_minus)
        .map(|(id, _)| *id)
        .collect();
    let mut eligible: Vec<(AgentId, f64)> = roster
        .iter()
        .filter(|(_, r)| *r >= r_plus)
        .copied()
        .collect();
    eligible.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let headroom = n_max.saturating_sub(roster.len() - deaths.len());
    let take = headroom.min(eligible.len());
    UpdatePlan {
        parents: eligible[..take].iter().map(|e| e.0).collect(),
        deaths,
        suppressed: eligible[take..].iter().map(|e| e.0).collect(),
    }
}

/// Add this episode's rewards to the accumulators, then clone agents at or
/// above `r_plus` and remove those at or below `r_minus`.
///
/// Children get fresh optimizer state and a sampling seed from
/// `child_seed(child_id)`; they join the roster after the survivors.
pub fn population_update(
    pop: &mut PopulationState,
    episode_rewards: &[f64],
    cfg: &PopulationConfig,
    thresholds: (f64, f64),
    ppo: &PPOConfig,
    child_seed: impl Fn(AgentId) -> u64,
) -> Result<Vec<PopulationEvent>> {
    assert_eq!(
        episode_rewards.len(),
        pop.len(),
        "one reward per living agent"
    );
    let episode = pop.episode;
    pop.episode += 1;
    if !cfg.sl_enabled || pop.extinct {
        return Ok(Vec::new());
    }
    for (m, r) in pop.members.iter_mut().zip(episode_rewards) {
        m.cumulative += r;
    }
    let roster: Vec<(AgentId, f64)> = pop
        .learners
        .iter()
        .zip(&pop.members)
        .map(|(l, m)| (l.id, m.cumulative))
        .collect();
    let plan = plan_update(&roster, thresholds.0, thresholds.1, cfg.n_max);

    let mut events = Vec::new();
    let mut children = Vec::new();
    for &parent in &plan.parents {
        let i = roster
            .iter()
            .position(|(id, _)| *id == parent)
            .expect("parent is on the roster");
        let child_id = pop.next_id;
        pop.next_id += 1;
        let policy = clone_policy(&pop.learners[i].policy, child_seed(child_id))?;
        children.push((
            Learner::new(child_id, policy, ppo),
            MemberInfo {
                cumulative: 0.0,
                parent: Some(parent),
                birth_episode: episode + 1,
            },
        ));
        pop.lineage.push(LineageRecord {
            id: child_id,
            parent: Some(parent),
            birth_episode: episode + 1,
            death_episode: None,
        });
        events.push(PopulationEvent {
            episode,
            kind: EventKind::Birth,
            agent: child_id,
            parent: Some(parent),
            cumulative: pop.members[i].cumulative,
        });
        pop.members[i].cumulative = 0.0;
    }
    for &dead in &plan.deaths {
        let r = roster
            .iter()
            .find(|(id, _)| *id == dead)
            .expect("dead agent is on the roster")
            .1;
        events.push(PopulationEvent {
            episode,
            kind: EventKind::Death,
            agent: dead,
            parent: None,
            cumulative: r,
        });
        if let Some(rec) = pop.lineage.iter_mut().find(|rec| rec.id == dead) {
            rec.death_episode = Some(episode);
        }
    }
    let keep: Vec<bool> = pop
        .learners
        .iter()
        .map(|l| !plan.deaths.contains(&l.id))
        .collect();
    let mut k = keep.iter();
    pop.learners.retain(|_| *k.next().unwrap());
    let mut k = keep.iter();
    pop.members.retain(|_| *k.next().unwrap());
    for (l, m) in children {
        pop.learners.push(l);
        pop.members.push(m);
    }
    if pop.is_empty() {
        pop.extinct = true;
        events.push(PopulationEvent {
            episode,
            kind: EventKind::Extinction,
            agent: 0,
            parent: None,
            cumulative: 0.0,
        });
    }
    Ok(events)
}
