use crate::policy::{Decision, PolicyInput};

/// One agent step as seen by the learner.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    /// Encoded observation the action was chosen from.
    pub obs: Vec<f32>,
    /// Encoded (observation, action, reward) tuple appended to the history
    /// after this step; empty for memoryless policies.
    pub tuple: Vec<f32>,
    pub decision: Decision,
    pub log_prob_old: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

/// One agent's experience over one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mem_len: usize,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn new(mem_len: usize) -> Self {
        Self {
            mem_len,
            steps: Vec::new(),
        }
    }

    /// Rebuild the policy input used at step `t`.
    pub fn input(&self, t: usize) -> PolicyInput<'_> {
        let start = t.saturating_sub(self.mem_len);
        let mut past: Vec<Option<&[f32]>> = vec![None; self.mem_len - (t - start)];
        past.extend(
            self.steps[start..t]
                .iter()
                .map(|s| Some(s.tuple.as_slice())),
        );
        PolicyInput {
            obs: &self.steps[t].obs,
            past,
        }
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    /// Undiscounted return.
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// All trajectories collected for one agent in one update.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryBatch {
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.trajectories.iter().map(|t| t.steps.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean undiscounted episode return.
    pub fn mean_return(&self) -> f64 {
        if self.trajectories.is_empty() {
            return 0.0;
        }
        self.trajectories
            .iter()
            .map(Trajectory::total_reward)
            .sum::<f64>()
            / self.trajectories.len() as f64
    }

    /// Number of steps that took decision `d`.
    pub fn count_decisions(&self, d: Decision) -> usize {
        self.trajectories
            .iter()
            .flat_map(|t| &t.steps)
            .filter(|s| s.decision == d)
            .count()
    }
}
