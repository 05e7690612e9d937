use std::collections::VecDeque;

use super::features::{encode_observation, encode_tuple};
use super::network::PolicyInput;
use crate::agents::{AgentAction, Observation};

/// One (observation, action, reward) step of an agent's history.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub action: AgentAction,
    pub reward: f64,
}

/// The last `capacity` transitions plus the current observation.
///
/// Transitions are kept encoded; missing slots at episode start read as zero
/// padding.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    capacity: usize,
    past: VecDeque<Vec<f32>>,
    current: Vec<f32>,
    raw_current: Observation,
    last_transition: Option<Transition>,
}

impl HistoryWindow {
    pub fn new(capacity: usize, first: Observation) -> Self {
        Self {
            capacity,
            past: VecDeque::with_capacity(capacity + 1),
            current: encode_observation(&first),
            raw_current: first,
            last_transition: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of stored past transitions.
    pub fn len(&self) -> usize {
        self.past.len()
    }

    pub fn is_empty(&self) -> bool {
        self.past.is_empty()
    }

    pub fn current(&self) -> &Observation {
        &self.raw_current
    }

    pub fn current_features(&self) -> &[f32] {
        &self.current
    }

    pub fn last_transition(&self) -> Option<&Transition> {
        self.last_transition.as_ref()
    }

    /// Record that `action` was taken in the current observation, earned
    /// `reward` and led to `next`.
    pub fn push(&mut self, action: AgentAction, reward: f64, next: Observation) {
        if self.capacity > 0 {
            if self.past.len() == self.capacity {
                self.past.pop_front();
            }
            self.past
                .push_back(encode_tuple(&self.raw_current, action, reward));
        }
        let prev = std::mem::replace(&mut self.raw_current, next);
        self.current = encode_observation(&self.raw_current);
        self.last_transition = Some(Transition {
            observation: prev,
            action,
            reward,
        });
    }

    /// Most recent encoded tuple, if any.
    pub fn last_tuple(&self) -> Option<&[f32]> {
        self.past.back().map(Vec::as_slice)
    }

    /// Oldest-first slots, front-padded with `None`.
    pub fn input(&self) -> PolicyInput<'_> {
        let pad = self.capacity - self.past.len();
        let mut past: Vec<Option<&[f32]>> = vec![None; pad];
        past.extend(self.past.iter().map(|t| Some(t.as_slice())));
        PolicyInput {
            obs: &self.current,
            past,
        }
    }
}
