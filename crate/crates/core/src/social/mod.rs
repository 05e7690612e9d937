//! Social learning: agents whose accumulated reward crosses an upper
//! threshold spawn a child carrying an exact copy of their policy, agents
//! below a lower threshold die, and the population is capped.

mod config;
mod population;
mod trainer;

pub use config::{PopulationConfig, Thresholds};
pub use population::{
    clone_policy, events_csv, plan_update, population_update, EventKind, LineageRecord, MemberInfo,
    PopulationEvent, PopulationState, UpdatePlan, EVENT_HEADER,
};
pub use trainer::{RoundReport, SocialTrainer};
