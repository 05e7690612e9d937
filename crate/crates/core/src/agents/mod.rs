//! Agent-facing side of the environment: the multi-discrete action space,
//! egocentric observations, inventories and the joint transition.

mod action;
mod observation;
mod step;

pub use action::{ActionKind, AgentAction, Direction, Item, Offset, ACTION_FACTORS};
pub use observation::{observe, Channel, Observation, CHANNELS, OBS_SIDE, OUT_OF_BOUNDS};
pub use step::{
    apply_action, joint_step, place_agents, ActionOutcome, AgentId, AgentState, Inventory,
    StepResult,
};
