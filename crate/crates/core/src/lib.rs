//! Seasonal grid-world ecology for studying how cultivation emerges among
//! learning agents.
//!
//! The crate is organised in layers:
//!
//! - [`env`]: the plant ecology (germination, dispersal, seasons, water, rewards).
//! - [`agents`]: action space, observations and the joint multi-agent step.
//! - [`policy`]: history-conditioned stochastic policies plus scripted heuristics.
//! - [`ppo`]: decentralized proximal policy optimization.
//! - [`social`]: reward-threshold reproduction with exact policy cloning.
//! - [`meanfield`]: the reduced three-variable ODE model and its hysteresis sweep.
//! - [`metrics`]: episode measures, traces, CSV output and parameter sweeps.

pub mod agents;
pub mod env;
pub mod error;
pub mod meanfield;
pub mod metrics;
pub mod policy;
pub mod ppo;
pub mod rng;
pub mod social;

pub use error::{Error, Result};
