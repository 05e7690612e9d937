//! Plant ecology of the seasonal grid world.
//!
//! Each cell carries seed stocks for the domesticate (P1) and the weed (P2),
//! the growth of at most one of those plants, water flags and the presence of
//! a wild plant (P3). Time is split into alternating summer and winter blocks.

mod cell;
mod config;
mod dump;
mod dynamics;
mod state;

pub use cell::CellState;
pub use config::EnvConfig;
pub use dump::{parse_dump, write_dump};
pub use dynamics::{germination_probabilities, harvest, harvest_reward, Germination, Harvest};
pub use state::{EnvState, Season};

/// Growth value assigned to a freshly germinated plant.
pub const INITIAL_GROWTH: f64 = 0.1;

/// Number of trailing summer steps during which plants disperse seeds.
pub const DISPERSAL_WINDOW: usize = 10;
