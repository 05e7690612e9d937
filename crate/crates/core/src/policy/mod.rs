//! History-conditioned stochastic policies: the action distribution, the
//! default trainable network, scripted oracles and parameter blobs.

mod blob;
mod distribution;
mod features;
mod history;
mod network;
mod scripted;

pub use blob::BLOB_VERSION;
pub use distribution::{sample_action, ActionDistribution, ActionLayout, Decision, LOGIT_CLAMP};
pub use features::{encode_observation, encode_tuple, OBS_DIM, TUPLE_DIM};
pub use history::{HistoryWindow, Transition};
pub use network::{Architecture, Backend, ForwardCache, PolicyHandle, PolicyInput, PolicyOutput};
pub use scripted::{scripted_farmer, scripted_forager, FARMER_RIPE};

use crate::error::Result;

/// Distribution and value estimate for the agent whose history is `history`.
pub fn policy_forward(
    handle: &PolicyHandle,
    history: &HistoryWindow,
) -> Result<(ActionDistribution, f64)> {
    let out = handle.forward(&history.input())?;
    Ok((out.dist, out.value))
}
