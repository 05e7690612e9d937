//! Decentralized proximal policy optimization: each agent learns only from
//! its own trajectories and owns its optimizer.

mod adam;
mod advantage;
mod config;
mod loss;
mod rollout;
mod trainer;
mod trajectory;
mod update;

pub use adam::{clip_grad_norm, Adam};
pub use advantage::{discounted_return, gae, normalize};
pub use config::PPOConfig;
pub use loss::{ppo_loss, ppo_loss_grad, LossBatch, LossDiagnostics, LossGrad};
pub use rollout::{collect_batches, collect_episode};
pub use trainer::{
    evaluate_learners, metrics_row, ppo_round, save_checkpoints, TrainConfig, Trainer,
    METRICS_HEADER,
};
pub use trajectory::{Trajectory, TrajectoryBatch, TrajectoryStep};
pub use update::{train_update, train_update_all, Learner, UpdateStats};

/// Advantages and value targets for every step of `batch`, trajectory after
/// trajectory, with advantages normalized across the whole batch.
pub fn gae_advantages(batch: &TrajectoryBatch, cfg: &PPOConfig) -> (Vec<f64>, Vec<f64>) {
    let mut adv = Vec::with_capacity(batch.len());
    let mut ret = Vec::with_capacity(batch.len());
    for t in &batch.trajectories {
        let values: Vec<f64> = t.steps.iter().map(|s| s.value).collect();
        let dones: Vec<bool> = t.steps.iter().map(|s| s.done).collect();
        let boot = values.last().copied().unwrap_or(0.0);
        let (a, r) = gae(
            &t.rewards(),
            &values,
            &dones,
            boot,
            cfg.gamma,
            cfg.gae_lambda,
        );
        adv.extend(a);
        ret.extend(r);
    }
    normalize(&mut adv);
    (adv, ret)
}
