use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::adam::{clip_grad_norm, Adam};
use super::loss::{ppo_loss, ppo_loss_grad, LossBatch, LossDiagnostics};
use super::trajectory::TrajectoryBatch;
use super::{gae_advantages, PPOConfig};
use crate::agents::AgentId;
use crate::error::{Error, Result};
use crate::policy::PolicyHandle;
use crate::rng::rng_from;

/// A learning agent: its policy and its private optimizer state.
#[derive(Debug, Clone)]
pub struct Learner {
    pub id: AgentId,
    pub policy: PolicyHandle,
    pub optimizer: Adam,
}

impl Learner {
    pub fn new(id: AgentId, policy: PolicyHandle, cfg: &PPOConfig) -> Self {
        let optimizer = Adam::new(policy.param_count(), cfg.adam_eps);
        Self {
            id,
            policy,
            optimizer,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateStats {
    pub agent: AgentId,
    pub samples: usize,
    pub mean_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub approx_kl: f64,
    /// Minibatch gradient steps taken.
    pub steps: usize,
    /// The update stopped early on the KL ceiling.
    pub kl_stopped: bool,
}

/// Flattened per-sample targets of a batch.
struct Prepared {
    index: Vec<(usize, usize)>,
    old_log_probs: Vec<f64>,
    old_values: Vec<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
}

fn prepare(batch: &TrajectoryBatch, cfg: &PPOConfig) -> Prepared {
    let (advantages, returns) = gae_advantages(batch, cfg);
    let mut p = Prepared {
        index: Vec::with_capacity(batch.len()),
        old_log_probs: Vec::with_capacity(batch.len()),
        old_values: Vec::with_capacity(batch.len()),
        advantages,
        returns,
    };
    for (k, traj) in batch.trajectories.iter().enumerate() {
        for (t, s) in traj.steps.iter().enumerate() {
            p.index.push((k, t));
            p.old_log_probs.push(s.log_prob_old);
            p.old_values.push(s.value);
        }
    }
    p
}

/// PPO update of one agent on its own batch.
pub fn train_update(
    learner: &mut Learner,
    batch: &TrajectoryBatch,
    cfg: &PPOConfig,
    shuffle_seed: u64,
) -> Result<UpdateStats> {
    cfg.validate()?;
    let prep = prepare(batch, cfg);
    if prep.old_log_probs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("old log-probabilities"));
    }
    let mut stats = UpdateStats {
        agent: learner.id,
        samples: prep.index.len(),
        mean_return: batch.mean_return(),
        ..Default::default()
    };
    if prep.index.is_empty() {
        return Ok(stats);
    }

    let layout = learner.policy.layout().clone();
    let n_logits = layout.total_logits();
    let mut order: Vec<usize> = (0..prep.index.len()).collect();
    let mut rng = rng_from(shuffle_seed);
    let mut sum = LossDiagnostics::default();
    let mut first: Option<LossDiagnostics> = None;
    let mut grad = vec![0.0; learner.policy.param_count()];

    'epochs: for _ in 0..cfg.epochs_per_update {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.minibatch_size) {
            let policy = &learner.policy;
            let mut outs = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let (k, t) = prep.index[i];
                let traj = &batch.trajectories[k];
                let input = traj.input(t);
                let (out, cache) = policy.forward_cached(&input)?;
                outs.push((input, out, cache, traj.steps[t].decision));
            }
            let new_lp: Vec<f64> = outs
                .iter()
                .map(|(_, o, _, d)| o.dist.log_prob(&layout, *d))
                .collect();
            let new_v: Vec<f64> = outs.iter().map(|(_, o, _, _)| o.value).collect();
            let ent: Vec<f64> = outs
                .iter()
                .map(|(_, o, _, _)| o.dist.entropy(&layout))
                .collect();
            let pick = |v: &[f64]| chunk.iter().map(|&i| v[i]).collect::<Vec<f64>>();
            let (old_lp, adv, ret, old_v) = (
                pick(&prep.old_log_probs),
                pick(&prep.advantages),
                pick(&prep.returns),
                pick(&prep.old_values),
            );
            let lb = LossBatch {
                old_log_probs: &old_lp,
                advantages: &adv,
                returns: &ret,
                old_values: &old_v,
            };
            let (_, diag) = ppo_loss(&lb, &new_lp, &new_v, &ent, cfg)?;
            first.get_or_insert(diag);
            if diag.approx_kl > cfg.kl_ceiling {
                stats.kl_stopped = true;
                break 'epochs;
            }
            let g = ppo_loss_grad(&lb, &new_lp, &new_v, &ent, cfg);

            grad.iter_mut().for_each(|x| *x = 0.0);
            let mut d_logits = vec![0.0; n_logits];
            for (j, (input, out, cache, decision)) in outs.iter().enumerate() {
                d_logits.iter_mut().for_each(|x| *x = 0.0);
                out.dist
                    .add_log_prob_grad(&layout, *decision, g.d_log_prob[j], &mut d_logits);
                out.dist
                    .add_entropy_grad(&layout, g.d_entropy, &mut d_logits);
                policy.backward(input, cache, &d_logits, g.d_value[j], &mut grad);
            }
            clip_grad_norm(&mut grad, cfg.max_grad_norm);
            learner
                .optimizer
                .step(learner.policy.params_mut(), &grad, cfg.learning_rate);

            stats.steps += 1;
            sum.policy_loss += diag.policy_loss;
            sum.value_loss += diag.value_loss;
            sum.entropy += diag.entropy;
            sum.clip_fraction += diag.clip_fraction;
            sum.approx_kl += diag.approx_kl;
        }
    }

    let avg = if stats.steps > 0 {
        let n = stats.steps as f64;
        LossDiagnostics {
            policy_loss: sum.policy_loss / n,
            value_loss: sum.value_loss / n,
            entropy: sum.entropy / n,
            clip_fraction: sum.clip_fraction / n,
            approx_kl: sum.approx_kl / n,
        }
    } else {
        first.unwrap_or_default()
    };
    stats.policy_loss = avg.policy_loss;
    stats.value_loss = avg.value_loss;
    stats.entropy = avg.entropy;
    stats.clip_fraction = avg.clip_fraction;
    stats.approx_kl = avg.approx_kl;
    if !learner.policy.params().iter().all(|p| p.is_finite()) {
        return Err(Error::NonFinite("policy parameters after update"));
    }
    Ok(stats)
}

/// Independent updates of several agents, each on its own batch.
pub fn train_update_all(
    learners: &mut [Learner],
    batches: &[TrajectoryBatch],
    cfg: &PPOConfig,
    shuffle_seeds: &[u64],
) -> Result<Vec<UpdateStats>> {
    assert!(learners.len() == batches.len() && batches.len() == shuffle_seeds.len());
    learners
        .par_iter_mut()
        .zip(batches.par_iter())
        .zip(shuffle_seeds.par_iter())
        .map(|((l, b), &s)| train_update(l, b, cfg, s))
        .collect()
}
