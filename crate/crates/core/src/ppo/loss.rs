use super::PPOConfig;
use crate::error::{Error, Result};

/// Per-sample quantities fixed at collection time.
#[derive(Debug, Clone, Copy)]
pub struct LossBatch<'a> {
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
    pub old_values: &'a [f64],
}

impl LossBatch<'_> {
    pub fn len(&self) -> usize {
        self.old_log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_log_probs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossDiagnostics {
    /// Negated clipped surrogate, averaged.
    pub policy_loss: f64,
    /// Clipped squared value error, averaged and halved.
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples whose ratio left `[1 - eps, 1 + eps]`.
    pub clip_fraction: f64,
    /// Mean of `(r - 1) - ln r`, a non-negative estimate of KL(old || new).
    pub approx_kl: f64,
}

/// Gradient of the loss with respect to each sample's new log-probability,
/// value and entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub d_log_prob: Vec<f64>,
    pub d_value: Vec<f64>,
    pub d_entropy: f64,
}

fn check_shapes(b: &LossBatch<'_>, lp: &[f64], v: &[f64], h: &[f64]) {
    let n = b.len();
    assert!(
        b.advantages.len() == n && b.returns.len() == n && b.old_values.len() == n,
        "inconsistent batch"
    );
    assert!(
        lp.len() == n && v.len() == n && h.len() == n,
        "inconsistent new quantities"
    );
}

/// `loss = -E[min(r A, clip(r) A)] + c_v E[value term] - lambda_entr E[H]`.
pub fn ppo_loss(
    b: &LossBatch<'_>,
    new_log_probs: &[f64],
    new_values: &[f64],
    entropies: &[f64],
    cfg: &PPOConfig,
) -> Result<(f64, LossDiagnostics)> {
    check_shapes(b, new_log_probs, new_values, entropies);
    let n = b.len() as f64;
    let eps = cfg.clip_eps;
    let mut d = LossDiagnostics::default();
    for i in 0..b.len() {
        let log_ratio = new_log_probs[i] - b.old_log_probs[i];
        let r = log_ratio.exp();
        let a = b.advantages[i];
        d.policy_loss -= (r * a).min(r.clamp(1.0 - eps, 1.0 + eps) * a);
        if (r - 1.0).abs() > eps {
            d.clip_fraction += 1.0;
        }
        d.approx_kl += (r - 1.0) - log_ratio;

        let v = new_values[i];
        let v_clipped =
            b.old_values[i] + (v - b.old_values[i]).clamp(-cfg.value_clip, cfg.value_clip);
        let target = b.returns[i];
        d.value_loss += 0.5 * (v - target).powi(2).max((v_clipped - target).powi(2));
        d.entropy += entropies[i];
    }
    d.policy_loss /= n;
    d.value_loss /= n;
    d.entropy /= n;
    d.clip_fraction /= n;
    d.approx_kl /= n;
    let loss = d.policy_loss + cfg.value_coef * d.value_loss - cfg.entropy_coef * d.entropy;
    if !loss.is_finite() {
        return Err(Error::NonFinite("ppo loss"));
    }
    Ok((loss, d))
}

/// Derivatives of [`ppo_loss`]. Where the clipped branch is active the
/// surrogate (or value) term is flat and contributes nothing.
pub fn ppo_loss_grad(
    b: &LossBatch<'_>,
    new_log_probs: &[f64],
    new_values: &[f64],
    entropies: &[f64],
    cfg: &PPOConfig,
) -> LossGrad {
    check_shapes(b, new_log_probs, new_values, entropies);
    let n = b.len() as f64;
    let eps = cfg.clip_eps;
    let mut g = LossGrad {
        d_log_prob: vec![0.0; b.len()],
        d_value: vec![0.0; b.len()],
        d_entropy: -cfg.entropy_coef / n,
    };
    for i in 0..b.len() {
        let r = (new_log_probs[i] - b.old_log_probs[i]).exp();
        let a = b.advantages[i];
        if r * a <= r.clamp(1.0 - eps, 1.0 + eps) * a {
            g.d_log_prob[i] = -a * r / n;
        }

        let v = new_values[i];
        let delta = v - b.old_values[i];
        let target = b.returns[i];
        let v_clipped = b.old_values[i] + delta.clamp(-cfg.value_clip, cfg.value_clip);
        let unclipped = (v - target).powi(2);
        let clipped = (v_clipped - target).powi(2);
        g.d_value[i] = if unclipped >= clipped {
            cfg.value_coef * (v - target) / n
        } else if delta.abs() < cfg.value_clip {
            cfg.value_coef * (v_clipped - target) / n
        } else {
            0.0
        };
    }
    g
}
