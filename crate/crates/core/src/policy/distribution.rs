//! Hierarchical multi-discrete action distributions.
//!
//! Factor 0 is the root (the action kind). Each root value consults at most
//! one sub-factor, so an action is a root choice plus an optional sub choice,
//! and its probability is the product of those two factor probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentAction, ACTION_FACTORS};

/// Bounds applied to raw logits so probabilities stay strictly positive.
pub const LOGIT_CLAMP: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionLayout {
    pub factors: Vec<usize>,
    /// For each root value, the sub-factor it consults.
    pub sub_factor: Vec<Option<usize>>,
}

impl ActionLayout {
    /// Layout of the grid-world action space.
    pub fn grid() -> Self {
        Self {
            factors: ACTION_FACTORS.to_vec(),
            sub_factor: (0..ACTION_FACTORS[0])
                .map(AgentAction::sub_factor)
                .collect(),
        }
    }

    /// A single categorical over `n` choices.
    pub fn categorical(n: usize) -> Self {
        Self {
            factors: vec![n],
            sub_factor: vec![None; n],
        }
    }

    pub fn total_logits(&self) -> usize {
        self.factors.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.factors
            .iter()
            .scan(0, |acc, &n| {
                let o = *acc;
                *acc += n;
                Some(o)
            })
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        !self.factors.is_empty()
            && self.factors.iter().all(|&n| n > 0)
            && self.sub_factor.len() == self.factors[0]
            && self
                .sub_factor
                .iter()
                .flatten()
                .all(|&f| f > 0 && f < self.factors.len())
    }
}

/// A sampled action in factor form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Decision {
    pub root: usize,
    pub sub: Option<usize>,
}

impl From<AgentAction> for Decision {
    fn from(a: AgentAction) -> Self {
        let (root, sub) = a.to_factors();
        Decision { root, sub }
    }
}

impl Decision {
    pub fn to_action(self) -> Option<AgentAction> {
        AgentAction::from_factors(self.root, self.sub)
    }
}

/// Per-factor categorical distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub probs: Vec<Vec<f64>>,
    pub log_probs: Vec<Vec<f64>>,
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
    z.iter().map(|&v| v - lse).collect()
}

fn entropy_of(p: &[f64], lp: &[f64]) -> f64 {
    -p.iter().zip(lp).map(|(&p, &l)| p * l).sum::<f64>()
}

impl ActionDistribution {
    /// Build from already clamped logits laid out factor after factor.
    pub fn from_logits(layout: &ActionLayout, logits: &[f64]) -> Self {
        let mut probs = Vec::with_capacity(layout.factors.len());
        let mut log_probs = Vec::with_capacity(layout.factors.len());
        let mut off = 0;
        for &n in &layout.factors {
            let lp = log_softmax(&logits[off..off + n]);
            probs.push(lp.iter().map(|l| l.exp()).collect());
            log_probs.push(lp);
            off += n;
        }
        Self { probs, log_probs }
    }

    pub fn log_prob(&self, layout: &ActionLayout, d: Decision) -> f64 {
        let mut lp = self.log_probs[0][d.root];
        if let (Some(f), Some(s)) = (layout.sub_factor[d.root], d.sub) {
            lp += self.log_probs[f][s];
        }
        lp
    }

    fn factor_entropies(&self) -> Vec<f64> {
        self.probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, l)| entropy_of(p, l))
            .collect()
    }

    /// Entropy of the joint action: root entropy plus the expected entropy
    /// of the consulted sub-factor.
    pub fn entropy(&self, layout: &ActionLayout) -> f64 {
        let h = self.factor_entropies();
        let expected_sub: f64 = layout
            .sub_factor
            .iter()
            .enumerate()
            .filter_map(|(k, f)| f.map(|f| self.probs[0][k] * h[f]))
            .sum();
        h[0] + expected_sub
    }

    pub fn sample<R: Rng + ?Sized>(&self, layout: &ActionLayout, rng: &mut R) -> Decision {
        let root = sample_index(&self.probs[0], rng);
        let sub = layout.sub_factor[root].map(|f| sample_index(&self.probs[f], rng));
        Decision { root, sub }
    }

    /// Add `scale * d log p(d) / d logits` into `out`.
    pub fn add_log_prob_grad(
        &self,
        layout: &ActionLayout,
        d: Decision,
        scale: f64,
        out: &mut [f64],
    ) {
        let offsets = layout.offsets();
        let mut add = |f: usize, chosen: usize| {
            for (k, &p) in self.probs[f].iter().enumerate() {
                let ind = if k == chosen { 1.0 } else { 0.0 };
                out[offsets[f] + k] += scale * (ind - p);
            }
        };
        add(0, d.root);
        if let (Some(f), Some(s)) = (layout.sub_factor[d.root], d.sub) {
            add(f, s);
        }
    }

    /// Add `scale * d H / d logits` into `out`, with H the joint entropy.
    pub fn add_entropy_grad(&self, layout: &ActionLayout, scale: f64, out: &mut [f64]) {
        let offsets = layout.offsets();
        let h = self.factor_entropies();
        let sub_h: Vec<f64> = layout
            .sub_factor
            .iter()
            .map(|f| f.map_or(0.0, |f| h[f]))
            .collect();
        let p0 = &self.probs[0];
        let mean_sub: f64 = p0.iter().zip(&sub_h).map(|(p, s)| p * s).sum();
        for k in 0..p0.len() {
            let d_root = -p0[k] * (self.log_probs[0][k] + h[0]);
            let d_mix = p0[k] * (sub_h[k] - mean_sub);
            out[offsets[0] + k] += scale * (d_root + d_mix);
        }
        for f in 1..layout.factors.len() {
            let weight: f64 = layout
                .sub_factor
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == Some(f))
                .map(|(k, _)| p0[k])
                .sum();
            if weight == 0.0 {
                continue;
            }
            for (k, (&p, &l)) in self.probs[f].iter().zip(&self.log_probs[f]).enumerate() {
                out[offsets[f] + k] += scale * weight * (-p * (l + h[f]));
            }
        }
    }
}

fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the cumulative sum; take the last positive entry.
    p.iter().rposition(|&pi| pi > 0.0).unwrap_or(p.len() - 1)
}

/// Draw a grid action and its log-probability.
pub fn sample_action<R: Rng + ?Sized>(
    dist: &ActionDistribution,
    rng: &mut R,
) -> (AgentAction, f64) {
    let layout = ActionLayout::grid();
    let d = dist.sample(&layout, rng);
    let action = d
        .to_action()
        .expect("grid layout always yields a valid action");
    (action, dist.log_prob(&layout, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    fn random_dist(
        layout: &ActionLayout,
        seed: u64,
        spread: f64,
    ) -> (Vec<f64>, ActionDistribution) {
        let mut rng = rng_from(seed);
        let logits: Vec<f64> = (0..layout.total_logits())
            .map(|_| rng.gen_range(-spread..spread))
            .collect();
        let d = ActionDistribution::from_logits(layout, &logits);
        (logits, d)
    }

    #[test]
    fn factors_are_normalised() {
        let layout = ActionLayout::grid();
        assert!(layout.is_valid());
        for seed in 0..20 {
            let (_, d) = random_dist(&layout, seed, 20.0);
            for p in &d.probs {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(p.iter().all(|&x| x > 0.0));
            }
        }
    }

    #[test]
    fn one_hot_distribution_samples_deterministically() {
        let layout = ActionLayout::grid();
        let mut logits = vec![-LOGIT_CLAMP; layout.total_logits()];
        logits[0] = LOGIT_CLAMP; // Move
        logits[5 + 2] = LOGIT_CLAMP; // East
        let d = ActionDistribution::from_logits(&layout, &logits);
        let mut rng = rng_from(1);
        for _ in 0..100 {
            let (a, lp) = sample_action(&d, &mut rng);
            assert_eq!(a, AgentAction::Move(crate::agents::Direction::East));
            assert!(lp.abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_direction_frequencies() {
        let layout = ActionLayout::grid();
        let mut logits = vec![0.0; layout.total_logits()];
        logits[0] = LOGIT_CLAMP;
        let d = ActionDistribution::from_logits(&layout, &logits);
        let n = 10_000;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        // Four 3-sigma checks fail together about 1% of the time for an exact
        // sampler; require at least 18 of 20 independent seeds to pass.
        let passing = (0..20)
            .filter(|&seed| {
                let mut rng = rng_from(seed);
                let mut counts = [0usize; 4];
                for _ in 0..n {
                    counts[d.sample(&layout, &mut rng).sub.unwrap()] += 1;
                }
                counts
                    .iter()
                    .all(|&c| (c as f64 / n as f64 - 0.25).abs() < 3.0 * sigma)
            })
            .count();
        assert!(passing >= 18, "{passing} of 20 seeds within 3 sigma");
    }

    #[test]
    fn log_prob_is_product_of_used_factors() {
        let layout = ActionLayout::grid();
        let (_, d) = random_dist(&layout, 3, 2.0);
        let dec = Decision {
            root: 2,
            sub: Some(1),
        };
        let expect = (d.probs[0][2] * d.probs[2][1]).ln();
        assert!((d.log_prob(&layout, dec) - expect).abs() < 1e-12);
        let harvest = Decision { root: 3, sub: None };
        assert!((d.log_prob(&layout, harvest) - d.probs[0][3].ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_enumeration() {
        let layout = ActionLayout::grid();
        let (_, d) = random_dist(&layout, 4, 3.0);
        let mut h = 0.0;
        for root in 0..5 {
            match layout.sub_factor[root] {
                None => {
                    let p = d.probs[0][root];
                    h -= p * p.ln();
                }
                Some(f) => {
                    for s in 0..layout.factors[f] {
                        let p = d.probs[0][root] * d.probs[f][s];
                        h -= p * p.ln();
                    }
                }
            }
        }
        assert!((d.entropy(&layout) - h).abs() < 1e-12);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let layout = ActionLayout::grid();
        let (logits, d) = random_dist(&layout, 5, 2.0);
        let dec = Decision {
            root: 4,
            sub: Some(7),
        };
        let mut g_lp = vec![0.0; logits.len()];
        let mut g_h = vec![0.0; logits.len()];
        d.add_log_prob_grad(&layout, dec, 1.0, &mut g_lp);
        d.add_entropy_grad(&layout, 1.0, &mut g_h);
        let eps = 1e-6;
        for i in 0..logits.len() {
            let mut up = logits.clone();
            let mut dn = logits.clone();
            up[i] += eps;
            dn[i] -= eps;
            let (du, dd) = (
                ActionDistribution::from_logits(&layout, &up),
                ActionDistribution::from_logits(&layout, &dn),
            );
            let fd_lp = (du.log_prob(&layout, dec) - dd.log_prob(&layout, dec)) / (2.0 * eps);
            let fd_h = (du.entropy(&layout) - dd.entropy(&layout)) / (2.0 * eps);
            assert!(
                (fd_lp - g_lp[i]).abs() < 1e-7,
                "logp {i}: {fd_lp} vs {}",
                g_lp[i]
            );
            assert!(
                (fd_h - g_h[i]).abs() < 1e-7,
                "entropy {i}: {fd_h} vs {}",
                g_h[i]
            );
        }
    }
}
