//! Default trainable backend: a tanh MLP over the current observation and a
//! mean-pooled embedding of the recent (observation, action, reward) tuples,
//! with one categorical head per action factor and a scalar value head.
//!
//! Weight matrices are stored input-major (`w[i * n_out + o]`) so that sparse
//! inputs can skip zero rows in both passes.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::distribution::{ActionDistribution, ActionLayout, LOGIT_CLAMP};
use super::features::{OBS_DIM, TUPLE_DIM};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SimRng};

/// Network family. Only the history MLP is implemented; the descriptor is
/// carried in checkpoints so other backends can be told apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    HistoryMlp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub backend: Backend,
    pub obs_dim: usize,
    pub tuple_dim: usize,
    /// Number of past tuples the policy sees.
    pub mem_len: usize,
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    pub layout: ActionLayout,
}

impl Architecture {
    /// Grid-world policy with an 8-step memory.
    pub fn grid(hidden: Vec<usize>) -> Self {
        Self {
            backend: Backend::HistoryMlp,
            obs_dim: OBS_DIM,
            tuple_dim: TUPLE_DIM,
            mem_len: 8,
            embed_dim: 16,
            hidden,
            layout: ActionLayout::grid(),
        }
    }

    /// Memoryless policy over a constant input, for bandit problems.
    pub fn bandit(arms: usize) -> Self {
        Self {
            backend: Backend::HistoryMlp,
            obs_dim: 1,
            tuple_dim: 0,
            mem_len: 0,
            embed_dim: 0,
            hidden: vec![8],
            layout: ActionLayout::categorical(arms),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidConfig(
                "hidden layers must be non-empty and positive".into(),
            ));
        }
        if !self.layout.is_valid() {
            return Err(Error::InvalidConfig("invalid action layout".into()));
        }
        if self.uses_memory() && self.tuple_dim == 0 {
            return Err(Error::InvalidConfig(
                "memory requires a tuple encoding".into(),
            ));
        }
        Ok(())
    }

    pub fn uses_memory(&self) -> bool {
        self.mem_len > 0 && self.embed_dim > 0
    }

    fn trunk_input(&self) -> usize {
        self.obs_dim
            + if self.uses_memory() {
                self.embed_dim
            } else {
                0
            }
    }

    pub fn param_count(&self) -> usize {
        ParamMap::new(self).total
    }
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    n_in: usize,
    n_out: usize,
}

impl Dense {
    fn len(&self) -> usize {
        self.n_in * self.n_out + self.n_out
    }
}

#[derive(Debug, Clone)]
struct ParamMap {
    embed: Option<Dense>,
    trunk: Vec<Dense>,
    heads: Dense,
    value: Dense,
    total: usize,
}

impl ParamMap {
    fn new(arch: &Architecture) -> Self {
        let mut total = 0;
        let mut dense = |n_in: usize, n_out: usize| {
            let d = Dense {
                w: total,
                b: total + n_in * n_out,
                n_in,
                n_out,
            };
            total += d.len();
            d
        };
        let embed = arch
            .uses_memory()
            .then(|| dense(arch.tuple_dim, arch.embed_dim));
        let mut n_in = arch.trunk_input();
        let mut trunk = Vec::new();
        for &h in &arch.hidden {
            trunk.push(dense(n_in, h));
            n_in = h;
        }
        let heads = dense(n_in, arch.layout.total_logits());
        let value = dense(n_in, 1);
        Self {
            embed,
            trunk,
            heads,
            value,
            total,
        }
    }
}

/// Encoded policy input: the current observation and the past tuples,
/// oldest first. `None` slots are zero padding.
#[derive(Debug, Clone)]
pub struct PolicyInput<'a> {
    pub obs: &'a [f32],
    pub past: Vec<Option<&'a [f32]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub dist: ActionDistribution,
    pub value: f64,
    /// Clamped logits.
    pub logits: Vec<f64>,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    embeds: Vec<Vec<f64>>,
    pooled: Vec<f64>,
    hidden: Vec<Vec<f64>>,
    raw_logits: Vec<f64>,
}

/// Stochastic policy: parameters, architecture and sampling generator.
#[derive(Debug, Clone)]
pub struct PolicyHandle {
    arch: Architecture,
    params: Vec<f64>,
    pub rng: SimRng,
}

fn orthogonal_block(rng: &mut SimRng, n_in: usize, n_out: usize, gain: f64, out: &mut [f64]) {
    let (rows, cols) = if n_in >= n_out {
        (n_in, n_out)
    } else {
        (n_out, n_in)
    };
    let m = DMatrix::<f64>::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    for i in 0..n_in {
        for o in 0..n_out {
            let (row, col) = if n_in >= n_out { (i, o) } else { (o, i) };
            let sign = if r[(col, col)] < 0.0 { -1.0 } else { 1.0 };
            out[i * n_out + o] = gain * sign * q[(row, col)];
        }
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PolicyHandle {
    /// Orthogonal initialisation with zero biases; the policy head is scaled
    /// by 0.01 so the initial distribution is close to uniform.
    pub fn new(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let map = ParamMap::new(&arch);
        let mut params = vec![0.0; map.total];
        let mut init_rng = SimRng::seed_from_u64(derive_seed(seed, &[0]));
        let mut init = |d: &Dense, gain: f64| {
            orthogonal_block(&mut init_rng, d.n_in, d.n_out, gain, &mut params[d.w..d.b]);
        };
        if let Some(e) = &map.embed {
            init(e, 1.0);
        }
        for d in &map.trunk {
            init(d, std::f64::consts::SQRT_2);
        }
        init(&map.heads, 0.01);
        init(&map.value, 1.0);
        Ok(Self {
            arch,
            params,
            rng: SimRng::seed_from_u64(derive_seed(seed, &[1])),
        })
    }

    /// Rebuild from stored parameters.
    pub fn from_parts(arch: Architecture, params: Vec<f64>, sampler_seed: u64) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::Blob(format!(
                "expected {} parameters, found {}",
                arch.param_count(),
                params.len()
            )));
        }
        Ok(Self {
            arch,
            params,
            rng: SimRng::seed_from_u64(sampler_seed),
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn layout(&self) -> &ActionLayout {
        &self.arch.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, input: &PolicyInput<'_>) -> Result<PolicyOutput> {
        self.forward_cached(input).map(|(out, _)| out)
    }

    pub fn forward_cached(&self, input: &PolicyInput<'_>) -> Result<(PolicyOutput, ForwardCache)> {
        if !self.params.iter().all(|p| p.is_finite()) {
            return Err(Error::NonFinite("policy parameters"));
        }
        let arch = &self.arch;
        debug_assert_eq!(input.obs.len(), arch.obs_dim);
        let map = ParamMap::new(arch);
        let p = &self.params;

        let mut embeds = Vec::new();
        let mut pooled = Vec::new();
        if let Some(e) = &map.embed {
            pooled = vec![0.0; e.n_out];
            for slot in 0..arch.mem_len {
                let mut a = p[e.b..e.b + e.n_out].to_vec();
                if let Some(Some(x)) = input.past.get(slot) {
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            axpy(
                                f64::from(xi),
                                &p[e.w + i * e.n_out..e.w + (i + 1) * e.n_out],
                                &mut a,
                            );
                        }
                    }
                }
                a.iter_mut().for_each(|v| *v = v.tanh());
                axpy(1.0 / arch.mem_len as f64, &a, &mut pooled);
                embeds.push(a);
            }
        }

        let mut hidden: Vec<Vec<f64>> = Vec::with_capacity(map.trunk.len());
        for (layer, d) in map.trunk.iter().enumerate() {
            let mut a = p[d.b..d.b + d.n_out].to_vec();
            let row = |i: usize| &p[d.w + i * d.n_out..d.w + (i + 1) * d.n_out];
            if layer == 0 {
                for (i, &xi) in input.obs.iter().enumerate() {
                    if xi != 0.0 {
                        axpy(f64::from(xi), row(i), &mut a);
                    }
                }
                for (k, &xk) in pooled.iter().enumerate() {
                    axpy(xk, row(arch.obs_dim + k), &mut a);
                }
            } else {
                for (i, &xi) in hidden[layer - 1].iter().enumerate() {
                    axpy(xi, row(i), &mut a);
                }
            }
            a.iter_mut().for_each(|v| *v = v.tanh());
            hidden.push(a);
        }
        let last = hidden.last().expect("validated non-empty trunk");

        let h = &map.heads;
        let mut raw_logits = p[h.b..h.b + h.n_out].to_vec();
        for (i, &xi) in last.iter().enumerate() {
            axpy(
                xi,
                &p[h.w + i * h.n_out..h.w + (i + 1) * h.n_out],
                &mut raw_logits,
            );
        }
        let v = &map.value;
        let value = p[v.b] + dot(&p[v.w..v.w + v.n_in], last);

        let logits: Vec<f64> = raw_logits
            .iter()
            .map(|z| z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP))
            .collect();
        if !value.is_finite() || !logits.iter().all(|z| z.is_finite()) {
            return Err(Error::NonFinite("policy output"));
        }
        let dist = ActionDistribution::from_logits(&arch.layout, &logits);
        Ok((
            PolicyOutput {
                dist,
                value,
                logits,
            },
            ForwardCache {
                embeds,
                pooled,
                hidden,
                raw_logits,
            },
        ))
    }

    /// Accumulate parameter gradients into `grad` given the gradient of a
    /// scalar with respect to the clamped logits and the value.
    pub fn backward(
        &self,
        input: &PolicyInput<'_>,
        cache: &ForwardCache,
        d_logits: &[f64],
        d_value: f64,
        grad: &mut [f64],
    ) {
        let arch = &self.arch;
        let map = ParamMap::new(arch);
        let p = &self.params;
        let last = cache.hidden.last().expect("validated non-empty trunk");

        let d_raw: Vec<f64> = d_logits
            .iter()
            .zip(&cache.raw_logits)
            .map(|(&g, &z)| if z.abs() > LOGIT_CLAMP { 0.0 } else { g })
            .collect();

        let h = &map.heads;
        let v = &map.value;
        let mut d_h = vec![0.0; last.len()];
        for (i, &xi) in last.iter().enumerate() {
            let w_row = h.w + i * h.n_out..h.w + (i + 1) * h.n_out;
            d_h[i] = dot(&p[w_row.clone()], &d_raw) + p[v.w + i] * d_value;
            axpy(xi, &d_raw, &mut grad[w_row]);
            grad[v.w + i] += xi * d_value;
        }
        axpy(1.0, &d_raw, &mut grad[h.b..h.b + h.n_out]);
        grad[v.b] += d_value;

        let mut d_pooled = vec![0.0; cache.pooled.len()];
        for layer in (0..map.trunk.len()).rev() {
            let d = &map.trunk[layer];
            let out = &cache.hidden[layer];
            let d_a: Vec<f64> = d_h
                .iter()
                .zip(out)
                .map(|(g, y)| g * (1.0 - y * y))
                .collect();
            axpy(1.0, &d_a, &mut grad[d.b..d.b + d.n_out]);
            let w_row = |i: usize| d.w + i * d.n_out..d.w + (i + 1) * d.n_out;
            if layer == 0 {
                for (i, &xi) in input.obs.iter().enumerate() {
                    if xi != 0.0 {
                        axpy(f64::from(xi), &d_a, &mut grad[w_row(i)]);
                    }
                }
                for (k, &xk) in cache.pooled.iter().enumerate() {
                    let r = w_row(arch.obs_dim + k);
                    d_pooled[k] = dot(&p[r.clone()], &d_a);
                    axpy(xk, &d_a, &mut grad[r]);
                }
            } else {
                let x = &cache.hidden[layer - 1];
                let mut d_x = vec![0.0; x.len()];
                for (i, &xi) in x.iter().enumerate() {
                    let r = w_row(i);
                    d_x[i] = dot(&p[r.clone()], &d_a);
                    axpy(xi, &d_a, &mut grad[r]);
                }
                d_h = d_x;
            }
        }

        if let Some(e) = &map.embed {
            let scale = 1.0 / arch.mem_len as f64;
            for (slot, emb) in cache.embeds.iter().enumerate() {
                let d_a: Vec<f64> = d_pooled
                    .iter()
                    .zip(emb)
                    .map(|(g, y)| scale * g * (1.0 - y * y))
                    .collect();
                axpy(1.0, &d_a, &mut grad[e.b..e.b + e.n_out]);
                if let Some(Some(x)) = input.past.get(slot) {
                    for (i, &xi) in x.iter().enumerate() {
                        if xi != 0.0 {
                            let r = e.w + i * e.n_out..e.w + (i + 1) * e.n_out;
                            axpy(f64::from(xi), &d_a, &mut grad[r]);
                        }
                    }
                }
            }
        }
    }
}
