use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::composition::Neighbourhood;
use super::episode::{simulate_episode, Controller};
use super::trace::{collect_episode_metrics, EpisodeMetrics};
use crate::error::{Error, Result};
use crate::ppo::{TrainConfig, Trainer};
use crate::rng::derive_seed;

/// Column names of [`metric_values`], in order.
pub const METRIC_COLUMNS: [&str; 10] = [
    "p1_abundance",
    "final_p1_abundance",
    "p3_foraging",
    "p1_harvests",
    "watering_events",
    "p2_removals",
    "movement_rate",
    "neighbourhood_composition",
    "mean_return",
    "max_return",
];

pub fn metric_values(m: &EpisodeMetrics) -> [f64; 10] {
    [
        m.p1_abundance,
        m.final_p1_abundance,
        m.p3_foraging as f64,
        m.p1_harvests as f64,
        m.watering_events as f64,
        m.p2_removals as f64,
        m.movement_rate,
        m.neighbourhood_composition,
        m.mean_return(),
        m.max_return(),
    ]
}

/// Header plus one row per episode.
pub fn metrics_csv(episodes: &[EpisodeMetrics]) -> String {
    let mut s = format!("episode,{}\n", METRIC_COLUMNS.join(","));
    for (i, m) in episodes.iter().enumerate() {
        let vals: Vec<String> = metric_values(m).iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{i},{}", vals.join(","));
    }
    s
}

/// Column-wise mean over episodes.
pub fn mean_metrics(episodes: &[EpisodeMetrics]) -> [f64; 10] {
    let mut acc = [0.0; 10];
    for m in episodes {
        for (a, v) in acc.iter_mut().zip(metric_values(m)) {
            *a += v;
        }
    }
    let n = episodes.len().max(1) as f64;
    acc.map(|a| a / n)
}

/// One swept parameter. `param` is a dotted path into [`TrainConfig`], such
/// as `env.eta3`, `ppo.gamma` or `n_agents`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptedKind {
    Farmer,
    Forager,
}

impl ScriptedKind {
    pub fn name(self) -> &'static str {
        match self {
            ScriptedKind::Farmer => "farmer",
            ScriptedKind::Forager => "forager",
        }
    }

    fn controller(self) -> Controller {
        match self {
            ScriptedKind::Farmer => Controller::Farmer,
            ScriptedKind::Forager => Controller::Forager,
        }
    }
}

/// What runs in each cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepMode {
    /// Evaluate `n_agents` copies of each listed scripted policy; the list
    /// acts as one more axis.
    Scripted { controllers: Vec<ScriptedKind> },
    /// Train with PPO for the cell budget, then evaluate the learners.
    Train { eval_episodes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub replicates: usize,
    /// Episodes per replicate: evaluated episodes in scripted mode, training
    /// episodes in train mode.
    pub episodes: usize,
    pub mode: SweepMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub neighbourhood: Neighbourhood,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Configuration the axes modify.
    #[serde(default)]
    pub base: TrainConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::InvalidConfig("sweep axes must be non-empty".into()));
        }
        if self.replicates == 0 || self.episodes == 0 {
            return Err(Error::InvalidConfig(
                "replicates and episode budget must be positive".into(),
            ));
        }
        match &self.mode {
            SweepMode::Scripted { controllers } if controllers.is_empty() => {
                return Err(Error::InvalidConfig(
                    "scripted sweep needs at least one controller".into(),
                ))
            }
            SweepMode::Train { eval_episodes: 0 } => {
                return Err(Error::InvalidConfig(
                    "eval_episodes must be positive".into(),
                ))
            }
            _ => {}
        }
        // Every path must exist; values are checked per cell.
        for a in &self.axes {
            set_param(&self.base, &a.param, a.values[0])?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Axis values of every cell, first axis slowest.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let mut cells = vec![Vec::new()];
        for a in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    a.values.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    fn variants(&self) -> Vec<Option<ScriptedKind>> {
        match &self.mode {
            SweepMode::Scripted { controllers } => controllers.iter().copied().map(Some).collect(),
            SweepMode::Train { .. } => vec![None],
        }
    }
}

fn assign(node: &mut toml::Value, path: &[&str], full: &str, value: f64) -> Result<()> {
    let unknown = || Error::InvalidConfig(format!("unknown parameter {full}"));
    let entry = node
        .as_table_mut()
        .and_then(|t| t.get_mut(path[0]))
        .ok_or_else(unknown)?;
    if path.len() > 1 {
        return assign(entry, &path[1..], full, value);
    }
    *entry = match entry {
        toml::Value::Integer(_) if value.fract() == 0.0 && value >= 0.0 => {
            toml::Value::Integer(value as i64)
        }
        toml::Value::Integer(_) => {
            return Err(Error::InvalidConfig(format!(
                "{full} needs a non-negative integer, got {value}"
            )))
        }
        toml::Value::Float(_) => toml::Value::Float(value),
        _ => return Err(Error::InvalidConfig(format!("{full} is not numeric"))),
    };
    Ok(())
}

/// Copy of `base` with the value at dotted path `param` replaced.
pub fn set_param(base: &TrainConfig, param: &str, value: f64) -> Result<TrainConfig> {
    let mut root = toml::Value::try_from(base)?;
    let path: Vec<&str> = param.split('.').collect();
    assign(&mut root, &path, param, value)?;
    let cfg: TrainConfig = root.try_into()?;
    cfg.validate()?;
    Ok(cfg)
}

/// One result row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: usize,
    pub values: Vec<f64>,
    pub variant: String,
    pub replicate: usize,
    pub seed: u64,
    pub metrics: std::result::Result<[f64; 10], String>,
}

fn run_replicate(
    spec: &SweepSpec,
    values: &[f64],
    variant: Option<ScriptedKind>,
    seed: u64,
) -> Result<[f64; 10]> {
    let mut cfg = spec.base.clone();
    for (a, &v) in spec.axes.iter().zip(values) {
        cfg = set_param(&cfg, &a.param, v)?;
    }
    let episodes = match (variant, &spec.mode) {
        (Some(kind), _) => (0..spec.episodes as u64)
            .map(|k| {
                let mut controllers = vec![kind.controller(); cfg.n_agents];
                let trace = simulate_episode(
                    &cfg.env,
                    &mut controllers,
                    derive_seed(seed, &[k]),
                    spec.neighbourhood,
                )?;
                collect_episode_metrics(&trace)
            })
            .collect::<Result<Vec<_>>>()?,
        (None, SweepMode::Train { eval_episodes }) => {
            let mut trainer = Trainer::new(TrainConfig {
                seed,
                total_episodes: spec.episodes,
                ..cfg
            })?;
            while !trainer.finished() {
                trainer.step()?;
            }
            trainer.evaluate(
                *eval_episodes,
                derive_seed(seed, &[u64::MAX]),
                spec.neighbourhood,
            )?
        }
        (None, SweepMode::Scripted { .. }) => {
            unreachable!("scripted cells always carry a controller")
        }
    };
    Ok(mean_metrics(&episodes))
}

/// Run every (cell, variant, replicate) and return the rows in grid order.
/// Failures are captured per row; the sweep itself only fails on an
/// invalid spec.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (cell, values) in spec.cells().into_iter().enumerate() {
        for variant in spec.variants() {
            for replicate in 0..spec.replicates {
                jobs.push((cell, values.clone(), variant, replicate));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(cell, values, variant, replicate)| {
            let seed = derive_seed(spec.seed, &[cell as u64, replicate as u64]);
            let metrics = run_replicate(spec, &values, variant, seed).map_err(|e| e.to_string());
            SweepRow {
                cell,
                values,
                variant: variant.map_or("ppo", ScriptedKind::name).to_string(),
                replicate,
                seed,
                metrics,
            }
        })
        .collect())
}

pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let axes: Vec<&str> = spec.axes.iter().map(|a| a.param.as_str()).collect();
    let mut s = format!(
        "cell,{},policy,replicate,seed,{},error\n",
        axes.join(","),
        METRIC_COLUMNS.join(",")
    );
    for r in rows {
        let vals: Vec<String> = r.values.iter().map(f64::to_string).collect();
        let (metrics, error) = match &r.metrics {
            Ok(m) => (
                m.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
                String::new(),
            ),
            Err(e) => (
                vec![""; METRIC_COLUMNS.len()].join(","),
                e.replace([',', '\n'], ";"),
            ),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{metrics},{error}",
            r.cell,
            vals.join(","),
            r.variant,
            r.replicate,
            r.seed
        );
    }
    s
}
