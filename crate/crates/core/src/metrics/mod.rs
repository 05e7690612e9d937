//! Episode measures, traces, the evaluation harness and parameter sweeps.

mod composition;
mod episode;
mod sweep;
mod trace;

pub use composition::{composition_counts, neighbourhood_composition, Neighbourhood};
pub use episode::{simulate_episode, simulate_with_ids, Controller};
pub use sweep::{
    mean_metrics, metric_values, metrics_csv, run_sweep, set_param, sweep_csv, Axis, ScriptedKind,
    SweepMode, SweepRow, SweepSpec, METRIC_COLUMNS,
};
pub use trace::{
    collect_episode_metrics, AgentStepRecord, EpisodeMetrics, EpisodeTrace, StepRecord,
    TRACE_HEADER,
};
