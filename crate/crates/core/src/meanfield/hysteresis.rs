use super::integrate::{integrate, ForcingSchedule, IntegratorConfig, MFTrajectory};
use super::model::{wild_equilibrium, MFParams, MFState};
use crate::error::Result;

/// Agriculturalist fraction used to seed a run near the foraging state.
pub const NEAR_FORAGING_A: f64 = 0.01;

/// Start close to the pure foraging equilibrium at the top of the ramp:
/// no domesticates, wild cover at rest, a trace of agriculturalists.
pub fn near_foraging_start(params: &MFParams, schedule: &ForcingSchedule) -> MFState {
    let p = MFParams {
        mu: schedule.mu_max,
        ..params.clone()
    };
    MFState::new(NEAR_FORAGING_A, 0.0, wild_equilibrium(0.0, &p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisResult {
    /// `mu` at which A first rises through the threshold on the down-ramp.
    pub mu_forward: Option<f64>,
    /// Threshold crossings (either direction) during the down-ramp.
    pub down_crossings: usize,
    /// A stayed above the threshold for the whole up-ramp after a forward
    /// transition.
    pub locked_in: bool,
    /// `mu` at which A first falls back through the threshold on the up-ramp.
    pub mu_reverse: Option<f64>,
    pub min_a_up: f64,
    pub p1_peak: f64,
    pub mu_at_p1_peak: f64,
    pub p1_end: f64,
    pub trajectory: MFTrajectory,
}

/// Interpolated time at which `f` crosses zero between two samples.
fn crossing(t0: f64, f0: f64, t1: f64, f1: f64) -> f64 {
    if f1 == f0 {
        t1
    } else {
        t0 + (t1 - t0) * f0 / (f0 - f1)
    }
}

/// Run the forcing ramp from `initial` and locate the transitions of A
/// through `threshold`.
pub fn hysteresis_sweep(
    initial: MFState,
    params: &MFParams,
    schedule: &ForcingSchedule,
    threshold: f64,
    cfg: &IntegratorConfig,
) -> Result<HysteresisResult> {
    let trajectory = integrate(initial, params, Some(schedule), schedule.duration(), cfg)?;
    let pts = &trajectory.points;
    let mut mu_forward = None;
    let mut mu_reverse = None;
    let mut down_crossings = 0;
    for w in pts.windows(2) {
        let (f0, f1) = (w[0].state.a - threshold, w[1].state.a - threshold);
        if (f0 > 0.0) == (f1 > 0.0) {
            continue;
        }
        let tc = crossing(w[0].t, f0, w[1].t, f1);
        if tc <= schedule.t_down {
            down_crossings += 1;
            if f1 > 0.0 && mu_forward.is_none() {
                mu_forward = Some(schedule.mu_at(tc));
            }
        } else if f1 <= 0.0 && mu_reverse.is_none() && mu_forward.is_some() {
            mu_reverse = Some(schedule.mu_at(tc));
        }
    }
    let up: Vec<_> = pts.iter().filter(|p| p.t >= schedule.t_down).collect();
    let min_a_up = up.iter().map(|p| p.state.a).fold(f64::INFINITY, f64::min);
    let locked_in = mu_forward.is_some() && min_a_up > threshold;
    let peak = pts
        .iter()
        .max_by(|a, b| a.state.p1.total_cmp(&b.state.p1))
        .expect("trajectory has samples");
    Ok(HysteresisResult {
        mu_forward,
        down_crossings,
        locked_in,
        mu_reverse,
        min_a_up,
        p1_peak: peak.state.p1,
        mu_at_p1_peak: peak.mu,
        p1_end: pts.last().expect("trajectory has samples").state.p1,
        trajectory,
    })
}
