use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::model::{payoff_difference, payoffs, rhs, MFParams, MFState};
use crate::error::{Error, Result};

/// Triangular forcing of the wild-plant turnover: linear from `mu_max` down
/// to `mu_min` over `t_down`, then linear up to `mu_end` over `t_up`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSchedule {
    pub mu_max: f64,
    pub mu_min: f64,
    pub t_down: f64,
    pub t_up: f64,
    /// End of the up-ramp; `mu_max` when absent. A larger value extends the
    /// ramp at the same rate scaled to `t_up`.
    pub mu_end: Option<f64>,
}

impl Default for ForcingSchedule {
    fn default() -> Self {
        Self {
            mu_max: 1.2,
            mu_min: 0.8,
            t_down: 4000.0,
            t_up: 4000.0,
            mu_end: None,
        }
    }
}

impl ForcingSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu_min < self.mu_max && self.mu_min >= 0.0) {
            return Err(Error::InvalidConfig("need 0 <= mu_min < mu_max".into()));
        }
        if !(self.t_down > 0.0 && self.t_up > 0.0) {
            return Err(Error::InvalidConfig(
                "ramp durations must be positive".into(),
            ));
        }
        if self.mu_end.is_some_and(|e| e <= self.mu_min) {
            return Err(Error::InvalidConfig("mu_end must exceed mu_min".into()));
        }
        Ok(())
    }

    pub fn mu_end(&self) -> f64 {
        self.mu_end.unwrap_or(self.mu_max)
    }

    pub fn duration(&self) -> f64 {
        self.t_down + self.t_up
    }

    pub fn mu_at(&self, t: f64) -> f64 {
        if t <= self.t_down {
            self.mu_max - (self.mu_max - self.mu_min) * (t / self.t_down).max(0.0)
        } else {
            let f = ((t - self.t_down) / self.t_up).min(1.0);
            self.mu_min + (self.mu_end() - self.mu_min) * f
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of recorded samples.
    pub output_dt: f64,
    pub h_init: f64,
    /// Steps below this abort the integration.
    pub h_min: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-8,
            output_dt: 1.0,
            h_init: 1e-2,
            h_min: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0
            && self.atol > 0.0
            && self.output_dt > 0.0
            && self.h_init > 0.0
            && self.h_min > 0.0)
        {
            return Err(Error::InvalidConfig(
                "integrator settings must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub mu: f64,
    pub state: MFState,
    pub pi_a: f64,
    pub pi_f: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MFTrajectory {
    pub points: Vec<TrajectoryPoint>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

pub const TRAJECTORY_HEADER: &str = "t,mu,A,P1,P2,P3,pi_A,pi_F";

impl MFTrajectory {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{TRAJECTORY_HEADER}\n");
        for p in &self.points {
            let x = p.state;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                p.t,
                p.mu,
                x.a,
                x.p1,
                x.p2(),
                x.p3,
                p.pi_a,
                p.pi_f
            );
        }
        s
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Drift beyond which accepted states are projected back.
const PROJECT_TOL: f64 = 1e-9;

/// Integration coordinates: the plant covers as they are and the
/// agriculturalist fraction through its log-odds `z`, whose rate is the
/// payoff difference. This keeps A strictly inside (0, 1) and lets it leave
/// the neighbourhood of 0 or 1 however close it got, which the raw
/// coordinate cannot do once `1 - A` drops below the floating-point spacing.
/// A state starting exactly on A = 0 or A = 1 keeps that value.
struct System<'a> {
    params: MFParams,
    schedule: Option<&'a ForcingSchedule>,
    edge: Option<f64>,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl System<'_> {
    fn mu(&self, t: f64) -> f64 {
        self.schedule.map_or(self.params.mu, |s| s.mu_at(t))
    }

    fn encode(&self, s: MFState) -> [f64; 3] {
        let z = match self.edge {
            Some(_) => 0.0,
            None => (s.a / (1.0 - s.a)).ln(),
        };
        [z, s.p1, s.p3]
    }

    fn decode(&self, y: [f64; 3]) -> MFState {
        MFState::new(self.edge.unwrap_or_else(|| logistic(y[0])), y[1], y[2])
    }

    fn eval(&mut self, t: f64, y: [f64; 3]) -> [f64; 3] {
        self.params.mu = self.mu(t);
        let s = self.decode(y);
        let d = rhs(s.to_array(), &self.params);
        let dz = if self.edge.is_some() {
            0.0
        } else {
            payoff_difference(&s, &self.params)
        };
        [dz, d[1], d[2]]
    }

    fn point(&mut self, t: f64, y: [f64; 3]) -> TrajectoryPoint {
        self.params.mu = self.mu(t);
        let state = self.decode(y);
        let (pi_a, pi_f) = payoffs(&state, &self.params);
        TrajectoryPoint {
            t,
            mu: self.params.mu,
            state,
            pi_a,
            pi_f,
        }
    }

    /// One trial step: fifth-order solution and scaled error norm.
    fn trial(&mut self, t: f64, y: [f64; 3], h: f64, cfg: &IntegratorConfig) -> ([f64; 3], f64) {
        let mut k = [[0.0; 3]; 7];
        for s in 0..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for d in 0..3 {
                    yi[d] += h * A[s][j] * kj[d];
                }
            }
            k[s] = self.eval(t + C[s] * h, yi);
        }
        let mut y5 = y;
        let mut err = 0.0;
        for d in 0..3 {
            let (mut hi, mut lo) = (0.0, 0.0);
            for s in 0..7 {
                hi += B5[s] * k[s][d];
                lo += B4[s] * k[s][d];
            }
            y5[d] += h * hi;
            let scale = cfg.atol + cfg.rtol * y[d].abs().max(y5[d].abs());
            err += (h * (hi - lo) / scale).powi(2);
        }
        (y5, (err / 3.0).sqrt())
    }
}

/// Integrate from `initial` to `t_end`, sampling every `output_dt` (and at
/// `t_end`). With a schedule, `mu` follows it and `params.mu` is ignored.
pub fn integrate(
    initial: MFState,
    params: &MFParams,
    schedule: Option<&ForcingSchedule>,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<MFTrajectory> {
    params.validate()?;
    cfg.validate()?;
    if let Some(s) = schedule {
        s.validate()?;
    }
    initial.check()?;
    if !(t_end >= 0.0) {
        return Err(Error::InvalidConfig("t_end must be non-negative".into()));
    }

    let start = initial.project();
    let edge = (start.a == 0.0 || start.a == 1.0).then_some(start.a);
    let mut sys = System {
        params: params.clone(),
        schedule,
        edge,
    };
    let mut out = MFTrajectory::default();
    let mut t = 0.0;
    let mut y = sys.encode(start);
    out.points.push(sys.point(t, y));

    let kink = schedule.map(|s| s.t_down).filter(|&k| k > 0.0 && k < t_end);
    let mut sample = 1usize;
    let mut h_free = cfg.h_init;
    while t < t_end {
        let next_out = (sample as f64 * cfg.output_dt).min(t_end);
        let stop = match kink {
            Some(k) if k > t && k < next_out => k,
            _ => next_out,
        };
        let h = h_free.min(stop - t);
        let clipped = h < h_free;
        let (y5, err) = sys.trial(t, y, h, cfg);
        if !y5.iter().all(|v| v.is_finite()) || !err.is_finite() || err > 1.0 {
            out.rejected_steps += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h_free = h * factor;
            if h_free < cfg.h_min {
                return Err(Error::StepSizeUnderflow {
                    t,
                    h: h_free,
                    state: sys.decode(y).to_array(),
                });
            }
            continue;
        }
        out.accepted_steps += 1;
        t = if clipped { stop } else { t + h };
        y = y5;
        let state = sys.decode(y);
        if state.simplex_violation() > PROJECT_TOL {
            let p = state.project();
            y[1] = p.p1;
            y[2] = p.p3;
        }
        let grown = h * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if !clipped || grown < h_free {
            h_free = grown;
        }
        if t >= next_out {
            out.points.push(sys.point(t, y));
            sample += 1;
        }
    }
    Ok(out)
}
