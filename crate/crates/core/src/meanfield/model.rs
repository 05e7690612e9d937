use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the simplex constraints before a state is rejected.
pub const SIMPLEX_TOL: f64 = 1e-6;

/// Smallest value kept in a denominator.
const DENOM_FLOOR: f64 = 1e-9;

/// Search cost paid by foragers as a decreasing function of wild-plant cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchCost {
    /// `(1 - P3) / P3`: expected failed encounters per successful one.
    #[default]
    FailedEncounters,
    /// `1 - P3`.
    Linear,
    /// `1 / (1 + P3)`.
    Reciprocal,
}

impl SearchCost {
    pub fn eval(self, p3: f64) -> f64 {
        match self {
            SearchCost::FailedEncounters => (1.0 - p3) / p3.max(DENOM_FLOOR),
            SearchCost::Linear => 1.0 - p3,
            SearchCost::Reciprocal => 1.0 / (1.0 + p3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MFParams {
    /// Wild-plant turnover.
    pub mu: f64,
    /// Encounter rate of foragers.
    pub eta_f: f64,
    /// Encounter rate of agriculturalists.
    pub eta_a: f64,
    /// Harvest intensity.
    pub kappa: f64,
    /// Baseline competitive difference `f1_0 - f2_0`.
    pub delta_f0: f64,
    /// Niche-construction intensity.
    pub v: f64,
    /// Facilitation strength.
    pub chi: f64,
    /// Weeding effort.
    pub u: f64,
    /// Weeding efficiency.
    pub omega: f64,
    pub c_u: f64,
    pub c_v: f64,
    pub c_s: f64,
    /// Wild-plant benefit, common to both strategies.
    pub b3: f64,
    pub f1_0: f64,
    pub f2_0: f64,
    pub search_cost: SearchCost,
}

impl Default for MFParams {
    /// The calibrated hysteresis set at the top of the forcing ramp.
    fn default() -> Self {
        Self {
            mu: 1.2,
            eta_f: 1.0,
            eta_a: 1.4,
            kappa: 1.0,
            delta_f0: -0.6,
            v: 0.35,
            chi: 1.0,
            u: 0.6,
            omega: 1.0,
            c_u: 0.9,
            c_v: 2.0,
            c_s: 1.0,
            b3: 1.0,
            f1_0: 0.4,
            f2_0: 1.0,
            search_cost: SearchCost::FailedEncounters,
        }
    }
}

impl MFParams {
    /// Set `delta_f0` and split it as `f2_0 = 1`, `f1_0 = 1 + delta_f0`.
    pub fn with_delta_f0(mut self, delta_f0: f64) -> Self {
        self.delta_f0 = delta_f0;
        self.f2_0 = 1.0;
        self.f1_0 = 1.0 + delta_f0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("mu", self.mu),
            ("eta_f", self.eta_f),
            ("eta_a", self.eta_a),
            ("kappa", self.kappa),
            ("v", self.v),
            ("chi", self.chi),
            ("u", self.u),
            ("omega", self.omega),
            ("c_u", self.c_u),
            ("c_v", self.c_v),
            ("c_s", self.c_s),
        ];
        for (name, x) in rates {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a finite non-negative rate"
                )));
            }
        }
        if ((self.f1_0 - self.f2_0) - self.delta_f0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(
                "f1_0 - f2_0 must equal delta_f0".into(),
            ));
        }
        Ok(())
    }

    /// Combined encounter rate at agriculturalist fraction `a`.
    pub fn encounter(&self, a: f64) -> f64 {
        self.eta_f + (self.eta_a - self.eta_f) * a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MFState {
    pub a: f64,
    pub p1: f64,
    pub p3: f64,
}

impl MFState {
    pub fn new(a: f64, p1: f64, p3: f64) -> Self {
        Self { a, p1, p3 }
    }

    pub fn p2(&self) -> f64 {
        1.0 - self.p1 - self.p3
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.p1, self.p3]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self {
            a: x[0],
            p1: x[1],
            p3: x[2],
        }
    }

    /// Largest violation of the simplex constraints.
    pub fn simplex_violation(&self) -> f64 {
        let below = |x: f64| (-x).max(0.0);
        let above = |x: f64| (x - 1.0).max(0.0);
        [
            below(self.a),
            above(self.a),
            below(self.p1),
            above(self.p1),
            below(self.p3),
            above(self.p3),
            below(self.p2()),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn check(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("mean-field state"));
        }
        let v = self.simplex_violation();
        if v > SIMPLEX_TOL {
            return Err(Error::OffSimplex(format!(
                "{self:?} violates the constraints by {v:e}"
            )));
        }
        Ok(())
    }

    /// Nearest point of the admissible set: clamp each coordinate, then
    /// rescale the plant covers if they exceed one together.
    pub fn project(&self) -> Self {
        let a = self.a.clamp(0.0, 1.0);
        let mut p1 = self.p1.clamp(0.0, 1.0);
        let mut p3 = self.p3.clamp(0.0, 1.0);
        let s = p1 + p3;
        if s > 1.0 {
            p1 /= s;
            p3 /= s;
        }
        Self { a, p1, p3 }
    }
}

/// Strategy payoffs `(pi_A, pi_F)`.
pub fn payoffs(s: &MFState, p: &MFParams) -> (f64, f64) {
    let pi_a = p.f1_0 * s.p1 + p.b3 * s.p3 - p.c_u * p.u * s.p2() - p.c_v * p.v;
    let pi_f = p.f2_0 * s.p1 + p.b3 * s.p3 - p.c_s * p.search_cost.eval(s.p3);
    (pi_a, pi_f)
}

/// `pi_A - pi_F`, formed without the wild-plant benefit that both share.
pub fn payoff_difference(s: &MFState, p: &MFParams) -> f64 {
    p.delta_f0 * s.p1 - p.c_u * p.u * s.p2() - p.c_v * p.v + p.c_s * p.search_cost.eval(s.p3)
}

/// Right-hand side without admissibility checks, for integrator stages.
pub(crate) fn rhs(x: [f64; 3], p: &MFParams) -> [f64; 3] {
    let s = MFState::from_array(x);
    let (a, p1, p3, p2) = (s.a, s.p1, s.p3, s.p2());
    let harvest = p.kappa * p.encounter(a) * p3;
    let d_p3 = p.mu * (1.0 - p3) - harvest;
    let delta_f = p.delta_f0 + p.v * p.chi * a;
    let d_p1 = p1 * p2 * delta_f + p.u * p.omega * a * p2 - p.mu * p1
        + harvest * p1 / (1.0 - p3).max(DENOM_FLOOR);
    let d_a = a * (1.0 - a) * payoff_difference(&s, p);
    [d_a, d_p1, d_p3]
}

/// Time derivatives `(dA, dP1, dP3)`.
pub fn mf_derivatives(state: &MFState, params: &MFParams) -> Result<[f64; 3]> {
    state.check()?;
    Ok(rhs(state.to_array(), params))
}

/// Wild-plant cover at rest for a fixed agriculturalist fraction.
pub fn wild_equilibrium(a: f64, p: &MFParams) -> f64 {
    p.mu / (p.mu + p.kappa * p.encounter(a))
}
