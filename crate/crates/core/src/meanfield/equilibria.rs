use nalgebra::{Matrix2, Matrix3, Vector2};

use super::model::{rhs, MFParams, MFState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Largest real part indistinguishable from zero.
    Marginal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub state: MFState,
    /// Jacobian eigenvalues as `(re, im)`.
    pub eigenvalues: Vec<(f64, f64)>,
    pub stability: Stability,
}

const FD_STEP: f64 = 1e-6;
const MARGIN: f64 = 1e-7;

/// Central-difference Jacobian of the full system.
pub fn jacobian(state: &MFState, params: &MFParams) -> Matrix3<f64> {
    let x = state.to_array();
    Matrix3::from_fn(|i, j| {
        let (mut up, mut dn) = (x, x);
        up[j] += FD_STEP;
        dn[j] -= FD_STEP;
        (rhs(up, params)[i] - rhs(dn, params)[i]) / (2.0 * FD_STEP)
    })
}

fn classify(state: MFState, params: &MFParams) -> Equilibrium {
    let eig = jacobian(&state, params).complex_eigenvalues();
    let eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    let max_re = eigenvalues
        .iter()
        .map(|e| e.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let stability = if max_re < -MARGIN {
        Stability::Stable
    } else if max_re > MARGIN {
        Stability::Unstable
    } else {
        Stability::Marginal
    };
    Equilibrium {
        state,
        eigenvalues,
        stability,
    }
}

/// Newton iteration on the plant subsystem at fixed `a`.
fn newton(a: f64, p1: f64, p3: f64, params: &MFParams) -> Option<MFState> {
    let f = |p1: f64, p3: f64| {
        let d = rhs([a, p1, p3], params);
        Vector2::new(d[1], d[2])
    };
    let mut x = Vector2::new(p1, p3);
    for _ in 0..100 {
        let fx = f(x[0], x[1]);
        if fx.norm() < 1e-13 {
            let s = MFState::new(a, x[0], x[1]);
            return (s.simplex_violation() < 1e-9).then(|| s.project());
        }
        let jac = Matrix2::from_fn(|i, j| {
            let mut up = x;
            let mut dn = x;
            up[j] += FD_STEP;
            dn[j] -= FD_STEP;
            (f(up[0], up[1])[i] - f(dn[0], dn[1])[i]) / (2.0 * FD_STEP)
        });
        let step = jac.lu().solve(&fx)?;
        x -= step;
        let s = MFState::new(a, x[0], x[1]).project();
        x = Vector2::new(s.p1, s.p3);
    }
    None
}

/// Rest points on the pure-strategy edges A = 0 and A = 1, found by Newton
/// from a `resolution` x `resolution` grid of plant covers and classified by
/// the eigenvalues of the full Jacobian.
pub fn equilibria(params: &MFParams, resolution: usize) -> Vec<Equilibrium> {
    let n = resolution.max(1);
    let mut found: Vec<MFState> = Vec::new();
    for a in [0.0, 1.0] {
        for i in 0..=n {
            for j in 0..=(n - i) {
                let (p1, p3) = (i as f64 / n as f64, j as f64 / n as f64);
                if let Some(s) = newton(a, p1, p3, params) {
                    let dup = found.iter().any(|q| {
                        q.a == s.a && (q.p1 - s.p1).abs() < 1e-7 && (q.p3 - s.p3).abs() < 1e-7
                    });
                    if !dup {
                        found.push(s);
                    }
                }
            }
        }
    }
    found.into_iter().map(|s| classify(s, params)).collect()
}
