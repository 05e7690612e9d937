//! End-to-end acceptance suite. Every criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use agrisim::agents::{apply_action, AgentAction, AgentState};
use agrisim::env::{
    germination_probabilities, harvest_reward, CellState, EnvConfig, EnvState, Season,
};
use agrisim::meanfield::*;
use agrisim::metrics::{
    collect_episode_metrics, composition_counts, neighbourhood_composition, simulate_episode,
    Controller, EpisodeMetrics, Neighbourhood,
};
use agrisim::policy::{Architecture, Decision, PolicyHandle, PolicyInput, OBS_DIM, TUPLE_DIM};
use agrisim::ppo::{
    collect_batches, discounted_return, ppo_loss, ppo_loss_grad, train_update, Learner, LossBatch,
    PPOConfig, TrainConfig, Trainer,
};
use agrisim::rng::{derive_seed, rng_from};
use agrisim::social::{
    clone_policy, population_update, EventKind, PopulationConfig, PopulationState, SocialTrainer,
    Thresholds,
};
use common::*;
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// |k - n p| within three binomial standard deviations.
fn within_3_sigma(k: u64, n: u64, p: f64) -> bool {
    let (n, k) = (n as f64, k as f64);
    (k - n * p).abs() <= 3.0 * (n * p * (1.0 - p)).sqrt()
}

// ---------------------------------------------------------------- 1

fn hysteresis() -> Outcome {
    let params = MFParams {
        mu: 1.2,
        eta_f: 1.0,
        eta_a: 1.4,
        kappa: 1.0,
        v: 0.35,
        chi: 1.0,
        u: 0.6,
        omega: 1.0,
        c_u: 0.9,
        c_v: 2.0,
        c_s: 1.0,
        ..MFParams::default()
    }
    .with_delta_f0(-0.6);
    let schedule = ForcingSchedule {
        mu_max: 1.2,
        mu_min: 0.8,
        t_down: 4000.0,
        t_up: 4000.0,
        mu_end: None,
    };
    let cfg = MeanfieldConfig {
        params,
        schedule,
        ..Default::default()
    };
    let start = Instant::now();
    let r = cfg.run().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    check(
        r.down_crossings == 1,
        format!("{} down-ramp crossings", r.down_crossings),
    )?;
    check(
        r.locked_in && r.min_a_up > 0.9,
        format!("min A on up-ramp {}", r.min_a_up),
    )?;
    let mu_c = r.mu_forward.ok_or("no forward transition")?;
    // P1 is negligible before the transition, peaks after it and decays.
    let pre = r
        .trajectory
        .points
        .iter()
        .filter(|q| q.t <= cfg.schedule.t_down && q.mu > mu_c + 0.02)
        .map(|q| q.state.p1)
        .fold(0.0, f64::max);
    check(
        pre < 0.05,
        format!("P1 already {pre} before the transition"),
    )?;
    check(r.p1_peak > 0.5, format!("P1 peak only {}", r.p1_peak))?;
    check(
        r.p1_end < r.p1_peak - 0.05,
        format!("no decay: peak {} end {}", r.p1_peak, r.p1_end),
    )?;
    check(
        elapsed < Duration::from_secs(10),
        format!("took {elapsed:?}"),
    )?;

    let mut mus = vec![mu_c];
    for tol in [5e-9, 1e-9] {
        let fine = MeanfieldConfig {
            integrator: IntegratorConfig {
                rtol: tol,
                atol: tol,
                ..Default::default()
            },
            ..cfg.clone()
        };
        let m = fine.run().map_err(|e| e.to_string())?.mu_forward;
        mus.push(m.ok_or("refined run lost the transition")?);
    }
    let spread = mus.iter().map(|m| (m - mu_c).abs()).fold(0.0, f64::max);
    check(spread < 1e-3, format!("transition mu moves by {spread}"))?;
    Ok(format!(
        "mu_c = {mu_c:.5}, min A up = {:.4}, P1 peak {:.3} -> end {:.3}, refinement spread {spread:.1e}, {elapsed:?}",
        r.min_a_up, r.p1_peak, r.p1_end
    ))
}

// ---------------------------------------------------------------- 2

/// The vector field written out term by term.
fn vector_field_oracle(s: &MFState, p: &MFParams) -> [f64; 3] {
    let (a, p1, p3) = (s.a, s.p1, s.p3);
    let p2 = 1.0 - p1 - p3;
    let d_p3 = p.mu - p.mu * p3 - p.kappa * p.eta_f * p3 - p.kappa * (p.eta_a - p.eta_f) * a * p3;
    let d_p1 = p.delta_f0 * p1 * p2 + p.v * p.chi * a * p1 * p2 + p.u * p.omega * a * p2
        - p.mu * p1
        + p.kappa * p.eta_f * p3 * p1 / (1.0 - p3)
        + p.kappa * (p.eta_a - p.eta_f) * a * p3 * p1 / (1.0 - p3);
    let search = (1.0 - p3) / p3;
    let pi_a = p.f1_0 * p1 + p.b3 * p3 - p.c_u * p.u * p2 - p.c_v * p.v;
    let pi_f = p.f2_0 * p1 + p.b3 * p3 - p.c_s * search;
    [a * (1.0 - a) * (pi_a - pi_f), d_p1, d_p3]
}

fn meanfield_algebra() -> Outcome {
    let mut rng = rng_from(2);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let mut p = MFParams::default();
        if k % 2 == 1 {
            p.mu = rng.gen_range(0.5..1.5);
            p.eta_a = rng.gen_range(0.5..2.0);
            p.v = rng.gen_range(0.0..1.0);
            p.u = rng.gen_range(0.0..1.0);
            p.b3 = rng.gen_range(-2.0..2.0);
            p = p.with_delta_f0(rng.gen_range(-1.0..1.0));
        }
        let a: f64 = rng.gen();
        let p3 = rng.gen_range(0.05..0.95);
        let p1 = rng.gen_range(0.0..1.0 - p3);
        let s = MFState::new(a, p1, p3);
        let got = mf_derivatives(&s, &p).map_err(|e| e.to_string())?;
        let want = vector_field_oracle(&s, &p);
        for i in 0..3 {
            let err = (got[i] - want[i]).abs() / (1.0 + want[i].abs());
            worst = worst.max(err);
        }
    }
    check(worst <= 1e-12, format!("derivative mismatch {worst:e}"))?;

    let cfg = MeanfieldConfig::default();
    let mut edge_drift = 0.0f64;
    for a in [0.0, 1.0] {
        let traj = integrate(
            MFState::new(a, 0.2, 0.3),
            &cfg.params,
            Some(&cfg.schedule),
            cfg.schedule.duration(),
            &cfg.integrator,
        )
        .map_err(|e| e.to_string())?;
        for q in &traj.points {
            edge_drift = edge_drift.max((q.state.a - a).abs());
        }
    }
    check(
        edge_drift <= cfg.integrator.atol,
        format!("edge drift {edge_drift:e}"),
    )?;

    let base = cfg.run().map_err(|e| e.to_string())?.trajectory;
    let mut b3_gap = 0.0f64;
    for b3 in [-3.0, 0.5, 7.5] {
        let other = MeanfieldConfig {
            params: MFParams {
                b3,
                ..cfg.params.clone()
            },
            ..cfg.clone()
        };
        let alt = other.run().map_err(|e| e.to_string())?.trajectory;
        check(
            alt.points.len() == base.points.len(),
            "b3 changed the output grid",
        )?;
        for (x, y) in base.points.iter().zip(&alt.points) {
            let (u, v) = (x.state.to_array(), y.state.to_array());
            for i in 0..3 {
                b3_gap = b3_gap.max((u[i] - v[i]).abs());
            }
        }
    }
    check(
        b3_gap <= 1e-8,
        format!("b3 moves trajectories by {b3_gap:e}"),
    )?;
    Ok(format!(
        "worst rel err {worst:.1e}, edge drift {edge_drift:.1e}, b3 gap {b3_gap:.1e}"
    ))
}

// ---------------------------------------------------------------- 3

fn germination_law() -> Outcome {
    let mut rng = rng_from(3);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let cfg = EnvConfig {
            alpha1: rng.gen_range(0.0..2.0),
            alpha2: rng.gen_range(0.0..2.0),
            beta12: rng.gen_range(0.0..3.0),
            beta21: rng.gen_range(0.0..3.0),
            temp: rng.gen_range(0.1..10.0),
            ..Default::default()
        };
        let cell = CellState {
            seeds1: rng.gen_range(0..20),
            seeds2: rng.gen_range(0..20),
            ..Default::default()
        };
        let g = germination_probabilities(&cell, &cfg);
        if [g.p1, g.p2, g.p_empty]
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(format!("probability out of range: {g:?}"));
        }
        worst = worst.max((g.p1 + g.p2 + g.p_empty - 1.0).abs());
    }
    check(worst <= 1e-12, format!("normalisation error {worst:e}"))?;

    // Every cell starts with one seed of each kind, so each reset draws
    // one germination outcome per cell from the same law.
    let mut lines = Vec::new();
    for temp in [1.0, 5.0] {
        let cfg = EnvConfig {
            grid_width: 4,
            grid_height: 4,
            water_patch: 0,
            init_seed_fraction: 1.0,
            temp,
            ..Default::default()
        };
        let g = germination_probabilities(
            &CellState {
                seeds1: 1,
                seeds2: 1,
                ..Default::default()
            },
            &cfg,
        );
        let mut counts = [0u64; 3];
        for k in 0..10_000u64 {
            let s = EnvState::reset(&EnvConfig {
                rng_seed: derive_seed(3, &[k]),
                ..cfg.clone()
            });
            for c in s.cells() {
                counts[if c.has_p1() {
                    0
                } else if c.has_p2() {
                    1
                } else {
                    2
                }] += 1;
            }
        }
        let n = counts.iter().sum();
        for (k, p) in counts.iter().zip([g.p1, g.p2, g.p_empty]) {
            check(
                within_3_sigma(*k, n, p),
                format!("temp {temp}: {k} of {n} vs p = {p}"),
            )?;
        }
        lines.push(format!("temp {temp}: {counts:?} of {n}"));
    }
    Ok(format!("max |sum - 1| = {worst:.1e}; {}", lines.join(", ")))
}

// ---------------------------------------------------------------- 4

fn seasonal_invariants() -> Outcome {
    let base = EnvConfig::default();
    let per_episode: Vec<Result<(u64, u64), String>> = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let cfg = EnvConfig {
                rng_seed: derive_seed(4, &[k]),
                ..base.clone()
            };
            let mut s = EnvState::reset(&cfg);
            let mut twin = EnvState::reset(&cfg);
            let (mut stored, mut survived) = (0u64, 0u64);
            while !s.is_done(&cfg) {
                let crossing = s.season == Season::Summer && s.season_step == cfg.season_length - 1;
                let before = s.clone();
                s.ecology_step(&cfg);
                twin.ecology_step(&cfg);
                if s != twin {
                    return Err(format!("episode {k}: twin runs diverge at t = {}", s.t));
                }
                for c in s.cells() {
                    let plants =
                        u32::from(c.has_p1()) + u32::from(c.has_p2()) + u32::from(c.p3_present);
                    if plants > 1 {
                        return Err(format!(
                            "episode {k}: two plants on one cell at t = {}",
                            s.t
                        ));
                    }
                }
                if crossing {
                    if s.season != Season::Winter || s.plant_count() != 0 {
                        return Err(format!(
                            "episode {k}: plants survive winter onset at t = {}",
                            s.t
                        ));
                    }
                    // Replay the onset on a copy of the pre-step state to
                    // isolate seed survival from the last dispersal step.
                    let mut fork = before;
                    let n: u64 = fork
                        .cells()
                        .iter()
                        .map(|c| u64::from(c.seeds1 + c.seeds2))
                        .sum();
                    fork.begin_winter(&cfg);
                    let m: u64 = fork
                        .cells()
                        .iter()
                        .map(|c| u64::from(c.seeds1 + c.seeds2))
                        .sum();
                    stored += n;
                    survived += m;
                }
            }
            Ok((stored, survived))
        })
        .collect();
    let (mut n, mut m) = (0u64, 0u64);
    for r in per_episode {
        let (a, b) = r?;
        n += a;
        m += b;
    }
    check(
        within_3_sigma(m, n, base.seed_survival),
        format!(
            "{m} of {n} seeds survived, expected rate {}",
            base.seed_survival
        ),
    )?;

    // The full episode pipeline with no agents is reproducible too.
    let run =
        || simulate_episode(&base, &mut [], 41, Neighbourhood::Moore).map_err(|e| e.to_string());
    check(run()? == run()?, "agent-free traces differ")?;
    Ok(format!(
        "seed survival {m}/{n} = {:.4} (d = {})",
        m as f64 / n as f64,
        base.seed_survival
    ))
}

// ---------------------------------------------------------------- 5

fn rewards() -> Outcome {
    let cfg = EnvConfig::default();
    for w in 0..=20u32 {
        let cell = CellState {
            growth1: 1.0,
            w_time: w,
            ..Default::default()
        };
        let value = harvest_reward(&cell, &cfg, true) + cfg.c_harvest;
        check(
            (value - 0.5 * (1.0 + f64::from(w))).abs() <= 1e-15,
            format!("ripe P1 with w_time {w} is worth {value}"),
        )?;
    }

    // A wild harvest taken through the action pipeline.
    let mut state = EnvState::reset(&EnvConfig {
        water_patch: 0,
        ..cfg.clone()
    });
    for c in state.cells_mut() {
        c.clear_plants();
    }
    state.cell_mut(3, 4).p3_present = true;
    let mut agent = AgentState {
        id: 0,
        position: (3, 4),
        inventory: Default::default(),
        cumulative_episode_reward: 0.0,
    };
    state.cell_mut(3, 4).agents_here = 1;
    let out = apply_action(&mut state, &mut agent, AgentAction::Harvest, &cfg);
    check(
        out.reward == 1.0 - cfg.c_harvest,
        format!("wild harvest paid {}", out.reward),
    )?;
    check(!state.cell(3, 4).p3_present, "wild plant not removed")?;

    // Accounting over whole episodes: traced step rewards, reported returns
    // and the undiscounted return of the reward sequence agree.
    let short = EnvConfig {
        cycles_per_episode: 5,
        eta3: 0.05,
        ..cfg.clone()
    };
    let mut worst = 0.0f64;
    for seed in 0..6u64 {
        let mut controllers = vec![Controller::Farmer, Controller::Forager];
        let trace = simulate_episode(&short, &mut controllers, seed, Neighbourhood::Moore)
            .map_err(|e| e.to_string())?;
        let m = collect_episode_metrics(&trace).map_err(|e| e.to_string())?;
        for (i, id) in m.agent_ids.iter().enumerate() {
            let seq: Vec<f64> = trace
                .steps
                .iter()
                .flat_map(|s| &s.agents)
                .filter(|a| a.agent == *id)
                .map(|a| a.reward)
                .collect();
            let sum: f64 = seq.iter().sum();
            worst = worst
                .max((sum - m.returns[i]).abs())
                .max((discounted_return(&seq, 1.0) - sum).abs());
        }
    }
    let policy = PolicyHandle::new(Architecture::grid(vec![16]), 5).map_err(|e| e.to_string())?;
    let batches = collect_batches(&short, &[&policy, &policy], &[0, 1], &[7, 8], &[9, 10])
        .map_err(|e| e.to_string())?;
    for t in batches.iter().flat_map(|b| &b.trajectories) {
        let seq = t.rewards();
        worst = worst.max((discounted_return(&seq, 1.0) - t.total_reward()).abs());
    }
    check(worst <= 1e-9, format!("accounting gap {worst:e}"))?;
    Ok(format!(
        "R_P1 exact for w_time 0..=20, wild harvest {}, accounting gap {worst:.1e}",
        out.reward
    ))
}

// ---------------------------------------------------------------- 6

/// Direct count of weeds around crops by scanning every pair of cells.
fn composition_oracle(state: &EnvState, nb: Neighbourhood) -> (u64, u64) {
    let (w, h) = (state.width(), state.height());
    let (mut weeds, mut crops) = (0u64, 0u64);
    for y in 0..h {
        for x in 0..w {
            if !state.cell(x, y).has_p1() {
                continue;
            }
            crops += 1;
            for yy in 0..h {
                for xx in 0..w {
                    let (dx, dy) = (x.abs_diff(xx), y.abs_diff(yy));
                    let adjacent = match nb {
                        Neighbourhood::Moore => dx.max(dy) == 1,
                        Neighbourhood::VonNeumann => dx + dy == 1,
                    };
                    if adjacent && state.cell(xx, yy).has_p2() {
                        weeds += 1;
                    }
                }
            }
        }
    }
    (weeds, crops)
}

fn composition_oracle_check() -> Outcome {
    let cfg = EnvConfig {
        grid_width: 10,
        grid_height: 10,
        water_patch: 0,
        ..Default::default()
    };
    let mut rng = rng_from(6);
    let mut nonempty = 0;
    for _ in 0..1000 {
        let mut s = EnvState::reset(&cfg);
        let (f1, f2) = (rng.gen_range(0.0..0.6), rng.gen_range(0.0..0.6));
        for c in s.cells_mut() {
            c.clear_plants();
            let u: f64 = rng.gen();
            if u < f1 {
                c.growth1 = rng.gen_range(0.1..=1.0);
            } else if u < f1 + f2 {
                c.growth2 = rng.gen_range(0.1..=1.0);
            } else if u < f1 + f2 + 0.05 {
                c.p3_present = true;
            }
        }
        for nb in [Neighbourhood::Moore, Neighbourhood::VonNeumann] {
            let (weeds, crops) = composition_oracle(&s, nb);
            check(
                composition_counts(&s, nb) == (weeds, crops),
                format!(
                    "{nb:?}: counts {:?} vs {:?}",
                    composition_counts(&s, nb),
                    (weeds, crops)
                ),
            )?;
            let got = neighbourhood_composition(&s, nb);
            // got = weeds / crops exactly as a rational: compare cross products.
            let exact = if crops == 0 {
                got == 0.0
            } else {
                got == weeds as f64 / crops as f64 && (got * crops as f64).round() as u64 == weeds
            };
            check(exact, format!("{nb:?}: {got} vs {weeds}/{crops}"))?;
            if crops > 0 && weeds > 0 {
                nonempty += 1;
            }
        }
    }
    Ok(format!(
        "1000 grids x 2 neighbourhoods, {nonempty} with crops and weeds"
    ))
}

// ---------------------------------------------------------------- 7

fn single(old: f64, new: f64, adv: f64, cfg: &PPOConfig) -> Result<(f64, f64, f64), String> {
    let b = LossBatch {
        old_log_probs: &[old],
        advantages: &[adv],
        returns: &[0.0],
        old_values: &[0.0],
    };
    let (_, d) = ppo_loss(&b, &[new], &[0.0], &[0.0], cfg).map_err(|e| e.to_string())?;
    let g = ppo_loss_grad(&b, &[new], &[0.0], &[0.0], cfg);
    Ok((d.policy_loss, d.clip_fraction, g.d_log_prob[0]))
}

fn ppo_correctness() -> Outcome {
    let start = Instant::now();
    let cfg = PPOConfig::default();
    let eps = cfg.clip_eps;
    // (ratio, advantage, clipped surrogate active)
    let cases = [
        (1.0 + 2.0 * eps, 1.5, true),
        (1.0 - 2.0 * eps, 1.5, false),
        (1.0 - 2.0 * eps, -1.5, true),
        (1.0 + 2.0 * eps, -1.5, false),
        (1.0 + 0.5 * eps, 1.5, false),
        (1.0 - 0.5 * eps, -1.5, false),
        (1.0, 0.7, false),
    ];
    for (r, adv, clipped) in cases {
        let old = -1.3;
        let new = old + f64::ln(r);
        let ratio = (new - old).exp();
        let (loss, frac, grad) = single(old, new, adv, &cfg)?;
        let want = if clipped {
            -ratio.clamp(1.0 - eps, 1.0 + eps) * adv
        } else {
            -ratio * adv
        };
        let want_grad = if clipped { 0.0 } else { -ratio * adv };
        let outside = !(1.0 - eps..=1.0 + eps).contains(&ratio);
        check(
            loss == want && grad == want_grad && (frac == 1.0) == outside,
            format!("r = {r}, A = {adv}: loss {loss} vs {want}, grad {grad} vs {want_grad}, clip fraction {frac}"),
        )?;
    }

    // Log-prob and value gradients of a full grid policy against central differences.
    let arch = Architecture::grid(vec![12]);
    let mut net = PolicyHandle::new(arch.clone(), 7).map_err(|e| e.to_string())?;
    let mut rng = rng_from(77);
    for p in net.params_mut() {
        *p += rng.gen_range(-0.3..0.3);
    }
    let obs: Vec<f32> = (0..OBS_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let past: Vec<Vec<f32>> = (0..5)
        .map(|_| (0..TUPLE_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut slots: Vec<Option<&[f32]>> = vec![None; arch.mem_len - past.len()];
    slots.extend(past.iter().map(|p| Some(p.as_slice())));
    let input = PolicyInput {
        obs: &obs,
        past: slots,
    };
    let mut worst = 0.0f64;
    for root in 0..arch.layout.offsets().len().min(5) {
        let dec = Decision {
            root,
            sub: agrisim::agents::AgentAction::sub_factor(root).map(|_| 1),
        };
        let (out, cache) = net.forward_cached(&input).map_err(|e| e.to_string())?;
        let mut d_logits = vec![0.0; arch.layout.total_logits()];
        out.dist
            .add_log_prob_grad(&arch.layout, dec, 1.0, &mut d_logits);
        let mut grad = vec![0.0; net.param_count()];
        net.backward(&input, &cache, &d_logits, 0.5, &mut grad);
        let objective = |n: &PolicyHandle| {
            let o = n.forward(&input).unwrap();
            o.dist.log_prob(&arch.layout, dec) + 0.5 * o.value
        };
        // Five-point stencil: truncation O(h^4) while roundoff stays near 1e-12.
        let h = 1e-3;
        let at = |i: usize, dx: f64| {
            let mut n = net.clone();
            n.params_mut()[i] += dx;
            objective(&n)
        };
        for i in 0..net.param_count() {
            let fd =
                (8.0 * (at(i, h) - at(i, -h)) - (at(i, 2.0 * h) - at(i, -2.0 * h))) / (12.0 * h);
            let rel = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    check(
        worst <= 1e-4,
        format!("finite-difference rel err {worst:e}"),
    )?;

    let cfg = bandit_config();
    let mut best: Vec<f64> = (0..5)
        .map(|s| train_bandit(&[1.0, 0.0], 200, s, &cfg)[0])
        .collect();
    let med = median(&mut best);
    check(med > 0.95, format!("bandit median P(better arm) = {med}"))?;
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(120),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "{} clip cases, FD rel err {worst:.1e}, bandit median {med:.4}, {elapsed:?}",
        cases.len()
    ))
}

// ---------------------------------------------------------------- 8

fn episodes(
    cfg: &EnvConfig,
    make: fn() -> Vec<Controller>,
    stream: u64,
) -> Result<Vec<EpisodeMetrics>, String> {
    (0..20u64)
        .into_par_iter()
        .map(|k| {
            let mut c = make();
            let t = simulate_episode(cfg, &mut c, derive_seed(stream, &[k]), Neighbourhood::Moore)
                .map_err(|e| e.to_string())?;
            collect_episode_metrics(&t).map_err(|e| e.to_string())
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn scripted_oracle() -> Outcome {
    let start = Instant::now();
    let farmers = || vec![Controller::Farmer, Controller::Farmer];
    let foragers = || vec![Controller::Forager, Controller::Forager];
    let nobody = Vec::new;

    let rare = EnvConfig {
        eta3: 0.001,
        ..Default::default()
    };
    let farm = episodes(&rare, farmers, 8)?;
    let forage = episodes(&rare, foragers, 8)?;
    let empty = episodes(&rare, nobody, 8)?;
    let r_farm = mean(farm.iter().map(EpisodeMetrics::mean_return));
    let r_forage = mean(forage.iter().map(EpisodeMetrics::mean_return));
    check(
        r_farm > 0.0 && r_farm >= 2.0 * r_forage,
        format!("eta3 0.001: farmer {r_farm} vs forager {r_forage}"),
    )?;
    let p1_farm = mean(farm.iter().map(|m| m.final_p1_abundance));
    let p1_empty = mean(empty.iter().map(|m| m.final_p1_abundance));
    check(
        p1_farm >= 5.0 * p1_empty,
        format!("final P1 {p1_farm} vs agent-free {p1_empty}"),
    )?;

    let rich = EnvConfig {
        eta3: 0.3,
        ..Default::default()
    };
    let hi_farm = mean(
        episodes(&rich, farmers, 9)?
            .iter()
            .map(EpisodeMetrics::mean_return),
    );
    let hi_forage = mean(
        episodes(&rich, foragers, 9)?
            .iter()
            .map(EpisodeMetrics::mean_return),
    );
    check(
        hi_forage >= 0.5 * hi_farm,
        format!("eta3 0.3: forager {hi_forage} vs farmer {hi_farm}"),
    )?;
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_secs(300),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "eta3 0.001: farmer {r_farm:.2} vs forager {r_forage:.2}, final P1 {p1_farm:.1} vs {p1_empty:.2}; \
         eta3 0.3: forager {hi_forage:.2} vs farmer {hi_farm:.2}; {elapsed:?}"
    ))
}

// ---------------------------------------------------------------- 9

/// Episodes of PPO experience allowed per seed.
const LEARNING_BUDGET: usize = 20_000;

/// Mean per-agent return and mean watering events over evaluation episodes.
fn eval_summary(t: &Trainer, episodes: usize, seed: u64) -> Result<(f64, f64), String> {
    let m = t
        .evaluate(episodes, seed, Neighbourhood::Moore)
        .map_err(|e| e.to_string())?;
    Ok((
        mean(m.iter().map(EpisodeMetrics::mean_return)),
        mean(m.iter().map(|x| x.watering_events as f64)),
    ))
}

/// Improvement over the untrained return `b` in units of |b|; "trained
/// return is k times the baseline" reads as a gain of k - 1 for b > 0.
fn gain(ret: f64, b: f64) -> f64 {
    (ret - b) / b.abs()
}

struct SeedRun {
    baseline: f64,
    ret: f64,
    watering: f64,
    episodes: usize,
}

/// Train until a fresh evaluation confirms the target gain or the budget runs out.
fn learn_one(seed: u64) -> Result<SeedRun, String> {
    let cfg = TrainConfig {
        env: EnvConfig {
            grid_width: 15,
            grid_height: 15,
            eta3: 0.001,
            cycles_per_episode: 5,
            ..Default::default()
        },
        ppo: PPOConfig {
            gamma: 0.99,
            ..Default::default()
        },
        n_agents: 2,
        hidden: vec![64],
        seed,
        total_episodes: LEARNING_BUDGET,
        checkpoint_every: 0,
    };
    let mut t = Trainer::new(cfg).map_err(|e| e.to_string())?;
    let (baseline, _) = eval_summary(&t, 64, derive_seed(seed, &[90]))?;
    let screen_seed = derive_seed(seed, &[91]);
    let mut last = (baseline, 0.0);
    while !t.finished() {
        t.step().map_err(|e| e.to_string())?;
        if t.update % 10 != 0 && !t.finished() {
            continue;
        }
        let (screen, _) = eval_summary(&t, 32, screen_seed)?;
        if gain(screen, baseline) < 2.0 && !t.finished() {
            continue;
        }
        // Fresh episodes, so selecting on a lucky screen cannot pass.
        last = eval_summary(&t, 64, derive_seed(seed, &[92, t.update]))?;
        println!(
            "  seed {seed}: update {} ({} episodes) return {:.2} vs baseline {baseline:.2}, watering {:.1}",
            t.update, t.episodes, last.0, last.1
        );
        if gain(last.0, baseline) >= 2.0 && last.1 > 0.0 {
            break;
        }
    }
    Ok(SeedRun {
        baseline,
        ret: last.0,
        watering: last.1,
        episodes: t.episodes,
    })
}

fn learning_demo() -> Outcome {
    let start = Instant::now();
    let runs = (0..3u64).map(learn_one).collect::<Result<Vec<_>, _>>()?;
    let mut gains: Vec<f64> = runs.iter().map(|r| gain(r.ret, r.baseline)).collect();
    let mut watering: Vec<f64> = runs.iter().map(|r| r.watering).collect();
    let (g, w) = (median(&mut gains), median(&mut watering));
    let summary = runs
        .iter()
        .map(|r| {
            format!(
                "{:.2} -> {:.2} in {} episodes",
                r.baseline, r.ret, r.episodes
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let elapsed = start.elapsed();
    check(
        g >= 2.0 && w > 0.0,
        format!("median gain {g:.2} |baseline| (need 2), median watering {w:.1}; {summary}"),
    )?;
    check(
        elapsed < Duration::from_secs(4 * 3600),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "median gain {g:.2} |baseline|, median watering {w:.1}; {summary}; {elapsed:?}"
    ))
}

// ---------------------------------------------------------------- 10

fn roster(acc: &[f64], ppo: &PPOConfig) -> PopulationState {
    let template = PolicyHandle::new(Architecture::bandit(2), 0).unwrap();
    let learners = (0..acc.len() as u64)
        .map(|i| Learner::new(i, template.clone(), ppo))
        .collect();
    let mut pop = PopulationState::new(learners);
    for (m, &r) in pop.members.iter_mut().zip(acc) {
        m.cumulative = r;
    }
    pop
}

/// The roster rule restated: deaths at R <= R_minus, parents at R >= R_plus
/// ranked by R then id, births capped by the room left after deaths.
fn roster_oracle(
    acc: &[f64],
    rewards: &[f64],
    n_max: usize,
    hi: f64,
    lo: f64,
) -> (Vec<u64>, Vec<(u64, u64)>) {
    let n = acc.len();
    let r: Vec<f64> = acc.iter().zip(rewards).map(|(a, b)| a + b).collect();
    let alive: Vec<u64> = (0..n as u64).filter(|&i| r[i as usize] > lo).collect();
    let mut parents: Vec<u64> = (0..n as u64).filter(|&i| r[i as usize] >= hi).collect();
    parents.sort_by(|&x, &y| r[y as usize].total_cmp(&r[x as usize]).then(x.cmp(&y)));
    parents.truncate(n_max.saturating_sub(alive.len()));
    let births: Vec<(u64, u64)> = parents
        .iter()
        .enumerate()
        .map(|(k, &p)| (n as u64 + k as u64, p))
        .collect();
    let mut ids = alive;
    ids.extend(births.iter().map(|b| b.0));
    (ids, births)
}

fn social_mechanics() -> Outcome {
    let ppo = PPOConfig::default();
    let (hi, lo) = (10.0, 0.0);
    let mut rng = rng_from(10);
    let mut capped = 0;
    for _ in 0..10_000 {
        let n_max = rng.gen_range(1..=32);
        let n = rng.gen_range(1..=n_max);
        let acc: Vec<f64> = (0..n).map(|_| rng.gen_range(0..12) as f64 * 0.5).collect();
        let rewards: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..12) as f64 * 0.5).collect();
        let cfg = PopulationConfig {
            n0: 1,
            n_max,
            thresholds: Thresholds::Absolute {
                r_plus: hi,
                r_minus: lo,
            },
            sl_enabled: true,
        };
        let mut pop = roster(&acc, &ppo);
        let ev = population_update(&mut pop, &rewards, &cfg, (hi, lo), &ppo, |id| id)
            .map_err(|e| e.to_string())?;
        let (ids, births) = roster_oracle(&acc, &rewards, n_max, hi, lo);
        let got: Vec<(u64, u64)> = ev
            .iter()
            .filter(|e| e.kind == EventKind::Birth)
            .map(|e| (e.agent, e.parent.unwrap()))
            .collect();
        let deaths = ev.iter().filter(|e| e.kind == EventKind::Death).count();
        check(
            pop.ids() == ids && got == births && pop.len() == n + births.len() - deaths,
            format!(
                "roster {acc:?} + {rewards:?} (cap {n_max}): {:?} vs {ids:?}",
                pop.ids()
            ),
        )?;
        if acc
            .iter()
            .zip(&rewards)
            .filter(|(a, b)| *a + *b >= hi)
            .count()
            > births.len()
        {
            capped += 1;
        }
    }

    let parent = PolicyHandle::new(Architecture::grid(vec![16]), 3).map_err(|e| e.to_string())?;
    let child = clone_policy(&parent, 99).map_err(|e| e.to_string())?;
    check(
        child.to_blob() == parent.to_blob(),
        "clone is not byte-identical",
    )?;
    let bandit = PolicyHandle::new(Architecture::bandit(2), 1).map_err(|e| e.to_string())?;
    let snapshot = bandit.to_blob();
    let cfg = bandit_config();
    let mut kid = Learner::new(
        1,
        clone_policy(&bandit, 5).map_err(|e| e.to_string())?,
        &cfg,
    );
    let batch = bandit_batch(&mut kid.policy, &[1.0, 0.0], 32);
    train_update(&mut kid, &batch, &cfg, 0).map_err(|e| e.to_string())?;
    check(
        kid.policy.params() != bandit.params() && bandit.to_blob() == snapshot,
        "training the clone touched the parent",
    )?;

    let train = TrainConfig {
        env: EnvConfig {
            grid_width: 9,
            grid_height: 9,
            season_length: 5,
            cycles_per_episode: 2,
            ..Default::default()
        },
        ppo: PPOConfig {
            episodes_per_update: 2,
            minibatch_size: 16,
            ..Default::default()
        },
        hidden: vec![16],
        total_episodes: 8,
        seed: 10,
        ..Default::default()
    };
    let pc = PopulationConfig {
        sl_enabled: false,
        ..Default::default()
    };
    let mut social = SocialTrainer::new(train.clone(), pc).map_err(|e| e.to_string())?;
    let mut plain = Trainer::new(train).map_err(|e| e.to_string())?;
    while !plain.finished() {
        let a = plain.step().map_err(|e| e.to_string())?;
        let b = social.step().map_err(|e| e.to_string())?;
        check(a == b.stats, "update statistics differ")?;
    }
    check(social.finished(), "social run has extra rounds")?;
    for (x, y) in plain.learners.iter().zip(&social.pop.learners) {
        check(
            x.policy.to_blob() == y.policy.to_blob(),
            "parameters differ",
        )?;
    }
    Ok(format!(
        "10000 rosters ({capped} cap-limited), clone exact and independent, disabled SL bit-exact"
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mean-field hysteresis", hysteresis),
        ("mean-field algebra", meanfield_algebra),
        ("germination law", germination_law),
        ("seasonal invariants", seasonal_invariants),
        ("reward function", rewards),
        ("neighbourhood composition oracle", composition_oracle_check),
        ("PPO correctness", ppo_correctness),
        ("scripted ecological oracle", scripted_oracle),
        ("learning demonstration", learning_demo),
        ("social-learning mechanics", social_mechanics),
    ];
    // ACCEPTANCE_ONLY=7,9 restricts the run to the listed criteria.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
