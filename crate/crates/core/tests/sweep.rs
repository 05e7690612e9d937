use agrisim::env::EnvConfig;
use agrisim::metrics::*;
use agrisim::ppo::{PPOConfig, TrainConfig};
use agrisim::rng::derive_seed;

fn small_base() -> TrainConfig {
    TrainConfig {
        env: EnvConfig {
            grid_width: 12,
            grid_height: 12,
            cycles_per_episode: 3,
            ..Default::default()
        },
        ppo: PPOConfig {
            episodes_per_update: 2,
            minibatch_size: 64,
            ..Default::default()
        },
        hidden: vec![16],
        ..Default::default()
    }
}

fn scripted(axes: Vec<Axis>, replicates: usize, controllers: Vec<ScriptedKind>) -> SweepSpec {
    SweepSpec {
        axes,
        replicates,
        episodes: 1,
        mode: SweepMode::Scripted { controllers },
        seed: 8,
        neighbourhood: Neighbourhood::Moore,
        output: None,
        base: small_base(),
    }
}

fn axis(param: &str, values: &[f64]) -> Axis {
    Axis {
        param: param.into(),
        values: values.to_vec(),
    }
}

#[test]
fn single_cell_matches_direct_evaluation() {
    let spec = scripted(
        vec![axis("env.eta3", &[0.01])],
        1,
        vec![ScriptedKind::Farmer],
    );
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 1);
    let env = EnvConfig {
        eta3: 0.01,
        ..small_base().env
    };
    let episode_seed = derive_seed(derive_seed(8, &[0, 0]), &[0]);
    let mut c = vec![Controller::Farmer, Controller::Farmer];
    let trace = simulate_episode(&env, &mut c, episode_seed, Neighbourhood::Moore).unwrap();
    let direct = metric_values(&collect_episode_metrics(&trace).unwrap());
    assert_eq!(rows[0].metrics.as_ref().unwrap(), &direct);
}

#[test]
fn grid_by_replicates_row_count() {
    let spec = scripted(
        vec![
            axis("env.eta3", &[0.001, 0.1]),
            axis("n_agents", &[1.0, 2.0]),
        ],
        2,
        vec![ScriptedKind::Forager],
    );
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 8);
    let csv = sweep_csv(&spec, &rows);
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("cell,env.eta3,n_agents,policy,replicate,seed,p1_abundance,"));
    assert!(rows.iter().all(|r| r.metrics.is_ok()));
}

#[test]
fn rows_do_not_depend_on_neighbours() {
    let both = scripted(
        vec![axis("env.eta3", &[0.001, 0.05])],
        2,
        vec![ScriptedKind::Farmer],
    );
    let all = run_sweep(&both).unwrap();
    assert_eq!(all, run_sweep(&both).unwrap());
    // A row is reproduced by a sweep holding only its own cell.
    let alone = scripted(
        vec![axis("env.eta3", &[0.001])],
        2,
        vec![ScriptedKind::Farmer],
    );
    let one = run_sweep(&alone).unwrap();
    assert_eq!(one[1].metrics, all[1].metrics);
}

#[test]
fn failing_cells_are_recorded() {
    let spec = scripted(
        vec![axis("env.eta3", &[0.01, 1.5])],
        1,
        vec![ScriptedKind::Forager],
    );
    let rows = run_sweep(&spec).unwrap();
    assert!(rows[0].metrics.is_ok());
    let err = rows[1].metrics.as_ref().unwrap_err();
    assert!(err.contains("eta3"), "{err}");
    let csv = sweep_csv(&spec, &rows);
    let last = csv.lines().last().unwrap();
    assert_eq!(
        last.split(',').count(),
        csv.lines().next().unwrap().split(',').count()
    );
}

#[test]
fn bad_specs_are_rejected() {
    assert!(run_sweep(&scripted(
        vec![axis("env.nope", &[1.0])],
        1,
        vec![ScriptedKind::Farmer]
    ))
    .is_err());
    assert!(run_sweep(&scripted(vec![], 1, vec![ScriptedKind::Farmer])).is_err());
    assert!(run_sweep(&scripted(
        vec![axis("env.eta3", &[0.1])],
        0,
        vec![ScriptedKind::Farmer]
    ))
    .is_err());
}

#[test]
fn farmers_lead_when_wild_plants_are_rare() {
    let base = TrainConfig::default();
    let spec = SweepSpec {
        base: TrainConfig {
            env: EnvConfig::default(),
            ..base
        },
        episodes: 2,
        ..scripted(
            vec![axis("env.eta3", &[0.001, 0.3])],
            1,
            vec![ScriptedKind::Farmer, ScriptedKind::Forager],
        )
    };
    let rows = run_sweep(&spec).unwrap();
    let ret = |cell: usize, who: &str| {
        let r = rows
            .iter()
            .find(|r| r.cell == cell && r.variant == who)
            .unwrap();
        r.metrics.as_ref().unwrap()[8]
    };
    let (farm_lo, forage_lo) = (ret(0, "farmer"), ret(0, "forager"));
    let (farm_hi, forage_hi) = (ret(1, "farmer"), ret(1, "forager"));
    assert!(farm_lo > forage_lo, "{farm_lo} vs {forage_lo}");
    assert!(
        forage_hi / farm_hi > forage_lo / farm_lo,
        "gap does not narrow"
    );
}

#[test]
fn training_cells_run() {
    let spec = SweepSpec {
        axes: vec![axis("ppo.gamma", &[0.9])],
        replicates: 1,
        episodes: 2,
        mode: SweepMode::Train { eval_episodes: 1 },
        seed: 1,
        neighbourhood: Neighbourhood::Moore,
        output: None,
        base: TrainConfig {
            env: EnvConfig {
                grid_width: 9,
                grid_height: 9,
                season_length: 5,
                cycles_per_episode: 2,
                ..Default::default()
            },
            ..small_base()
        },
    };
    let rows = run_sweep(&spec).unwrap();
    assert!(rows[0].metrics.is_ok(), "{:?}", rows[0].metrics);
    assert_eq!(rows[0].variant, "ppo");
}

#[test]
fn spec_from_toml() {
    let spec = SweepSpec::from_toml_str(
        r#"
replicates = 2
episodes = 3
seed = 4
[mode]
kind = "scripted"
controllers = ["farmer", "forager"]
[[axes]]
param = "env.eta3"
values = [0.001, 0.3]
[[axes]]
param = "ppo.gamma"
values = [0.9, 0.99]
[base.env]
grid_width = 20
"#,
    )
    .unwrap();
    assert_eq!(spec.cells().len(), 4);
    assert_eq!(spec.base.env.grid_width, 20);
}

#[test]
fn metrics_csv_layout() {
    let mut c = vec![Controller::Forager];
    let env = small_base().env;
    let m =
        collect_episode_metrics(&simulate_episode(&env, &mut c, 1, Neighbourhood::Moore).unwrap())
            .unwrap();
    let csv = metrics_csv(&[m.clone(), m]);
    assert_eq!(
        csv.lines().next().unwrap(),
        format!("episode,{}", METRIC_COLUMNS.join(","))
    );
    assert_eq!(csv.lines().count(), 3);
}
