use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agrisim::env::EnvConfig;
use agrisim::meanfield::{equilibria, MeanfieldConfig};
use agrisim::metrics::{
    collect_episode_metrics, metrics_csv, run_sweep, simulate_episode, sweep_csv, Controller,
    Neighbourhood, SweepSpec,
};
use agrisim::policy::PolicyHandle;
use agrisim::ppo::{TrainConfig, Trainer};
use agrisim::rng::derive_seed;
use agrisim::social::{events_csv, PopulationConfig, SocialTrainer};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "agrisim", version, about = "Emergent agriculture simulations")]
struct Cli {
    /// TOML configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Nb {
    Moore,
    VonNeumann,
}

impl From<Nb> for Neighbourhood {
    fn from(n: Nb) -> Self {
        match n {
            Nb::Moore => Neighbourhood::Moore,
            Nb::VonNeumann => Neighbourhood::VonNeumann,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Play episodes with scripted or checkpointed policies; writes traces and metrics.
    Simulate {
        /// One entry per agent: `farmer`, `forager` or a checkpoint file path.
        #[arg(long = "agent", required = true)]
        agents: Vec<String>,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long, value_enum, default_value = "moore")]
        neighbourhood: Nb,
    },
    /// Train with PPO; a `[population]` table in the config enables social learning.
    Train {
        /// Overrides the configured episode budget.
        #[arg(long)]
        episodes: Option<usize>,
        /// Evaluation episodes played after training.
        #[arg(long, default_value_t = 4)]
        eval_episodes: usize,
    },
    /// Run a parameter sweep described by the config file.
    Sweep,
    /// Integrate the mean-field model under the forcing ramp.
    Meanfield {
        /// Grid resolution of the equilibrium search.
        #[arg(long, default_value_t = 10)]
        resolution: usize,
    },
}

fn read_config(path: &Option<PathBuf>) -> Result<Option<String>> {
    path.as_ref()
        .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
        .transpose()
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn controller(spec: &str, seed: u64) -> Result<Controller> {
    Ok(match spec {
        "farmer" => Controller::Farmer,
        "forager" => Controller::Forager,
        path => {
            let bytes = fs::read(path).with_context(|| format!("reading checkpoint {path}"))?;
            Controller::Policy(Box::new(PolicyHandle::from_blob(&bytes, seed)?))
        }
    })
}

fn simulate(cli: &Cli, agents: &[String], episodes: usize, nb: Neighbourhood) -> Result<()> {
    let env = match read_config(&cli.config)? {
        Some(text) => EnvConfig::from_toml_str(&text)?,
        None => EnvConfig::default(),
    };
    let seed = cli.seed.unwrap_or(env.rng_seed);
    let mut controllers = agents
        .iter()
        .enumerate()
        .map(|(i, a)| controller(a, derive_seed(seed, &[u64::MAX, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let mut all = Vec::with_capacity(episodes);
    for k in 0..episodes {
        let trace = simulate_episode(&env, &mut controllers, derive_seed(seed, &[k as u64]), nb)?;
        write(&cli.out, &format!("trace_{k}.csv"), &trace.to_csv())?;
        let m = collect_episode_metrics(&trace)?;
        println!(
            "episode {k}: mean return {:.3}, P1 abundance {:.2}",
            m.mean_return(),
            m.p1_abundance
        );
        all.push(m);
    }
    write(&cli.out, "metrics.csv", &metrics_csv(&all))
}

fn train(cli: &Cli, episodes: Option<usize>, eval_episodes: usize) -> Result<()> {
    let mut table: toml::Table = match read_config(&cli.config)? {
        Some(text) => toml::from_str(&text)?,
        None => toml::Table::new(),
    };
    let population: Option<PopulationConfig> = table
        .remove("population")
        .map(|v| v.try_into())
        .transpose()?;
    let mut cfg: TrainConfig = toml::Value::Table(table).try_into()?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(e) = episodes {
        cfg.total_episodes = e;
    }
    cfg.validate()?;
    let ckpt = cli.out.join("checkpoints");
    let mut metrics = String::new();
    let eval_seed = derive_seed(cfg.seed, &[u64::MAX]);
    let nb = Neighbourhood::Moore;
    let eval = match population {
        Some(pc) => {
            let mut t = SocialTrainer::new(cfg, pc)?;
            let mut events = Vec::new();
            t.run(&mut metrics, &mut events, Some(&ckpt))?;
            write(&cli.out, "events.csv", &events_csv(&events))?;
            write(&cli.out, "lineage.txt", &t.pop.lineage_edges())?;
            println!(
                "final population {}{}",
                t.pop.len(),
                if t.pop.extinct { " (extinct)" } else { "" }
            );
            agrisim::ppo::save_checkpoints(&ckpt, &t.pop.learners, t.round)?;
            agrisim::ppo::evaluate_learners(
                &t.train.env,
                &t.pop.learners,
                eval_episodes,
                eval_seed,
                nb,
            )?
        }
        None => {
            let mut t = Trainer::new(cfg)?;
            t.run(&mut metrics, Some(&ckpt))?;
            t.save_checkpoints(&ckpt)?;
            t.evaluate(eval_episodes, eval_seed, nb)?
        }
    };
    write(&cli.out, "train_metrics.csv", &metrics)?;
    write(&cli.out, "eval_metrics.csv", &metrics_csv(&eval))?;
    Ok(())
}

fn sweep(cli: &Cli) -> Result<()> {
    let Some(text) = read_config(&cli.config)? else {
        bail!("sweep needs --config with a sweep specification");
    };
    let mut spec = SweepSpec::from_toml_str(&text)?;
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    let rows = run_sweep(&spec)?;
    let failed = rows.iter().filter(|r| r.metrics.is_err()).count();
    let csv = sweep_csv(&spec, &rows);
    match &spec.output {
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => write(&cli.out, "sweep.csv", &csv)?,
    }
    println!("{} rows, {failed} failed", rows.len());
    Ok(())
}

fn meanfield(cli: &Cli, resolution: usize) -> Result<()> {
    let cfg = match read_config(&cli.config)? {
        Some(text) => MeanfieldConfig::from_toml_str(&text)?,
        None => MeanfieldConfig::default(),
    };
    let r = cfg.run()?;
    write(&cli.out, "meanfield_trajectory.csv", &r.trajectory.to_csv())?;
    let mut summary = String::from("key,value\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (k, v) in [
        ("mu_forward", opt(r.mu_forward)),
        ("mu_reverse", opt(r.mu_reverse)),
        ("down_crossings", r.down_crossings.to_string()),
        ("locked_in", r.locked_in.to_string()),
        ("min_a_up", r.min_a_up.to_string()),
        ("p1_peak", r.p1_peak.to_string()),
        ("mu_at_p1_peak", r.mu_at_p1_peak.to_string()),
        ("p1_end", r.p1_end.to_string()),
        ("f1_0", cfg.params.f1_0.to_string()),
        ("f2_0", cfg.params.f2_0.to_string()),
    ] {
        summary.push_str(&format!("{k},{v}\n"));
    }
    write(&cli.out, "meanfield_summary.csv", &summary)?;
    let mut eq = String::from("mu,A,P1,P3,stability,max_re\n");
    for mu in [cfg.schedule.mu_max, cfg.schedule.mu_min] {
        let p = agrisim::meanfield::MFParams {
            mu,
            ..cfg.params.clone()
        };
        for e in equilibria(&p, resolution) {
            let max_re = e
                .eigenvalues
                .iter()
                .map(|z| z.0)
                .fold(f64::NEG_INFINITY, f64::max);
            eq.push_str(&format!(
                "{mu},{},{},{},{:?},{max_re}\n",
                e.state.a, e.state.p1, e.state.p3, e.stability
            ));
        }
    }
    write(&cli.out, "meanfield_equilibria.csv", &eq)?;
    println!(
        "forward transition at mu = {}, locked in: {}",
        opt(r.mu_forward),
        r.locked_in
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    match &cli.command {
        Command::Simulate {
            agents,
            episodes,
            neighbourhood,
        } => simulate(cli, agents, *episodes, (*neighbourhood).into()),
        Command::Train {
            episodes,
            eval_episodes,
        } => train(cli, *episodes, *eval_episodes),
        Command::Sweep => sweep(cli),
        Command::Meanfield { resolution } => meanfield(cli, *resolution),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
