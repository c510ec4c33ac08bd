use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nslb::offline::{build_offline, load_movies, load_ratings, OfflineConfig};
use nslb::runner::{emit_results, run_agent, run_prepared, ExperimentConfig, PreparedEnv};
use nslb::{Error, Result};

#[derive(Parser)]
#[command(name = "nslb", version, about = "Non-stationary latent bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the final particle set of each particle-filter agent in
        /// run 0 as CSV.
        #[arg(long)]
        dump_particles: bool,
    },
    /// Offline model building from MovieLens files.
    Offline {
        #[command(subcommand)]
        command: OfflineCommand,
    },
}

#[derive(Subcommand)]
enum OfflineCommand {
    Build {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        movies: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// TOML overrides for filtering, ALS and clustering settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(
    config: PathBuf,
    runs: Option<usize>,
    horizon: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    dump_particles: bool,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if let Some(r) = runs {
        cfg.runs = r;
    }
    if let Some(h) = horizon {
        cfg.horizon = h;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `out`".into()))?;
    cfg.out = Some(out.clone());
    cfg.validate()?;
    let env = PreparedEnv::prepare(&cfg.env)?;
    let result = run_prepared(&cfg, &env)?;
    emit_results(&result, &cfg, &out)?;
    if dump_particles {
        for i in 0..cfg.agents.len() {
            let (trace, agent) = run_agent(&cfg, &env, 0, i)?;
            if let Some(set) = agent.particles() {
                let path = out.join(format!("particles_{}.csv", trace.agent_name));
                set.write_snapshot_csv(&path)?;
            }
        }
    }
    for a in &result.agents {
        println!("{}\t{:.4}\t{:.4}", a.name, a.final_mean, a.final_stderr);
    }
    Ok(())
}

fn offline_build(ratings: PathBuf, movies: PathBuf, out: PathBuf, config: Option<PathBuf>) -> Result<()> {
    let cfg: OfflineConfig = match config {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => OfflineConfig::default(),
    };
    let mut table = load_ratings(&ratings)?;
    table.genres = load_movies(&movies)?;
    let built = build_offline(&table, &cfg)?;
    built.model.write(&out)?;
    println!(
        "users {}  movies {}  train rmse {:.4}  held-out rmse {:.4}",
        built.model.user_ids.len(),
        built.model.movie_ids.len(),
        built.train_report.train_rmse.last().copied().unwrap_or(f64::NAN),
        built.heldout_rmse
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            runs,
            horizon,
            seed,
            out,
            dump_particles,
        } => run(config, runs, horizon, seed, out, dump_particles),
        Command::Offline {
            command: OfflineCommand::Build {
                ratings,
                movies,
                out,
                config,
            },
        } => offline_build(ratings, movies, out, config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nslb: {e}");
            ExitCode::FAILURE
        }
    }
}
