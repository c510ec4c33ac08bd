//! Seeded, parallel replication of bandit experiments and their summaries.

pub mod build;
pub mod config;
pub mod seeds;

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::agents::Agent;
use crate::domain::{ActionId, RoundRecord, RunTrace};
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::metrics::{argmax_tiebreak, cumulative_regret};

pub use build::{build_agent, PreparedEnv};
pub use config::{AgentKind, AgentSpec, EnvSpec, ExperimentConfig, Metric};
pub use seeds::{derive_seed, env_streams, stream_rng};

/// Plays `horizon` rounds of `agent` against `env`.
pub fn run_one(env: &mut dyn Environment, agent: &mut dyn Agent, horizon: usize, seed: u64) -> Result<RunTrace> {
    let mut trace = RunTrace::new(agent.name(), env.name(), seed);
    trace.records.reserve(horizon);
    for t in 1..=horizon {
        let ctx = env.begin_round(t);
        let means: Vec<f64> = (0..env.num_arms()).map(|a| env.mean_reward(ActionId(a))).collect();
        let best = argmax_tiebreak(&means)?;
        agent.observe_truth(&means);
        let action = agent.act(&ctx)?;
        if action.0 >= means.len() {
            return Err(Error::Protocol(format!("agent chose arm {action} of {}", means.len())));
        }
        let reward = env.pull(action);
        agent.update(&ctx, action, reward)?;
        trace.records.push(RoundRecord {
            t,
            context: ctx,
            action,
            reward,
            true_state: env.state(),
            optimal_action: ActionId(best),
            optimal_mean: means[best],
            chosen_mean: means[action.0],
        });
    }
    Ok(trace)
}

/// Runs agent `index` of `config` in replication `run`, returning the trace
/// and the agent in its final state.
pub fn run_agent(
    config: &ExperimentConfig,
    env: &PreparedEnv,
    run: usize,
    index: usize,
) -> Result<(RunTrace, Box<dyn Agent>)> {
    let spec = &config.agents[index];
    let mut e = env.instantiate(env_streams(config.seed, run as u64))?;
    let rng = stream_rng(config.seed, run as u64, "agent", index as u64);
    let mut agent = build_agent(spec, e.as_ref(), config.horizon, rng)?;
    let mut trace = run_one(e.as_mut(), agent.as_mut(), config.horizon, seeds::trace_seed(config.seed, run as u64, index as u64))
        .map_err(|err| Error::config(format!("run {run}, agent {}: {err}", spec.label())))?;
    trace.agent_name = spec.label();
    Ok((trace, agent))
}

/// Per-round metric of one trace.
pub fn metric_curve(trace: &RunTrace, metric: Metric) -> Vec<f64> {
    match metric {
        Metric::CumulativeRegret => cumulative_regret(trace),
        Metric::PerRoundReward => trace.records.iter().map(|r| r.chosen_mean).collect(),
    }
}

/// Sample mean and standard error `sd / sqrt(n)`; zero error for one value.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentResult {
    pub name: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// One summary value per run, in run order.
    pub finals: Vec<f64>,
    pub final_mean: f64,
    pub final_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub metric: Metric,
    pub horizon: usize,
    pub runs: usize,
    pub agents: Vec<AgentResult>,
}

impl AggregateResult {
    pub fn agent(&self, name: &str) -> Option<&AgentResult> {
        self.agents.iter().find(|a| a.name == name)
    }
}

/// Summary of one run: the last value, or the mean over the last `window`
/// rounds.
pub fn run_summary(curve: &[f64], window: Option<usize>) -> f64 {
    match window {
        Some(w) => curve[curve.len() - w..].iter().sum::<f64>() / w as f64,
        None => *curve.last().expect("non-empty curve"),
    }
}

/// `curves[run][agent][t]` into per-agent means and standard errors.
pub fn aggregate(
    names: &[String],
    curves: &[Vec<Vec<f64>>],
    metric: Metric,
    window: Option<usize>,
) -> AggregateResult {
    let runs = curves.len();
    let horizon = curves.first().and_then(|c| c.first()).map_or(0, Vec::len);
    let agents = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut mean = Vec::with_capacity(horizon);
            let mut stderr = Vec::with_capacity(horizon);
            let mut column = vec![0.0; runs];
            for t in 0..horizon {
                for (r, c) in curves.iter().enumerate() {
                    column[r] = c[i][t];
                }
                let (m, s) = mean_stderr(&column);
                mean.push(m);
                stderr.push(s);
            }
            let finals: Vec<f64> = curves.iter().map(|c| run_summary(&c[i], window)).collect();
            let (final_mean, final_stderr) = mean_stderr(&finals);
            AgentResult {
                name: name.clone(),
                mean,
                stderr,
                finals,
                final_mean,
                final_stderr,
            }
        })
        .collect();
    AggregateResult {
        metric,
        horizon,
        runs,
        agents,
    }
}

/// Worker count from `NSLB_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var("NSLB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(format!("NSLB_THREADS={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs every agent in every replication. Runs execute in parallel; the
/// result does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    config.validate()?;
    let env = PreparedEnv::prepare(&config.env)?;
    run_prepared(config, &env)
}

pub fn run_prepared(config: &ExperimentConfig, env: &PreparedEnv) -> Result<AggregateResult> {
    let one = |run: usize| -> Result<Vec<Vec<f64>>> {
        (0..config.agents.len())
            .map(|i| run_agent(config, env, run, i).map(|(t, _)| metric_curve(&t, config.metric)))
            .collect()
    };
    let work = || (0..config.runs).into_par_iter().map(one).collect::<Result<Vec<_>>>();
    let curves = match thread_limit()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(aggregate(&config.labels(), &curves, config.metric, config.summary_window))
}

pub const CURVES: &str = "curves.csv";
pub const SUMMARY: &str = "summary.csv";
pub const CONFIG_ECHO: &str = "config_echo.toml";

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes `curves.csv`, `summary.csv` and `config_echo.toml` into `dir`.
/// Floats are written in shortest round-trip form.
pub fn emit_results(result: &AggregateResult, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(CURVES);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
    w.write_record(["round", "agent", "mean", "stderr"]).map_err(|e| csv_io(&path, e))?;
    for a in &result.agents {
        for (t, (m, s)) in a.mean.iter().zip(&a.stderr).enumerate() {
            w.write_record([(t + 1).to_string(), a.name.clone(), m.to_string(), s.to_string()])
                .map_err(|e| csv_io(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(SUMMARY);
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_io(&path, e))?;
    w.write_record(["agent", "final_mean", "final_stderr"]).map_err(|e| csv_io(&path, e))?;
    for a in &result.agents {
        w.write_record([a.name.clone(), a.final_mean.to_string(), a.final_stderr.to_string()])
            .map_err(|e| csv_io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(CONFIG_ECHO);
    fs::write(&path, config.to_toml()).map_err(|e| Error::io(&path, e))
}
