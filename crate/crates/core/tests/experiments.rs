use std::fs;

use nslb::agents::LinearDetector;
use nslb::domain::{ActionId, Context};
use nslb::runner::{emit_results, run_agent, run_experiment, ExperimentConfig, Metric, PreparedEnv};
use nslb::Error;

fn synthetic(horizon: usize, runs: usize, seed: u64, states: usize, agents: &[&str]) -> ExperimentConfig {
    with_period(horizon, runs, seed, states, 50, agents)
}

fn with_period(horizon: usize, runs: usize, seed: u64, states: usize, period: usize, agents: &[&str]) -> ExperimentConfig {
    let agents: String = agents.iter().map(|a| format!("\n[[agents]]\n{a}\n")).collect();
    ExperimentConfig::from_toml(&format!(
        r#"
horizon = {horizon}
runs = {runs}
seed = {seed}

[env]
kind = "synthetic"
arms = 4
states = {states}
sigma = 0.5
schedule = {{ kind = "fixed_period", period = {period} }}
rewards = {{ kind = "uniform" }}
{agents}"#
    ))
    .unwrap()
}

#[test]
fn oracle_has_zero_regret() {
    let r = run_experiment(&synthetic(300, 5, 1, 3, &["kind = \"oracle\""])).unwrap();
    assert!(r.agents[0].mean.iter().all(|x| *x == 0.0));
}

#[test]
fn single_state_mts_always_plays_the_best_arm() {
    let config = synthetic(200, 3, 2, 1, &["kind = \"mts\""]);
    let env = PreparedEnv::prepare(&config.env).unwrap();
    for run in 0..3 {
        let (trace, _) = run_agent(&config, &env, run, 0).unwrap();
        assert!(trace.records.iter().all(|r| r.action == r.optimal_action));
    }
}

#[test]
fn repeated_experiments_are_identical() {
    let config = synthetic(150, 4, 3, 3, &["kind = \"mts\"", "kind = \"umts_pf\"\nparticles = 30", "kind = \"cd_ts\""]);
    assert_eq!(run_experiment(&config).unwrap(), run_experiment(&config).unwrap());
}

#[test]
fn agents_in_a_run_share_the_environment() {
    let config = synthetic(100, 1, 4, 3, &["kind = \"mts\"", "kind = \"ucb1\""]);
    let env = PreparedEnv::prepare(&config.env).unwrap();
    let (a, _) = run_agent(&config, &env, 0, 0).unwrap();
    let (b, _) = run_agent(&config, &env, 0, 1).unwrap();
    let states = |t: &nslb::domain::RunTrace| t.records.iter().map(|r| (r.true_state, r.optimal_mean)).collect::<Vec<_>>();
    assert_eq!(states(&a), states(&b));
}

#[test]
fn one_run_has_zero_standard_error() {
    let r = run_experiment(&synthetic(50, 1, 5, 2, &["kind = \"cd_ucb\""])).unwrap();
    assert!(r.agents[0].stderr.iter().all(|s| *s == 0.0));
    assert_eq!(r.agents[0].final_stderr, 0.0);
}

#[test]
fn aggregate_matches_per_run_traces() {
    let config = synthetic(120, 6, 6, 3, &["kind = \"mts\"", "kind = \"exp3s\""]);
    let result = run_experiment(&config).unwrap();
    let env = PreparedEnv::prepare(&config.env).unwrap();
    for (i, agent) in result.agents.iter().enumerate() {
        let finals: Vec<f64> = (0..config.runs)
            .map(|run| {
                let (t, _) = run_agent(&config, &env, run, i).unwrap();
                t.records.iter().map(|r| r.optimal_mean - r.chosen_mean).sum()
            })
            .collect();
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (finals.len() - 1) as f64;
        assert!((agent.final_mean - mean).abs() < 1e-9);
        assert!((agent.final_stderr - (var / finals.len() as f64).sqrt()).abs() < 1e-9);
    }
}

#[test]
fn quadrupling_runs_halves_the_standard_error() {
    let small = run_experiment(&synthetic(200, 100, 7, 3, &["kind = \"ucb1\""])).unwrap();
    let large = run_experiment(&synthetic(200, 400, 7, 3, &["kind = \"ucb1\""])).unwrap();
    let ratio = large.agents[0].final_stderr / small.agents[0].final_stderr;
    assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn change_detection_beats_plain_ucb_on_piecewise_rewards() {
    // Segments must be longer than the detector window to be detectable.
    let config = with_period(3000, 30, 8, 4, 500, &["kind = \"ucb1\"", "kind = \"cd_ucb\""]);
    let r = run_experiment(&config).unwrap();
    let ucb = r.agent("ucb1").unwrap().final_mean;
    let cd = r.agent("cd_ucb").unwrap().final_mean;
    assert!(cd < ucb, "cd_ucb {cd} vs ucb1 {ucb}");
}

#[test]
fn reward_metric_over_final_window() {
    let mut config = synthetic(100, 3, 9, 2, &["kind = \"oracle\""]);
    config.metric = Metric::PerRoundReward;
    config.summary_window = Some(10);
    let r = run_experiment(&config).unwrap();
    let a = &r.agents[0];
    let window: f64 = a.mean[90..].iter().sum::<f64>() / 10.0;
    assert!((a.final_mean - window).abs() < 1e-12);
}

#[test]
fn contextual_agent_on_multi_armed_env_is_a_config_error() {
    let config = synthetic(10, 1, 1, 2, &["kind = \"cd_linucb\""]);
    let env = PreparedEnv::prepare(&config.env).unwrap();
    assert!(matches!(run_agent(&config, &env, 0, 0), Err(Error::Config(_))));
}

#[test]
fn emitted_files_have_expected_shape_and_round_trip() {
    let config = synthetic(3, 2, 10, 2, &["kind = \"mts\"", "kind = \"ucb1\""]);
    let result = run_experiment(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&result, &config, dir.path()).unwrap();

    let mut reader = csv::Reader::from_path(dir.path().join("curves.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["round", "agent", "mean", "stderr"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let t: usize = row[0].parse().unwrap();
        let agent = result.agent(&row[1]).unwrap();
        assert_eq!(row[2].parse::<f64>().unwrap(), agent.mean[t - 1]);
        assert_eq!(row[3].parse::<f64>().unwrap(), agent.stderr[t - 1]);
    }

    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    let again = tempfile::tempdir().unwrap();
    emit_results(&run_experiment(&config).unwrap(), &config, again.path()).unwrap();
    for f in ["curves.csv", "summary.csv", "config_echo.toml"] {
        assert_eq!(fs::read(dir.path().join(f)).unwrap(), fs::read(again.path().join(f)).unwrap());
    }

    let echo = ExperimentConfig::from_toml(&fs::read_to_string(dir.path().join("config_echo.toml")).unwrap()).unwrap();
    assert_eq!(echo, config);
    assert_eq!(run_experiment(&echo).unwrap(), result);
}

#[test]
fn linear_detector_fires_on_weight_shift_only() {
    let xs: Vec<[f64; 2]> = (0..200).map(|i| [((i * 7) % 11) as f64 / 11.0, ((i * 3) % 5) as f64 / 5.0]).collect();
    let mut det = LinearDetector::new(40, 13.0).unwrap();
    for x in &xs[..100] {
        assert!(!det.observe(x, 2.0 * x[0] - x[1]));
    }
    let fired = xs[100..140].iter().any(|x| det.observe(x, 2.0 * x[0] - x[1] + 3.0));
    assert!(fired);
}

#[test]
fn agents_reject_foreign_arms() {
    let ctx = Context::empty(2);
    let mut agent = nslb::agents::Ucb1::new(2, 0.5).unwrap();
    use nslb::agents::Agent;
    let a = agent.act(&ctx).unwrap();
    assert!(a.0 < 2);
    assert!(agent.update(&ctx, ActionId(1 - a.0), 0.0).is_err());
}
