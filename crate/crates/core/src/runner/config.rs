//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_horizon() -> usize {
    2000
}

fn default_runs() -> usize {
    100
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    CumulativeRegret,
    /// Expected reward of the chosen arm in each round.
    PerRoundReward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub metric: Metric,
    /// Summarize each run by the metric's mean over its last this-many
    /// rounds instead of its final value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub env: EnvSpec,
    pub agents: Vec<AgentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    Synthetic(SyntheticSpec),
    Superuser(SuperuserSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub arms: usize,
    pub states: usize,
    pub sigma: f64,
    pub schedule: ScheduleSpec,
    pub rewards: RewardsSpec,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            arms: 5,
            states: 5,
            sigma: 0.5,
            schedule: ScheduleSpec::FixedPeriod { period: 200 },
            rewards: RewardsSpec::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    FixedPeriod {
        period: usize,
    },
    /// Either a full matrix or a uniform off-diagonal probability.
    Stochastic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        off_diagonal: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<f64>>>,
    },
    /// Rows drawn from a Dirichlet with `self_weight` on the diagonal and
    /// `other_weight` elsewhere.
    Dirichlet {
        self_weight: f64,
        other_weight: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardsSpec {
    Uniform,
    PriorSampled { prior_std: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenreSamplingSpec {
    #[default]
    WithReplacement,
    WithoutReplacement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperuserSpec {
    /// Directory written by `nslb offline build`.
    pub offline_dir: PathBuf,
    /// `movies.dat`, for genres.
    pub movies: PathBuf,
    pub arms_per_round: usize,
    pub reward_variance: f64,
    pub p_change: f64,
    pub genre_sampling: GenreSamplingSpec,
}

impl Default for SuperuserSpec {
    fn default() -> Self {
        SuperuserSpec {
            offline_dir: PathBuf::from("offline"),
            movies: PathBuf::from("movies.dat"),
            arms_per_round: 20,
            reward_variance: 0.25,
            p_change: 0.0025,
            genre_sampling: GenreSamplingSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    /// Label in outputs; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: AgentKind,
}

impl AgentSpec {
    pub fn new(kind: AgentKind) -> Self {
        AgentSpec { name: None, kind }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.key().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentKind {
    Mts {},
    UmtsPf(PfSpec),
    UmtsExact {},
    SwMucb(SwSpec),
    SwUmucb(SwSpec),
    CdUcb(BaseSpec),
    CdTs(BaseSpec),
    CdLinucb(BaseSpec),
    CdLints(BaseSpec),
    Ucb1(BaseSpec),
    GaussianTs(BaseSpec),
    Linucb(BaseSpec),
    Lints(BaseSpec),
    Exp3s(ExpSpec),
    Exp4s(ExpSpec),
    Oracle {},
}

impl AgentKind {
    pub fn key(&self) -> &'static str {
        match self {
            AgentKind::Mts {} => "mts",
            AgentKind::UmtsPf(_) => "umts_pf",
            AgentKind::UmtsExact {} => "umts_exact",
            AgentKind::SwMucb(_) => "sw_mucb",
            AgentKind::SwUmucb(_) => "sw_umucb",
            AgentKind::CdUcb(_) => "cd_ucb",
            AgentKind::CdTs(_) => "cd_ts",
            AgentKind::CdLinucb(_) => "cd_linucb",
            AgentKind::CdLints(_) => "cd_lints",
            AgentKind::Ucb1(_) => "ucb1",
            AgentKind::GaussianTs(_) => "gaussian_ts",
            AgentKind::Linucb(_) => "linucb",
            AgentKind::Lints(_) => "lints",
            AgentKind::Exp3s(_) => "exp3s",
            AgentKind::Exp4s(_) => "exp4s",
            AgentKind::Oracle {} => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleSpec {
    #[default]
    Multinomial,
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfSpec {
    pub particles: usize,
    pub ess_fraction: f64,
    pub resample: ResampleSpec,
}

impl Default for PfSpec {
    fn default() -> Self {
        PfSpec {
            particles: 100,
            ess_fraction: 0.5,
            resample: ResampleSpec::Multinomial,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwSpec {
    /// Window length; otherwise derived from `segments`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Expected number of stationary segments; otherwise estimated from
    /// the transition matrix the agents are given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    pub epsilon: f64,
}

/// Hyperparameters of the stationary baselines and their detectors.
/// Fields a given kind does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaseSpec {
    pub tau: usize,
    /// Detector threshold; the MAB default is `sigma sqrt(tau ln(2 K n^2) / 2)`,
    /// the linear default 13.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// UCB1 bonus scale; defaults to the noise standard deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub prior_mean: f64,
    pub prior_var: f64,
    pub reg: f64,
    /// LinUCB width and LinTS posterior scale; default the noise std.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl Default for BaseSpec {
    fn default() -> Self {
        BaseSpec {
            tau: 100,
            threshold: None,
            scale: None,
            prior_mean: 0.5,
            prior_var: 1.0,
            reg: 1.0,
            width: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Rewards are scaled from this interval to `[0, 1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_range: Option<[f64; 2]>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        // Relative data paths are relative to the config file.
        if let EnvSpec::Superuser(s) = &mut config.env {
            let base = path.parent().unwrap_or(Path::new("."));
            if s.offline_dir.is_relative() {
                s.offline_dir = base.join(&s.offline_dir);
            }
            if s.movies.is_relative() {
                s.movies = base.join(&s.movies);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.runs == 0 {
            return Err(Error::config("horizon and runs must be at least 1"));
        }
        if self.agents.is_empty() {
            return Err(Error::config("no agents configured"));
        }
        if let Some(w) = self.summary_window {
            if w == 0 || w > self.horizon {
                return Err(Error::config("summary window must be in [1, horizon]"));
            }
        }
        let mut labels: Vec<String> = self.agents.iter().map(AgentSpec::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!("agent label {:?} used twice", w[0])));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.agents.iter().map(AgentSpec::label).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"
horizon = 2000
runs = 100
seed = 7

[env]
kind = "synthetic"
arms = 5
states = 5
sigma = 0.5
schedule = { kind = "fixed_period", period = 200 }

[[agents]]
kind = "mts"

[[agents]]
kind = "cd_ucb"
tau = 100

[[agents]]
kind = "umts_pf"
name = "umts"
particles = 50
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(FIG2).unwrap();
        assert_eq!(c.labels(), vec!["mts", "cd_ucb", "umts"]);
        match &c.agents[2].kind {
            AgentKind::UmtsPf(p) => assert_eq!(p.particles, 50),
            k => panic!("unexpected {k:?}"),
        }
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&FIG2.replace("runs = 100", "runs = 0")).is_err());
        assert!(ExperimentConfig::from_toml(&FIG2.replace("\"umts\"", "\"mts\"")).is_err());
        assert!(ExperimentConfig::from_toml(&FIG2.replace("kind = \"mts\"", "kind = \"nope\"")).is_err());
        assert!(ExperimentConfig::from_toml(&FIG2.replace("sigma = 0.5", "sigma = 0.5\ncolour = 1")).is_err());
    }
}
