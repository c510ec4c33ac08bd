//! Turning config specs into environments and agents.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    cd_threshold, default_exp3s_params, optimal_window, Agent, CdAgent, ChangeDetector, Exp3S, Exp4S,
    GaussianTs, LinTs, LinUcb, LinearDetector, MabDetector, Mts, Oracle, SwUcb, Ucb1, UmtsExact, UmtsPf,
};
use crate::agents::exp3s::ExpParams;
use crate::domain::{MeanRewardModel, StateId, TransitionMatrix};
use crate::envs::{
    build_superuser_transition, EnvStreams, Environment, GenreSampling, ModelKnowledge, MovieCatalog,
    RewardSpec, Schedule, SuperuserEnv, SuperuserEnvConfig, SyntheticEnv, SyntheticEnvConfig,
};
use crate::error::{Error, Result};
use crate::inference::{
    BeliefVector, DirichletCounts, ExactProblem, GridPrior, ParticleFilterConfig, ParticleModel,
    ResampleScheme, RewardPrior, TransitionPrior,
};
use crate::offline::{load_movies, OfflineModel};
use crate::runner::config::{
    AgentKind, AgentSpec, BaseSpec, EnvSpec, ExpSpec, GenreSamplingSpec, ResampleSpec, RewardsSpec,
    ScheduleSpec, SuperuserSpec, SwSpec, SyntheticSpec,
};

/// Linear detector threshold when none is configured.
pub const DEFAULT_LINEAR_THRESHOLD: f64 = 13.0;

/// An environment spec with its data loaded, ready to instantiate per run.
#[derive(Debug, Clone)]
pub enum PreparedEnv {
    Synthetic(SyntheticEnvConfig),
    Superuser(Arc<SuperuserData>),
}

#[derive(Debug)]
pub struct SuperuserData {
    pub spec: SuperuserSpec,
    pub offline: OfflineModel,
    pub catalog: Arc<MovieCatalog>,
    /// Users of each training cluster.
    pub members: Vec<Vec<usize>>,
}

fn synthetic_config(s: &SyntheticSpec) -> Result<SyntheticEnvConfig> {
    let schedule = match &s.schedule {
        ScheduleSpec::FixedPeriod { period } => Schedule::FixedPeriod(*period),
        ScheduleSpec::Stochastic { off_diagonal, matrix } => match (off_diagonal, matrix) {
            (Some(p), None) => Schedule::Stochastic(TransitionMatrix::uniform_change(s.states, *p)?),
            (None, Some(m)) => Schedule::Stochastic(TransitionMatrix::new(m.clone())?),
            _ => return Err(Error::config("stochastic schedule needs exactly one of off_diagonal, matrix")),
        },
        ScheduleSpec::Dirichlet {
            self_weight,
            other_weight,
        } => Schedule::DirichletSampled(DirichletCounts::sticky(s.states, *self_weight, *other_weight)?),
    };
    let rewards = match s.rewards {
        RewardsSpec::Uniform => RewardSpec::Uniform,
        RewardsSpec::PriorSampled { prior_std } => RewardSpec::PriorSampled { prior_std },
    };
    let config = SyntheticEnvConfig {
        arms: s.arms,
        states: s.states,
        sigma: s.sigma,
        schedule,
        rewards,
    };
    config.validate()?;
    Ok(config)
}

fn superuser_data(spec: &SuperuserSpec) -> Result<SuperuserData> {
    let offline = OfflineModel::read(&spec.offline_dir)?;
    let genres = load_movies(&spec.movies)?;
    let mut genre_index: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<&str> = genres.values().flatten().map(String::as_str).collect();
    names.sort_unstable();
    names.dedup();
    for (i, g) in names.iter().enumerate() {
        genre_index.insert(g, i);
    }
    let movie_genres = offline
        .movie_ids
        .iter()
        .map(|m| {
            genres
                .get(m)
                .map(|gs| gs.iter().map(|g| genre_index[g.as_str()]).collect())
                .ok_or_else(|| Error::config(format!("movie {m} missing from {}", spec.movies.display())))
        })
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let catalog = MovieCatalog::new(offline.train.v.clone(), offline.test.v.clone(), &movie_genres)?;
    let k = offline.prior.means.len();
    let mut members = vec![Vec::new(); k];
    for (u, &c) in offline.clusters.iter().enumerate() {
        if c >= k {
            return Err(Error::config(format!("cluster {c} has no prior")));
        }
        members[c].push(u);
    }
    if members.iter().any(Vec::is_empty) {
        return Err(Error::config("every cluster needs at least one user"));
    }
    Ok(SuperuserData {
        spec: spec.clone(),
        offline,
        catalog: Arc::new(catalog),
        members,
    })
}

impl PreparedEnv {
    pub fn prepare(spec: &EnvSpec) -> Result<Self> {
        match spec {
            EnvSpec::Synthetic(s) => Ok(PreparedEnv::Synthetic(synthetic_config(s)?)),
            EnvSpec::Superuser(s) => Ok(PreparedEnv::Superuser(Arc::new(superuser_data(s)?))),
        }
    }

    /// A fresh environment for one run. Identical streams give identical
    /// problem instances and noise.
    pub fn instantiate(&self, mut streams: EnvStreams) -> Result<Box<dyn Environment>> {
        match self {
            PreparedEnv::Synthetic(c) => Ok(Box::new(SyntheticEnv::new(c, streams)?)),
            PreparedEnv::Superuser(d) => {
                // One user per training cluster; state s behaves like user i_s
                // on the test factors.
                let users: Vec<usize> = d
                    .members
                    .iter()
                    .map(|m| m[streams.latent.random_range(0..m.len())])
                    .collect();
                let vectors: Vec<Vec<f64>> = users.iter().map(|&u| d.offline.test.u[u].clone()).collect();
                let prior = &d.offline.prior;
                let noise_var = d.spec.reward_variance;
                let reward_prior = RewardPrior::linear_gaussian(prior.means.clone(), prior.covariances.clone(), noise_var)?;
                let knowledge = ModelKnowledge {
                    model: MeanRewardModel::linear(prior.means.clone())?,
                    transition: TransitionMatrix::new(prior.transition.clone())?,
                    reward_prior,
                    transition_prior: TransitionPrior::Dirichlet(DirichletCounts::new(prior.alpha.clone())?),
                    initial: BeliefVector::uniform(vectors.len()),
                    noise_std: noise_var.sqrt(),
                };
                let config = SuperuserEnvConfig {
                    transition: build_superuser_transition(&vectors, d.spec.p_change)?,
                    state_user_vectors: vectors,
                    catalog: Arc::clone(&d.catalog),
                    arms_per_round: d.spec.arms_per_round,
                    reward_variance: noise_var,
                    genre_sampling: match d.spec.genre_sampling {
                        GenreSamplingSpec::WithReplacement => GenreSampling::WithReplacement,
                        GenreSamplingSpec::WithoutReplacement => GenreSampling::WithoutReplacement,
                    },
                };
                Ok(Box::new(SuperuserEnv::new(config, knowledge, streams)?))
            }
        }
    }
}

/// Expected number of stationary segments over `horizon` rounds when the
/// chain runs from its stationary distribution.
fn expected_segments(transition: &TransitionMatrix, horizon: usize) -> usize {
    let pi = transition.stationary_distribution();
    let change: f64 = pi
        .iter()
        .enumerate()
        .map(|(s, p)| p * (1.0 - transition.prob(StateId(s), StateId(s))))
        .sum();
    (1.0 + change * (horizon.saturating_sub(1)) as f64).round().max(1.0) as usize
}

/// Rough reward interval for scaling adversarial baselines: model means
/// widened by two noise standard deviations.
fn default_reward_range(k: &ModelKnowledge) -> (f64, f64) {
    let pad = 2.0 * k.noise_std;
    match k.model.num_arms() {
        Some(arms) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in 0..k.model.num_states() {
                for a in 0..arms {
                    let v = k
                        .model
                        .table_value(crate::domain::ActionId(a), StateId(s))
                        .expect("tabular model");
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            (lo - pad, hi + pad)
        }
        // Ratings live on a 1 to 5 scale.
        None => (1.0 - pad, 5.0 + pad),
    }
}

fn exp_params(spec: &ExpSpec, k: &ModelKnowledge, experts: usize, horizon: usize) -> ExpParams {
    let (g, a) = default_exp3s_params(experts, horizon);
    let range = spec.reward_range.map_or_else(|| default_reward_range(k), |r| (r[0], r[1]));
    ExpParams {
        gamma: spec.gamma.unwrap_or(g),
        alpha: spec.alpha.unwrap_or(a),
        reward_range: range,
    }
}

fn require_context_free(env: &dyn Environment, key: &str) -> Result<()> {
    if env.context_dim() > 0 {
        return Err(Error::config(format!("{key} needs a context-free environment")));
    }
    Ok(())
}

fn require_contextual(env: &dyn Environment, key: &str) -> Result<()> {
    if env.context_dim() == 0 {
        return Err(Error::config(format!("{key} needs a contextual environment")));
    }
    Ok(())
}

fn mab_detector(b: &BaseSpec, env: &dyn Environment, horizon: usize) -> Result<ChangeDetector> {
    let k = env.knowledge();
    let threshold = b
        .threshold
        .unwrap_or_else(|| cd_threshold(k.noise_std, b.tau, env.num_arms(), horizon));
    Ok(ChangeDetector::Mab(MabDetector::new(env.num_arms(), b.tau, threshold)?))
}

fn linear_detector(b: &BaseSpec) -> Result<ChangeDetector> {
    Ok(ChangeDetector::Linear(LinearDetector::new(
        b.tau,
        b.threshold.unwrap_or(DEFAULT_LINEAR_THRESHOLD),
    )?))
}

fn sw_agent(spec: &SwSpec, env: &dyn Environment, horizon: usize, uncertain: bool) -> Result<SwUcb> {
    let k = env.knowledge();
    let window = match spec.window {
        Some(w) => w,
        None => {
            let l = spec.segments.unwrap_or_else(|| expected_segments(&k.transition, horizon));
            optimal_window(horizon, env.num_states(), k.noise_std, l)
        }
    };
    if uncertain {
        SwUcb::uncertain(k.model.clone(), k.noise_std, spec.epsilon, window, horizon)
    } else {
        if spec.epsilon != 0.0 {
            return Err(Error::config("sw_mucb takes no epsilon; use sw_umucb"));
        }
        SwUcb::known(k.model.clone(), k.noise_std, window, horizon)
    }
}

/// Builds the agent for `spec` against `env`'s published knowledge.
pub fn build_agent(spec: &AgentSpec, env: &dyn Environment, horizon: usize, rng: ChaCha8Rng) -> Result<Box<dyn Agent>> {
    let k = env.knowledge();
    let key = spec.kind.key();
    let label = spec.label();
    let sigma = k.noise_std;
    let arms = env.num_arms();
    let agent: Box<dyn Agent> = match &spec.kind {
        AgentKind::Mts {} => Box::new(Mts::new(
            k.model.clone(),
            k.transition.clone(),
            sigma,
            k.initial.clone(),
            rng,
        )?),
        AgentKind::UmtsPf(p) => {
            let model = ParticleModel::new(k.reward_prior.clone(), k.transition_prior.clone(), k.initial.clone())?;
            let config = ParticleFilterConfig {
                num_particles: p.particles,
                ess_fraction: p.ess_fraction,
                scheme: match p.resample {
                    ResampleSpec::Multinomial => ResampleScheme::Multinomial,
                    ResampleSpec::Systematic => ResampleScheme::Systematic,
                },
            };
            Box::new(UmtsPf::new(model, config, rng)?)
        }
        AgentKind::UmtsExact {} => {
            let noise_var = sigma * sigma;
            let grid = match &k.reward_prior {
                RewardPrior::Categorical(_) => GridPrior::from_categorical(&k.reward_prior)?,
                p if p.is_point_mass() => GridPrior::point(k.model.clone(), noise_var)?,
                _ => return Err(Error::config("umts_exact needs a known or categorical reward prior")),
            };
            let problem = ExactProblem {
                grid,
                transition: k.transition_prior.clone(),
                initial: k.initial.clone(),
            };
            Box::new(UmtsExact::new(problem, rng))
        }
        AgentKind::SwMucb(s) => Box::new(sw_agent(s, env, horizon, false)?),
        AgentKind::SwUmucb(s) => Box::new(sw_agent(s, env, horizon, true)?),
        AgentKind::CdUcb(b) => {
            require_context_free(env, key)?;
            let base = Ucb1::new(arms, b.scale.unwrap_or(sigma))?;
            Box::new(CdAgent::new(label, Box::new(base), mab_detector(b, env, horizon)?))
        }
        AgentKind::CdTs(b) => {
            require_context_free(env, key)?;
            let base = GaussianTs::new(arms, b.prior_mean, b.prior_var, sigma * sigma, rng)?;
            Box::new(CdAgent::new(label, Box::new(base), mab_detector(b, env, horizon)?))
        }
        AgentKind::CdLinucb(b) => {
            require_contextual(env, key)?;
            let base = LinUcb::new(env.context_dim(), b.reg, b.width.unwrap_or(sigma))?;
            Box::new(CdAgent::new(label, Box::new(base), linear_detector(b)?))
        }
        AgentKind::CdLints(b) => {
            require_contextual(env, key)?;
            let base = LinTs::new(env.context_dim(), b.reg, b.width.unwrap_or(sigma), rng)?;
            Box::new(CdAgent::new(label, Box::new(base), linear_detector(b)?))
        }
        AgentKind::Ucb1(b) => {
            require_context_free(env, key)?;
            Box::new(Ucb1::new(arms, b.scale.unwrap_or(sigma))?)
        }
        AgentKind::GaussianTs(b) => {
            require_context_free(env, key)?;
            Box::new(GaussianTs::new(arms, b.prior_mean, b.prior_var, sigma * sigma, rng)?)
        }
        AgentKind::Linucb(b) => {
            require_contextual(env, key)?;
            Box::new(LinUcb::new(env.context_dim(), b.reg, b.width.unwrap_or(sigma))?)
        }
        AgentKind::Lints(b) => {
            require_contextual(env, key)?;
            Box::new(LinTs::new(env.context_dim(), b.reg, b.width.unwrap_or(sigma), rng)?)
        }
        AgentKind::Exp3s(e) => {
            let params = exp_params(e, k, env.num_states(), horizon);
            Box::new(Exp3S::new(k.model.clone(), params, rng)?)
        }
        AgentKind::Exp4s(e) => {
            let params = exp_params(e, k, env.num_states(), horizon);
            Box::new(Exp4S::new(k.model.clone(), params, rng)?)
        }
        AgentKind::Oracle {} => Box::new(Oracle::new()),
    };
    Ok(agent)
}
