//! Context-free Gaussian bandit whose arm means depend on a latent state.

use rand::Rng;

use crate::domain::{ActionId, Context, MeanRewardModel, StateId, TransitionMatrix};
use crate::envs::{EnvStreams, Environment, ModelKnowledge};
use crate::error::{Error, Result};
use crate::inference::{BeliefVector, DirichletCounts, RewardPrior, TransitionPrior};
use crate::sampling::standard_normal;

/// How the latent state evolves.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Cycle `s -> s + 1 mod |S|` after every `period` rounds.
    FixedPeriod(usize),
    /// Markov chain with a fixed matrix.
    Stochastic(TransitionMatrix),
    /// Markov chain whose rows are drawn once per run from a Dirichlet
    /// prior, which is also what model-based agents are told.
    DirichletSampled(DirichletCounts),
}

/// Where the true arm means come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardSpec {
    /// `mu(a, s) ~ U(0, 1)`, given to agents exactly.
    Uniform,
    /// Prior means `mu(a, s) ~ U(0, 1)`, true means drawn from
    /// `N(mu(a, s), prior_std^2)`. Agents only see the prior.
    PriorSampled { prior_std: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEnvConfig {
    pub arms: usize,
    pub states: usize,
    pub sigma: f64,
    pub schedule: Schedule,
    pub rewards: RewardSpec,
}

impl SyntheticEnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arms == 0 || self.states == 0 {
            return Err(Error::config("synthetic environment needs arms and states"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::config("reward noise sigma must be positive"));
        }
        match &self.schedule {
            Schedule::FixedPeriod(0) => return Err(Error::config("period must be at least 1")),
            Schedule::Stochastic(m) if m.num_states() != self.states => {
                return Err(Error::config("transition matrix size does not match states"))
            }
            Schedule::DirichletSampled(d) if d.num_states() != self.states => {
                return Err(Error::config("Dirichlet prior size does not match states"))
            }
            _ => {}
        }
        if let RewardSpec::PriorSampled { prior_std } = self.rewards {
            if !(prior_std.is_finite() && prior_std >= 0.0) {
                return Err(Error::config("prior std must be non-negative"));
            }
        }
        Ok(())
    }
}

/// `mu(a, s) ~ U(0, 1)` for every arm and state.
pub fn sample_synthetic_means<R: Rng + ?Sized>(rng: &mut R, arms: usize, states: usize) -> MeanRewardModel {
    let values = (0..arms * states).map(|_| rng.random::<f64>()).collect();
    MeanRewardModel::tabular(arms, states, values).expect("uniform draws are finite")
}

/// State for round `t + 1` given the state in round `t`. Fixed-period
/// schedules advance exactly when `t` is a multiple of the period; the
/// stochastic ones always consume one draw.
pub fn step_latent<R: Rng + ?Sized>(
    current: StateId,
    schedule: &Schedule,
    num_states: usize,
    t: usize,
    rng: &mut R,
) -> StateId {
    match schedule {
        Schedule::FixedPeriod(period) => {
            if t % period == 0 {
                StateId((current.0 + 1) % num_states)
            } else {
                current
            }
        }
        Schedule::Stochastic(m) => m.sample_next(current, rng),
        Schedule::DirichletSampled(_) => {
            panic!("Dirichlet schedules must be realized into a matrix first")
        }
    }
}

/// Gaussian reward around `mu(a, x, s)`.
pub fn emit_reward<R: Rng + ?Sized>(
    model: &MeanRewardModel,
    a: ActionId,
    ctx: &Context,
    s: StateId,
    sigma: f64,
    rng: &mut R,
) -> f64 {
    model.mean(a, ctx, s) + sigma * standard_normal(rng)
}

pub struct SyntheticEnv {
    name: String,
    states: usize,
    sigma: f64,
    schedule: Schedule,
    model: MeanRewardModel,
    knowledge: ModelKnowledge,
    context: Context,
    state: StateId,
    round: usize,
    streams: EnvStreams,
}

impl SyntheticEnv {
    /// Draws a problem instance from the `latent` stream.
    pub fn new(config: &SyntheticEnvConfig, mut streams: EnvStreams) -> Result<Self> {
        config.validate()?;
        let (arms, states) = (config.arms, config.states);
        let rng = &mut streams.latent;
        let base = sample_synthetic_means(rng, arms, states);
        let noise_var = config.sigma * config.sigma;

        let (model, reward_prior) = match config.rewards {
            RewardSpec::Uniform => {
                let prior = RewardPrior::gaussian(&base, 0.0, noise_var)?;
                (base.clone(), prior)
            }
            RewardSpec::PriorSampled { prior_std } => {
                let ctx = Context::empty(arms);
                let mut values = Vec::with_capacity(arms * states);
                for a in 0..arms {
                    for s in 0..states {
                        let mu = base.mean(ActionId(a), &ctx, StateId(s));
                        values.push(mu + prior_std * standard_normal(rng));
                    }
                }
                let prior = RewardPrior::gaussian(&base, prior_std * prior_std, noise_var)?;
                (MeanRewardModel::tabular(arms, states, values)?, prior)
            }
        };

        let (schedule, assumed, transition_prior) = match &config.schedule {
            Schedule::FixedPeriod(period) => {
                // Agents that need a kernel are told changes happen at rate
                // 1/period, spread uniformly over the other states.
                let assumed = if states > 1 {
                    TransitionMatrix::uniform_change(
                        states,
                        (1.0 / *period as f64).min(1.0) / (states as f64 - 1.0),
                    )?
                } else {
                    TransitionMatrix::identity(1)
                };
                (
                    config.schedule.clone(),
                    assumed.clone(),
                    TransitionPrior::Known(assumed),
                )
            }
            Schedule::Stochastic(m) => (
                config.schedule.clone(),
                m.clone(),
                TransitionPrior::Known(m.clone()),
            ),
            Schedule::DirichletSampled(alpha) => {
                let rows = (0..states)
                    .map(|s| alpha.sample_row(StateId(s), rng))
                    .collect();
                let truth = TransitionMatrix::from_weights(rows)?;
                (
                    Schedule::Stochastic(truth),
                    alpha.mean_matrix(),
                    TransitionPrior::Dirichlet(alpha.clone()),
                )
            }
        };

        let initial = BeliefVector::uniform(states);
        let state = initial.sample(rng);
        let knowledge = ModelKnowledge {
            model: match config.rewards {
                RewardSpec::Uniform => model.clone(),
                RewardSpec::PriorSampled { .. } => base,
            },
            transition: assumed,
            reward_prior,
            transition_prior,
            initial,
            noise_std: config.sigma,
        };
        Ok(SyntheticEnv {
            name: "synthetic".into(),
            states,
            sigma: config.sigma,
            schedule,
            model,
            knowledge,
            context: Context::empty(arms),
            state,
            round: 0,
            streams,
        })
    }

    /// True arm means.
    pub fn true_model(&self) -> &MeanRewardModel {
        &self.model
    }

    /// Realized latent schedule.
    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }
}

impl Environment for SyntheticEnv {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_arms(&self) -> usize {
        self.context.num_arms()
    }

    fn num_states(&self) -> usize {
        self.states
    }

    fn context_dim(&self) -> usize {
        0
    }

    fn knowledge(&self) -> &ModelKnowledge {
        &self.knowledge
    }

    fn begin_round(&mut self, t: usize) -> Context {
        assert_eq!(t, self.round + 1, "rounds must be consecutive");
        if t > 1 {
            self.state = step_latent(
                self.state,
                &self.schedule,
                self.states,
                t - 1,
                &mut self.streams.latent,
            );
        }
        self.round = t;
        self.context.clone()
    }

    fn state(&self) -> StateId {
        self.state
    }

    fn mean_reward(&self, a: ActionId) -> f64 {
        self.model.mean(a, &self.context, self.state)
    }

    fn pull(&mut self, a: ActionId) -> f64 {
        emit_reward(
            &self.model,
            a,
            &self.context,
            self.state,
            self.sigma,
            &mut self.streams.reward,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::segment_count;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn streams(seed: u64) -> EnvStreams {
        EnvStreams {
            latent: ChaCha8Rng::seed_from_u64(seed),
            context: ChaCha8Rng::seed_from_u64(seed + 1),
            reward: ChaCha8Rng::seed_from_u64(seed + 2),
        }
    }

    #[test]
    fn means_in_unit_interval_and_deterministic() {
        let a = sample_synthetic_means(&mut ChaCha8Rng::seed_from_u64(4), 5, 5);
        let b = sample_synthetic_means(&mut ChaCha8Rng::seed_from_u64(4), 5, 5);
        assert_eq!(a, b);
        let ctx = Context::empty(5);
        for k in 0..5 {
            for s in 0..5 {
                let m = a.mean(ActionId(k), &ctx, StateId(s));
                assert!((0.0..=1.0).contains(&m));
            }
        }
    }

    #[test]
    fn fixed_period_advances_cyclically() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sched = Schedule::FixedPeriod(200);
        assert_eq!(step_latent(StateId(0), &sched, 5, 200, &mut rng), StateId(1));
        assert_eq!(step_latent(StateId(0), &sched, 5, 199, &mut rng), StateId(0));
        assert_eq!(step_latent(StateId(4), &sched, 5, 400, &mut rng), StateId(0));
    }

    #[test]
    fn absorbing_row_never_moves() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sched = Schedule::Stochastic(TransitionMatrix::identity(3));
        for t in 1..100 {
            assert_eq!(step_latent(StateId(2), &sched, 3, t, &mut rng), StateId(2));
        }
    }

    #[test]
    fn fixed_period_segment_count() {
        let config = SyntheticEnvConfig {
            arms: 5,
            states: 5,
            sigma: 0.5,
            schedule: Schedule::FixedPeriod(200),
            rewards: RewardSpec::Uniform,
        };
        let mut env = SyntheticEnv::new(&config, streams(1)).unwrap();
        let mut states = Vec::new();
        for t in 1..=2000 {
            env.begin_round(t);
            states.push(env.state());
        }
        assert_eq!(segment_count(&states), 10);
    }

    #[test]
    fn noiseless_limit() {
        let m = MeanRewardModel::tabular(1, 1, vec![0.3]).unwrap();
        let r = emit_reward(
            &m,
            ActionId(0),
            &Context::empty(1),
            StateId(0),
            0.0,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert_eq!(r, 0.3);
    }

    #[test]
    fn linear_reward_mean() {
        let m = MeanRewardModel::linear(vec![vec![1.0, 0.0]]).unwrap();
        let ctx = Context::from_rows(&[vec![0.7, 0.3]]).unwrap();
        assert_eq!(m.mean(ActionId(0), &ctx, StateId(0)), 0.7);
    }

    #[test]
    fn prior_sampled_knowledge_is_prior_mean() {
        let config = SyntheticEnvConfig {
            arms: 3,
            states: 2,
            sigma: 0.5,
            schedule: Schedule::DirichletSampled(DirichletCounts::sticky(2, 796.0, 1.0).unwrap()),
            rewards: RewardSpec::PriorSampled { prior_std: 0.2 },
        };
        let env = SyntheticEnv::new(&config, streams(9)).unwrap();
        assert_ne!(&env.knowledge().model, env.true_model());
        assert_eq!(env.knowledge().model, env.knowledge().reward_prior.mean_model());
        assert!(matches!(env.knowledge().transition_prior, TransitionPrior::Dirichlet(_)));
        assert!(matches!(env.schedule(), Schedule::Stochastic(_)));
    }
}
