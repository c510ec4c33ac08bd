//! Environments: latent state dynamics, contexts and rewards.

pub mod superuser;
pub mod synthetic;

use rand_chacha::ChaCha8Rng;

use crate::domain::{ActionId, Context, MeanRewardModel, StateId, TransitionMatrix};
use crate::inference::{BeliefVector, RewardPrior, TransitionPrior};

pub use superuser::{
    build_superuser_transition, sample_movie_context, GenreSampling, MovieCatalog, SuperuserEnv,
    SuperuserEnvConfig,
};
pub use synthetic::{
    emit_reward, sample_synthetic_means, step_latent, RewardSpec, Schedule, SyntheticEnv,
    SyntheticEnvConfig,
};

/// Independent random streams for one run. Splitting them means the
/// latent path, contexts and reward noise do not depend on which arms an
/// agent pulls.
#[derive(Debug, Clone)]
pub struct EnvStreams {
    /// Problem instance and latent transitions.
    pub latent: ChaCha8Rng,
    pub context: ChaCha8Rng,
    pub reward: ChaCha8Rng,
}

/// What model-based agents are told about an environment.
#[derive(Debug, Clone)]
pub struct ModelKnowledge {
    /// Point model handed to agents that treat it as exact: the true model
    /// when it is known, otherwise the prior mean.
    pub model: MeanRewardModel,
    /// Transition matrix handed to agents that treat it as exact.
    pub transition: TransitionMatrix,
    pub reward_prior: RewardPrior,
    pub transition_prior: TransitionPrior,
    /// Distribution of the first latent state.
    pub initial: BeliefVector,
    pub noise_std: f64,
}

/// One simulated bandit problem. Rounds are numbered from 1.
pub trait Environment: Send {
    fn name(&self) -> &str;
    fn num_arms(&self) -> usize;
    fn num_states(&self) -> usize;
    /// Feature dimension; 0 for context-free problems.
    fn context_dim(&self) -> usize;
    fn knowledge(&self) -> &ModelKnowledge;
    /// Moves the latent state to round `t` and draws its context.
    fn begin_round(&mut self, t: usize) -> Context;
    fn state(&self) -> StateId;
    /// True mean reward of `a` in the current round.
    fn mean_reward(&self, a: ActionId) -> f64;
    /// Draws the reward of `a` in the current round. Reward noise is drawn
    /// the same way whichever arm is pulled.
    fn pull(&mut self, a: ActionId) -> f64;
}
