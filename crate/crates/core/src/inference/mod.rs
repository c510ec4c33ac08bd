//! Posterior inference over latent states, transitions and reward models.

pub mod conjugate;
pub mod dirichlet;
pub mod exact;
pub mod filter;
pub mod particle;

pub use conjugate::{conjugate_posterior_sample, ConjugateStats, RewardPrior, StateParams, StatePosterior};
pub use dirichlet::{DirichletCounts, TransitionPrior};
pub use exact::{exact_filtered_posterior, exact_joint_posterior, ExactProblem, GridPrior, HistoryStep, JointPosterior};
pub use filter::{filter_update, filter_update_log, BeliefVector, FilterStep};
pub use particle::{
    effective_sample_size, pf_draw, pf_propose, reweight, Particle, ParticleFilterConfig, ParticleModel,
    ParticleSet, Proposal, ResampleScheme,
};
