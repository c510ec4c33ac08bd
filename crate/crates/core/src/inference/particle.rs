//! Particle filter over latent trajectories with unknown rewards and
//! transitions.
//!
//! Each particle carries the last state of its trajectory together with the
//! sufficient statistics of everything observed along it: Dirichlet counts
//! for transitions and conjugate statistics for rewards. Parameters are never
//! stored, only sampled from these posteriors when needed.
//!
//! After each reward a particle draws a transition row `phi` and reward
//! parameters `theta` from its posteriors, extends its trajectory with
//! `B_t ∝ phi(B_{t-1}, s) L(r | s; theta)`, and its weight is multiplied by
//! the predictive likelihood `sum_s phi(B_{t-1}, s) L(r | s; theta)`.

use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::domain::{ActionId, Context, StateId};
use crate::error::{Error, Result};
use crate::inference::conjugate::{ConjugateStats, RewardPrior, StateParams};
use crate::inference::dirichlet::{DirichletCounts, TransitionPrior};
use crate::inference::filter::BeliefVector;
use crate::sampling::{log_sum_exp, sample_categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResampleScheme {
    #[default]
    Multinomial,
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleFilterConfig {
    pub num_particles: usize,
    /// Resample when `ESS < ess_fraction * N`.
    pub ess_fraction: f64,
    pub scheme: ResampleScheme,
}

impl Default for ParticleFilterConfig {
    fn default() -> Self {
        ParticleFilterConfig {
            num_particles: 100,
            ess_fraction: 0.5,
            scheme: ResampleScheme::Multinomial,
        }
    }
}

/// Priors shared by every particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleModel {
    pub reward: RewardPrior,
    pub transition: TransitionPrior,
    /// Distribution of the first latent state.
    pub initial: BeliefVector,
}

impl ParticleModel {
    pub fn new(reward: RewardPrior, transition: TransitionPrior, initial: BeliefVector) -> Result<Self> {
        let n = reward.num_states();
        if transition.num_states() != n || initial.num_states() != n {
            return Err(Error::invalid(
                "reward prior, transition prior and initial belief disagree on |S|",
            ));
        }
        Ok(ParticleModel {
            reward,
            transition,
            initial,
        })
    }

    pub fn num_states(&self) -> usize {
        self.initial.num_states()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// Last state of the trajectory, `None` before any observation.
    pub last_state: Option<StateId>,
    /// State drawn for acting in the current round.
    pub believed_state: Option<StateId>,
    /// Transition posterior; `None` when transitions are known.
    pub counts: Option<DirichletCounts>,
    pub stats: ConjugateStats,
}

impl Particle {
    pub fn from_prior(model: &ParticleModel) -> Self {
        Particle {
            last_state: None,
            believed_state: None,
            counts: match &model.transition {
                TransitionPrior::Known(_) => None,
                TransitionPrior::Dirichlet(d) => Some(d.clone()),
            },
            stats: model.reward.initial_stats(),
        }
    }

    /// Draws the distribution of the next trajectory state.
    pub fn sample_transition_row<R: Rng + ?Sized>(&self, model: &ParticleModel, rng: &mut R) -> Vec<f64> {
        match (self.last_state, &model.transition, &self.counts) {
            (None, _, _) => model.initial.probs().to_vec(),
            (Some(s), TransitionPrior::Known(m), _) => m.row(s).to_vec(),
            (Some(s), TransitionPrior::Dirichlet(_), Some(c)) => c.sample_row(s, rng),
            (Some(_), TransitionPrior::Dirichlet(_), None) => {
                unreachable!("Dirichlet model without counts")
            }
        }
    }

    /// Posterior-mean distribution of the next trajectory state.
    pub fn mean_transition_row(&self, model: &ParticleModel) -> Vec<f64> {
        match (self.last_state, &model.transition, &self.counts) {
            (None, _, _) => model.initial.probs().to_vec(),
            (Some(s), TransitionPrior::Known(m), _) => m.row(s).to_vec(),
            (Some(s), _, Some(c)) => c.mean_row(s),
            (Some(_), _, None) => unreachable!("Dirichlet model without counts"),
        }
    }
}

/// Outcome of [`pf_propose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    /// New trajectory state.
    pub state: StateId,
    /// Log incremental weight.
    pub log_predictive: f64,
}

/// Draws a believed state and its reward parameters for acting, and returns
/// the mean reward of every arm under them.
pub fn pf_draw<R: Rng + ?Sized>(
    model: &ParticleModel,
    particle: &mut Particle,
    ctx: &Context,
    rng: &mut R,
) -> Vec<f64> {
    let row = particle.sample_transition_row(model, rng);
    let b = StateId(sample_categorical(&row, rng));
    particle.believed_state = Some(b);
    match model.reward.sample_state(&particle.stats, b, rng) {
        StateParams::ArmMeans(m) => m,
        StateParams::Weights(w) => (0..ctx.num_arms())
            .map(|a| crate::domain::dot(ctx.row(ActionId(a)), &w))
            .collect(),
    }
}

/// Extends the particle's trajectory with the state that produced `reward`
/// and folds the observation into its statistics.
pub fn pf_propose<R: Rng + ?Sized>(
    model: &ParticleModel,
    particle: &mut Particle,
    action: ActionId,
    ctx: &Context,
    reward: f64,
    rng: &mut R,
) -> Proposal {
    let row = particle.sample_transition_row(model, rng);
    let n = row.len();
    let mut log_joint = vec![f64::NEG_INFINITY; n];
    for (s, p) in row.iter().enumerate() {
        if *p > 0.0 {
            let mean = model
                .reward
                .sample_arm_mean(&particle.stats, StateId(s), action, ctx, rng);
            log_joint[s] = p.ln() + model.reward.log_likelihood_at(mean, reward);
        }
    }
    let log_predictive = log_sum_exp(&log_joint);
    let w: Vec<f64> = log_joint.iter().map(|l| (l - log_predictive).exp()).collect();
    let state = StateId(sample_categorical(&w, rng));
    if let (Some(prev), Some(c)) = (particle.last_state, particle.counts.as_mut()) {
        c.observe(prev, state);
    }
    model
        .reward
        .observe(&mut particle.stats, state, action, ctx, reward);
    particle.last_state = Some(state);
    Proposal {
        state,
        log_predictive,
    }
}

/// `sum_s row[s] L[s]`.
pub fn predictive_likelihood(row: &[f64], likelihoods: &[f64]) -> f64 {
    row.iter().zip(likelihoods).map(|(p, l)| p * l).sum()
}

/// Incremental weight in ratio form, `P(r, B = s) / P(B = s | r)` under the
/// proposal. Algebraically equal to [`predictive_likelihood`] for any `s`
/// with positive joint mass.
pub fn incremental_weight_ratio(row: &[f64], likelihoods: &[f64], s: StateId) -> f64 {
    let joint = row[s.0] * likelihoods[s.0];
    let posterior = joint / predictive_likelihood(row, likelihoods);
    joint / posterior
}

/// Multiplies weights by `exp(log_increments)` and renormalizes, in log
/// space. Returns the normalized weights.
pub fn reweight(log_weights: &mut [f64], log_increments: &[f64]) -> Result<Vec<f64>> {
    for (w, inc) in log_weights.iter_mut().zip(log_increments) {
        *w += inc;
    }
    let z = log_sum_exp(log_weights);
    if !z.is_finite() {
        return Err(Error::Numeric("all particle weights vanished".into()));
    }
    for w in log_weights.iter_mut() {
        *w -= z;
    }
    let mut weights: Vec<f64> = log_weights.iter().map(|w| w.exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// `1 / sum w_i^2` for normalized weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    ess.clamp(1.0, weights.len() as f64)
}

/// Ancestor indices for `n` offspring.
pub fn resample_indices<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    scheme: ResampleScheme,
    rng: &mut R,
) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(0);
    let pick = |u: f64| cdf.partition_point(|c| *c <= u * acc).min(last);
    match scheme {
        ResampleScheme::Multinomial => (0..n).map(|_| pick(rng.random::<f64>())).collect(),
        ResampleScheme::Systematic => {
            let u0: f64 = rng.random();
            (0..n).map(|i| pick((i as f64 + u0) / n as f64)).collect()
        }
    }
}

/// Weighted population of particles for one run.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    model: ParticleModel,
    config: ParticleFilterConfig,
    particles: Vec<Particle>,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    ess: f64,
}

impl ParticleSet {
    pub fn new(model: ParticleModel, config: ParticleFilterConfig) -> Result<Self> {
        let n = config.num_particles;
        if n == 0 {
            return Err(Error::config("particle filter needs at least one particle"));
        }
        if !(0.0..=1.0).contains(&config.ess_fraction) {
            return Err(Error::config("ESS fraction must be in [0, 1]"));
        }
        let particle = Particle::from_prior(&model);
        Ok(ParticleSet {
            particles: vec![particle; n],
            log_weights: vec![-(n as f64).ln(); n],
            weights: vec![1.0 / n as f64; n],
            ess: n as f64,
            model,
            config,
        })
    }

    pub fn model(&self) -> &ParticleModel {
        &self.model
    }

    pub fn config(&self) -> &ParticleFilterConfig {
        &self.config
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Back to the prior with uniform weights.
    pub fn reset(&mut self) {
        let n = self.particles.len();
        let particle = Particle::from_prior(&self.model);
        self.particles = vec![particle; n];
        self.log_weights = vec![-(n as f64).ln(); n];
        self.weights = vec![1.0 / n as f64; n];
        self.ess = n as f64;
    }

    /// Weight-averaged arm means, each particle contributing the means of
    /// its freshly drawn believed state.
    pub fn draw_mean_rewards<R: Rng + ?Sized>(&mut self, ctx: &Context, rng: &mut R) -> Vec<f64> {
        let mut avg = vec![0.0; ctx.num_arms()];
        for (p, w) in self.particles.iter_mut().zip(&self.weights) {
            let means = pf_draw(&self.model, p, ctx, rng);
            for (a, m) in avg.iter_mut().zip(means) {
                *a += w * m;
            }
        }
        avg
    }

    /// Propose, reweight and resample if the ESS dropped too low. Returns
    /// whether resampling happened.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        action: ActionId,
        ctx: &Context,
        reward: f64,
        rng: &mut R,
    ) -> Result<bool> {
        let increments: Vec<f64> = self
            .particles
            .iter_mut()
            .map(|p| pf_propose(&self.model, p, action, ctx, reward, rng).log_predictive)
            .collect();
        self.weights = reweight(&mut self.log_weights, &increments)?;
        self.ess = effective_sample_size(&self.weights);
        Ok(self.resample_if_needed(self.config.ess_fraction, rng))
    }

    /// Resamples with replacement when `ESS < threshold_fraction * N`,
    /// resetting weights to `1/N`.
    pub fn resample_if_needed<R: Rng + ?Sized>(&mut self, threshold_fraction: f64, rng: &mut R) -> bool {
        let n = self.particles.len();
        if self.ess >= threshold_fraction * n as f64 {
            return false;
        }
        let idx = resample_indices(&self.weights, n, self.config.scheme, rng);
        self.particles = idx.into_iter().map(|i| self.particles[i].clone()).collect();
        self.log_weights = vec![-(n as f64).ln(); n];
        self.weights = vec![1.0 / n as f64; n];
        self.ess = n as f64;
        true
    }

    /// Weighted distribution of the latest trajectory state.
    pub fn filtered_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.model.num_states()];
        for (p, w) in self.particles.iter().zip(&self.weights) {
            match p.last_state {
                Some(s) => m[s.0] += w,
                None => {
                    for (x, q) in m.iter_mut().zip(self.model.initial.probs()) {
                        *x += w * q;
                    }
                }
            }
        }
        m
    }

    /// Weighted posterior-predictive distribution of the next state.
    pub fn predictive_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.model.num_states()];
        for (p, w) in self.particles.iter().zip(&self.weights) {
            for (x, q) in m.iter_mut().zip(p.mean_transition_row(&self.model)) {
                *x += w * q;
            }
        }
        m
    }

    /// Debug dump with columns `particle,state,weight`.
    pub fn write_snapshot_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("particle,state,weight\n");
        for (i, (p, w)) in self.particles.iter().zip(&self.weights).enumerate() {
            let state = p.last_state.map(|s| s.0.to_string()).unwrap_or_default();
            out.push_str(&format!("{i},{state},{w}\n"));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    /// Overrides the weights; for tests and diagnostics.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.particles.len() {
            return Err(Error::invalid("one weight per particle"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::invalid("weights must be non-negative with positive sum"));
        }
        self.weights = weights.iter().map(|w| w / total).collect();
        self.log_weights = self.weights.iter().map(|w| w.ln()).collect();
        self.ess = effective_sample_size(&self.weights);
        Ok(())
    }
}
