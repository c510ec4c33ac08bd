//! Conjugate reward posteriors, one independent posterior per latent state.
//!
//! Every family keeps the prior parameters in a [`RewardPrior`] and the data
//! seen under each latent state in a [`ConjugateStats`] accumulator, so that
//! particles only carry the (small) sufficient statistics:
//!
//! * `Gaussian`: independent `N(mu0(a, s), sigma0^2)` prior per arm and state,
//!   Gaussian rewards with known variance. Statistics are per-arm reward sums
//!   and counts.
//! * `BetaBernoulli`: `Beta(a0, b0)` prior per arm and state, Bernoulli rewards.
//! * `LinearGaussian`: `N(m_s, S_s)` prior over a per-state weight vector,
//!   rewards `N(x_a . w_s, sigma^2)`. Statistics are the posterior mean and
//!   covariance, kept current with rank-one updates.
//! * `Categorical`: finite set of candidate arm-mean vectors per state with
//!   prior weights, Gaussian rewards. Statistics are per-candidate
//!   log posteriors.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::domain::{ActionId, Context, MeanRewardModel, StateId};
use crate::error::{Error, Result};
use crate::sampling::{
    gaussian_log_pdf, log_sum_exp, sample_beta, sample_categorical, standard_normal,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrior {
    arms: usize,
    states: usize,
    prior_means: Vec<f64>,
    prior_var: f64,
    noise_var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaPrior {
    arms: usize,
    states: usize,
    a0: f64,
    b0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianPrior {
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
    noise_var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalPrior {
    arms: usize,
    /// `cells[s][g][a]`
    cells: Vec<Vec<Vec<f64>>>,
    /// `log_prior[s][g]`, normalized per state.
    log_prior: Vec<Vec<f64>>,
    noise_var: f64,
}

impl CategoricalPrior {
    /// `cells()[s][g][a]`
    pub fn cells(&self) -> &[Vec<Vec<f64>>] {
        &self.cells
    }

    /// Normalized log prior weights, `log_prior()[s][g]`.
    pub fn log_prior(&self) -> &[Vec<f64>] {
        &self.log_prior
    }

    pub fn noise_var_value(&self) -> f64 {
        self.noise_var
    }
}

/// Prior over reward parameters, factored over latent states.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardPrior {
    Gaussian(GaussianPrior),
    BetaBernoulli(BetaPrior),
    LinearGaussian(LinearGaussianPrior),
    Categorical(CategoricalPrior),
}

/// Per-state sufficient statistics for one particle or learner.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjugateStats {
    /// Indexed `a * states + s`.
    Gaussian { sums: Vec<f64>, counts: Vec<f64> },
    /// Indexed `a * states + s`.
    BetaBernoulli {
        successes: Vec<f64>,
        failures: Vec<f64>,
    },
    LinearGaussian {
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
    },
    Categorical { log_post: Vec<Vec<f64>> },
}

/// Closed-form posterior of one state's parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum StatePosterior {
    Gaussian { means: Vec<f64>, variances: Vec<f64> },
    Beta { alpha: Vec<f64>, beta: Vec<f64> },
    Linear {
        mean: DVector<f64>,
        covariance: DMatrix<f64>,
    },
    Categorical { probs: Vec<f64> },
}

/// One state's sampled parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum StateParams {
    /// Mean reward of every arm.
    ArmMeans(Vec<f64>),
    /// Linear weight vector.
    Weights(Vec<f64>),
}

fn check_var(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

impl RewardPrior {
    /// Independent Gaussian prior centred on a tabular model. A prior
    /// variance of zero makes the prior a point mass on `prior_means`.
    pub fn gaussian(prior_means: &MeanRewardModel, prior_var: f64, noise_var: f64) -> Result<Self> {
        check_var("prior variance", prior_var, true)?;
        check_var("noise variance", noise_var, false)?;
        let arms = prior_means
            .num_arms()
            .ok_or_else(|| Error::invalid("Gaussian reward prior needs a tabular model"))?;
        let states = prior_means.num_states();
        let ctx = Context::empty(arms);
        let mut means = Vec::with_capacity(arms * states);
        for a in 0..arms {
            for s in 0..states {
                means.push(prior_means.mean(ActionId(a), &ctx, StateId(s)));
            }
        }
        Ok(RewardPrior::Gaussian(GaussianPrior {
            arms,
            states,
            prior_means: means,
            prior_var,
            noise_var,
        }))
    }

    pub fn beta_bernoulli(arms: usize, states: usize, a0: f64, b0: f64) -> Result<Self> {
        check_var("beta a0", a0, false)?;
        check_var("beta b0", b0, false)?;
        if arms == 0 || states == 0 {
            return Err(Error::invalid("beta prior needs arms and states"));
        }
        Ok(RewardPrior::BetaBernoulli(BetaPrior {
            arms,
            states,
            a0,
            b0,
        }))
    }

    /// Per-state Gaussian prior over linear weights.
    pub fn linear_gaussian(
        means: Vec<Vec<f64>>,
        covariances: Vec<Vec<Vec<f64>>>,
        noise_var: f64,
    ) -> Result<Self> {
        check_var("noise variance", noise_var, false)?;
        if means.is_empty() || means.len() != covariances.len() {
            return Err(Error::invalid("need one mean and covariance per state"));
        }
        let d = means[0].len();
        let mut out = LinearGaussianPrior {
            means: Vec::new(),
            covariances: Vec::new(),
            noise_var,
        };
        for (s, (m, c)) in means.into_iter().zip(covariances).enumerate() {
            if m.len() != d || c.len() != d || c.iter().any(|r| r.len() != d) {
                return Err(Error::invalid(format!("state {s}: prior has wrong dimension")));
            }
            let mean = DVector::from_vec(m);
            let cov = DMatrix::from_row_slice(d, d, &c.concat());
            if cov.clone().cholesky().is_none() {
                return Err(Error::invalid(format!(
                    "state {s}: prior covariance is not positive definite"
                )));
            }
            out.means.push(mean);
            out.covariances.push(cov);
        }
        Ok(RewardPrior::LinearGaussian(out))
    }

    /// `cells[s]` lists candidate arm-mean vectors for state `s`, with
    /// unnormalized prior weights `weights[s]`.
    pub fn categorical(
        cells: Vec<Vec<Vec<f64>>>,
        weights: Vec<Vec<f64>>,
        noise_var: f64,
    ) -> Result<Self> {
        check_var("noise variance", noise_var, false)?;
        if cells.is_empty() || cells.len() != weights.len() {
            return Err(Error::invalid("need candidate cells and weights per state"));
        }
        let arms = cells[0].first().map_or(0, Vec::len);
        if arms == 0 {
            return Err(Error::invalid("candidate cells need at least one arm"));
        }
        let mut log_prior = Vec::with_capacity(cells.len());
        for (s, (c, w)) in cells.iter().zip(&weights).enumerate() {
            if c.is_empty() || c.len() != w.len() || c.iter().any(|v| v.len() != arms) {
                return Err(Error::invalid(format!("state {s}: malformed candidate cells")));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::invalid(format!("state {s}: weights must be positive")));
            }
            let total: f64 = w.iter().sum();
            log_prior.push(w.iter().map(|x| (x / total).ln()).collect());
        }
        Ok(RewardPrior::Categorical(CategoricalPrior {
            arms,
            cells,
            log_prior,
            noise_var,
        }))
    }

    pub fn num_states(&self) -> usize {
        match self {
            RewardPrior::Gaussian(p) => p.states,
            RewardPrior::BetaBernoulli(p) => p.states,
            RewardPrior::LinearGaussian(p) => p.means.len(),
            RewardPrior::Categorical(p) => p.cells.len(),
        }
    }

    /// True for a Gaussian prior with zero variance, i.e. a known model.
    pub fn is_point_mass(&self) -> bool {
        matches!(self, RewardPrior::Gaussian(p) if p.prior_var == 0.0)
    }

    /// Reward noise variance implied by the likelihood (Bernoulli: `None`).
    pub fn noise_var(&self) -> Option<f64> {
        match self {
            RewardPrior::Gaussian(p) => Some(p.noise_var),
            RewardPrior::BetaBernoulli(_) => None,
            RewardPrior::LinearGaussian(p) => Some(p.noise_var),
            RewardPrior::Categorical(p) => Some(p.noise_var),
        }
    }

    /// Statistics before any observation.
    pub fn initial_stats(&self) -> ConjugateStats {
        match self {
            RewardPrior::Gaussian(p) => ConjugateStats::Gaussian {
                sums: vec![0.0; p.arms * p.states],
                counts: vec![0.0; p.arms * p.states],
            },
            RewardPrior::BetaBernoulli(p) => ConjugateStats::BetaBernoulli {
                successes: vec![0.0; p.arms * p.states],
                failures: vec![0.0; p.arms * p.states],
            },
            RewardPrior::LinearGaussian(p) => ConjugateStats::LinearGaussian {
                means: p.means.clone(),
                covariances: p.covariances.clone(),
            },
            RewardPrior::Categorical(p) => ConjugateStats::Categorical {
                log_post: p.log_prior.clone(),
            },
        }
    }

    /// Prior-mean model `mu_bar(a, x, s)`.
    pub fn mean_model(&self) -> MeanRewardModel {
        match self {
            RewardPrior::Gaussian(p) => {
                MeanRewardModel::tabular(p.arms, p.states, p.prior_means.clone())
            }
            RewardPrior::BetaBernoulli(p) => MeanRewardModel::tabular(
                p.arms,
                p.states,
                vec![p.a0 / (p.a0 + p.b0); p.arms * p.states],
            ),
            RewardPrior::LinearGaussian(p) => {
                MeanRewardModel::linear(p.means.iter().map(|m| m.as_slice().to_vec()).collect())
            }
            RewardPrior::Categorical(p) => {
                let states = p.cells.len();
                let mut values = vec![0.0; p.arms * states];
                for (s, (cells, lp)) in p.cells.iter().zip(&p.log_prior).enumerate() {
                    for (cell, l) in cells.iter().zip(lp) {
                        for (a, m) in cell.iter().enumerate() {
                            values[a * states + s] += l.exp() * m;
                        }
                    }
                }
                MeanRewardModel::tabular(p.arms, states, values)
            }
        }
        .expect("prior parameters were validated")
    }

    /// Folds one reward observed under latent state `s` into `stats`.
    pub fn observe(
        &self,
        stats: &mut ConjugateStats,
        s: StateId,
        a: ActionId,
        ctx: &Context,
        reward: f64,
    ) {
        match (self, stats) {
            (RewardPrior::Gaussian(p), ConjugateStats::Gaussian { sums, counts }) => {
                let i = a.0 * p.states + s.0;
                sums[i] += reward;
                counts[i] += 1.0;
            }
            (
                RewardPrior::BetaBernoulli(p),
                ConjugateStats::BetaBernoulli {
                    successes,
                    failures,
                },
            ) => {
                let i = a.0 * p.states + s.0;
                successes[i] += reward;
                failures[i] += 1.0 - reward;
            }
            (
                RewardPrior::LinearGaussian(p),
                ConjugateStats::LinearGaussian {
                    means,
                    covariances,
                },
            ) => {
                let x = DVector::from_column_slice(ctx.row(a));
                let cov = &mut covariances[s.0];
                let cx = &*cov * &x;
                let denom = p.noise_var + x.dot(&cx);
                let resid = reward - x.dot(&means[s.0]);
                means[s.0].axpy(resid / denom, &cx, 1.0);
                cov.ger(-1.0 / denom, &cx, &cx, 1.0);
                symmetrize(cov);
            }
            (RewardPrior::Categorical(p), ConjugateStats::Categorical { log_post }) => {
                for (lp, cell) in log_post[s.0].iter_mut().zip(&p.cells[s.0]) {
                    *lp += gaussian_log_pdf(reward, cell[a.0], p.noise_var);
                }
            }
            _ => panic!("conjugate statistics do not match the prior family"),
        }
    }

    /// Closed-form posterior of state `s`.
    pub fn posterior(&self, stats: &ConjugateStats, s: StateId) -> StatePosterior {
        match (self, stats) {
            (RewardPrior::Gaussian(p), ConjugateStats::Gaussian { sums, counts }) => {
                let mut means = Vec::with_capacity(p.arms);
                let mut variances = Vec::with_capacity(p.arms);
                for a in 0..p.arms {
                    let i = a * p.states + s.0;
                    let (m, v) = gaussian_posterior(
                        p.prior_means[i],
                        p.prior_var,
                        p.noise_var,
                        sums[i],
                        counts[i],
                    );
                    means.push(m);
                    variances.push(v);
                }
                StatePosterior::Gaussian { means, variances }
            }
            (
                RewardPrior::BetaBernoulli(p),
                ConjugateStats::BetaBernoulli {
                    successes,
                    failures,
                },
            ) => StatePosterior::Beta {
                alpha: (0..p.arms)
                    .map(|a| p.a0 + successes[a * p.states + s.0])
                    .collect(),
                beta: (0..p.arms)
                    .map(|a| p.b0 + failures[a * p.states + s.0])
                    .collect(),
            },
            (
                RewardPrior::LinearGaussian(_),
                ConjugateStats::LinearGaussian {
                    means,
                    covariances,
                },
            ) => StatePosterior::Linear {
                mean: means[s.0].clone(),
                covariance: covariances[s.0].clone(),
            },
            (RewardPrior::Categorical(_), ConjugateStats::Categorical { log_post }) => {
                let z = log_sum_exp(&log_post[s.0]);
                StatePosterior::Categorical {
                    probs: log_post[s.0].iter().map(|l| (l - z).exp()).collect(),
                }
            }
            _ => panic!("conjugate statistics do not match the prior family"),
        }
    }

    /// Draws the parameters of state `s` from its posterior.
    pub fn sample_state<R: Rng + ?Sized>(
        &self,
        stats: &ConjugateStats,
        s: StateId,
        rng: &mut R,
    ) -> StateParams {
        match (self, stats) {
            (
                RewardPrior::LinearGaussian(_),
                ConjugateStats::LinearGaussian {
                    means,
                    covariances,
                },
            ) => StateParams::Weights(sample_mvn(&means[s.0], &covariances[s.0], rng)),
            (RewardPrior::Categorical(p), ConjugateStats::Categorical { log_post }) => {
                let lp = &log_post[s.0];
                let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = lp.iter().map(|l| (l - max).exp()).collect();
                StateParams::ArmMeans(p.cells[s.0][sample_categorical(&w, rng)].clone())
            }
            _ => match self.posterior(stats, s) {
                StatePosterior::Gaussian { means, variances } => StateParams::ArmMeans(
                    means
                        .iter()
                        .zip(&variances)
                        .map(|(m, v)| m + v.sqrt() * standard_normal(rng))
                        .collect(),
                ),
                StatePosterior::Beta { alpha, beta } => StateParams::ArmMeans(
                    alpha
                        .iter()
                        .zip(&beta)
                        .map(|(a, b)| sample_beta(*a, *b, rng))
                        .collect(),
                ),
                _ => unreachable!("handled above"),
            },
        }
    }

    /// Draws a full model, one state at a time.
    pub fn sample_model<R: Rng + ?Sized>(
        &self,
        stats: &ConjugateStats,
        rng: &mut R,
    ) -> MeanRewardModel {
        let states = self.num_states();
        let draws: Vec<StateParams> = (0..states)
            .map(|s| self.sample_state(stats, StateId(s), rng))
            .collect();
        model_from_params(draws)
    }

    /// Draws `mu(a, x, s; theta)` for one arm from the posterior of state `s`.
    /// The reward likelihood depends on theta only through this value, so
    /// this is equivalent to drawing theta and evaluating the mean.
    pub fn sample_arm_mean<R: Rng + ?Sized>(
        &self,
        stats: &ConjugateStats,
        s: StateId,
        a: ActionId,
        ctx: &Context,
        rng: &mut R,
    ) -> f64 {
        match (self, stats) {
            (RewardPrior::Gaussian(p), ConjugateStats::Gaussian { sums, counts }) => {
                let i = a.0 * p.states + s.0;
                let (m, v) = gaussian_posterior(
                    p.prior_means[i],
                    p.prior_var,
                    p.noise_var,
                    sums[i],
                    counts[i],
                );
                m + v.sqrt() * standard_normal(rng)
            }
            (
                RewardPrior::BetaBernoulli(p),
                ConjugateStats::BetaBernoulli {
                    successes,
                    failures,
                },
            ) => {
                let i = a.0 * p.states + s.0;
                sample_beta(p.a0 + successes[i], p.b0 + failures[i], rng)
            }
            (
                RewardPrior::LinearGaussian(_),
                ConjugateStats::LinearGaussian {
                    means,
                    covariances,
                },
            ) => {
                let x = DVector::from_column_slice(ctx.row(a));
                let m = x.dot(&means[s.0]);
                let v = x.dot(&(&covariances[s.0] * &x)).max(0.0);
                m + v.sqrt() * standard_normal(rng)
            }
            (RewardPrior::Categorical(p), ConjugateStats::Categorical { log_post }) => {
                let lp = &log_post[s.0];
                let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = lp.iter().map(|l| (l - max).exp()).collect();
                p.cells[s.0][sample_categorical(&w, rng)][a.0]
            }
            _ => panic!("conjugate statistics do not match the prior family"),
        }
    }

    /// Log density of `reward` when the arm's mean reward is `mean`.
    pub fn log_likelihood_at(&self, mean: f64, reward: f64) -> f64 {
        match self.noise_var() {
            Some(var) => gaussian_log_pdf(reward, mean, var),
            None => {
                let p = mean.clamp(1e-12, 1.0 - 1e-12);
                reward * p.ln() + (1.0 - reward) * (1.0 - p).ln()
            }
        }
    }

    /// Log density of `reward` for arm `a` in state `s` under sampled `model`.
    pub fn log_likelihood(
        &self,
        model: &MeanRewardModel,
        a: ActionId,
        ctx: &Context,
        s: StateId,
        reward: f64,
    ) -> f64 {
        self.log_likelihood_at(model.mean(a, ctx, s), reward)
    }
}

/// Assembles per-state draws into a model.
pub fn model_from_params(draws: Vec<StateParams>) -> MeanRewardModel {
    let states = draws.len();
    match draws.first() {
        Some(StateParams::Weights(_)) => MeanRewardModel::linear(
            draws
                .into_iter()
                .map(|d| match d {
                    StateParams::Weights(w) => w,
                    StateParams::ArmMeans(_) => panic!("mixed parameter kinds"),
                })
                .collect(),
        )
        .expect("finite sampled weights"),
        Some(StateParams::ArmMeans(first)) => {
            let arms = first.len();
            let mut values = vec![0.0; arms * states];
            for (s, d) in draws.into_iter().enumerate() {
                let StateParams::ArmMeans(m) = d else {
                    panic!("mixed parameter kinds")
                };
                for (a, v) in m.into_iter().enumerate() {
                    values[a * states + s] = v;
                }
            }
            MeanRewardModel::tabular(arms, states, values).expect("finite sampled means")
        }
        None => panic!("model with zero states"),
    }
}

/// Known-variance Gaussian update:
/// mean `(s0^2 Σr + s^2 mu0) / (s0^2 m + s^2)`, variance `s0^2 s^2 / (s0^2 m + s^2)`.
pub fn gaussian_posterior(
    prior_mean: f64,
    prior_var: f64,
    noise_var: f64,
    sum: f64,
    count: f64,
) -> (f64, f64) {
    let denom = prior_var * count + noise_var;
    (
        (prior_var * sum + noise_var * prior_mean) / denom,
        prior_var * noise_var / denom,
    )
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Draws from `N(mean, cov)`. Rank-one downdates can leave `cov` a hair
/// short of positive definite, so a growing jitter is added until the
/// factorization succeeds.
pub(crate) fn sample_mvn<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> Vec<f64> {
    let d = mean.len();
    let z = DVector::from_fn(d, |_, _| standard_normal(rng));
    let mut jitter = 0.0;
    loop {
        let mut c = cov.clone();
        if jitter > 0.0 {
            for i in 0..d {
                c[(i, i)] += jitter;
            }
        }
        if let Some(chol) = c.cholesky() {
            return (mean + chol.l() * z).as_slice().to_vec();
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
        assert!(jitter < 1.0, "covariance is far from positive definite");
    }
}

/// Free-function form of [`RewardPrior::sample_state`].
pub fn conjugate_posterior_sample<R: Rng + ?Sized>(
    prior: &RewardPrior,
    stats: &ConjugateStats,
    s: StateId,
    rng: &mut R,
) -> StateParams {
    prior.sample_state(stats, s, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_arm_gaussian() -> RewardPrior {
        let m = MeanRewardModel::tabular(1, 2, vec![0.0, 0.0]).unwrap();
        RewardPrior::gaussian(&m, 0.04, 0.25).unwrap()
    }

    #[test]
    fn gaussian_single_observation() {
        let prior = one_arm_gaussian();
        let mut stats = prior.initial_stats();
        prior.observe(&mut stats, StateId(1), ActionId(0), &Context::empty(1), 1.0);
        let StatePosterior::Gaussian { means, variances } = prior.posterior(&stats, StateId(1))
        else {
            panic!()
        };
        assert!((means[0] - 0.04 / 0.29).abs() < 1e-12);
        assert!((variances[0] - 0.01 / 0.29).abs() < 1e-12);
        assert!((means[0] - 0.13793).abs() < 1e-5);
        assert!((variances[0] - 0.03448).abs() < 1e-5);
        // The other state saw nothing.
        let StatePosterior::Gaussian { means, variances } = prior.posterior(&stats, StateId(0))
        else {
            panic!()
        };
        assert_eq!((means[0], variances[0]), (0.0, 0.04));
    }

    #[test]
    fn point_mass_prior_never_moves() {
        let m = MeanRewardModel::tabular(1, 1, vec![0.3]).unwrap();
        let prior = RewardPrior::gaussian(&m, 0.0, 0.25).unwrap();
        let mut stats = prior.initial_stats();
        for _ in 0..10 {
            prior.observe(&mut stats, StateId(0), ActionId(0), &Context::empty(1), 5.0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            prior.sample_state(&stats, StateId(0), &mut rng),
            StateParams::ArmMeans(vec![0.3])
        );
    }

    #[test]
    fn linear_matches_scalar_gaussian_in_one_dimension() {
        // One-dimensional features of value 1 reduce to the scalar update.
        let prior = RewardPrior::linear_gaussian(vec![vec![0.0]], vec![vec![vec![0.04]]], 0.25)
            .unwrap();
        let ctx = Context::from_rows(&[vec![1.0]]).unwrap();
        let mut stats = prior.initial_stats();
        prior.observe(&mut stats, StateId(0), ActionId(0), &ctx, 1.0);
        let StatePosterior::Linear { mean, covariance } = prior.posterior(&stats, StateId(0))
        else {
            panic!()
        };
        assert!((mean[0] - 0.04 / 0.29).abs() < 1e-12);
        assert!((covariance[(0, 0)] - 0.01 / 0.29).abs() < 1e-12);
    }

    #[test]
    fn beta_counts() {
        let prior = RewardPrior::beta_bernoulli(2, 1, 1.0, 1.0).unwrap();
        let mut stats = prior.initial_stats();
        let ctx = Context::empty(2);
        prior.observe(&mut stats, StateId(0), ActionId(1), &ctx, 1.0);
        prior.observe(&mut stats, StateId(0), ActionId(1), &ctx, 0.0);
        prior.observe(&mut stats, StateId(0), ActionId(1), &ctx, 1.0);
        let StatePosterior::Beta { alpha, beta } = prior.posterior(&stats, StateId(0)) else {
            panic!()
        };
        assert_eq!(alpha, vec![1.0, 3.0]);
        assert_eq!(beta, vec![1.0, 2.0]);
    }

    #[test]
    fn categorical_posterior_tracks_likelihood() {
        let prior = RewardPrior::categorical(
            vec![vec![vec![0.0], vec![1.0]]],
            vec![vec![1.0, 1.0]],
            0.25,
        )
        .unwrap();
        let mut stats = prior.initial_stats();
        prior.observe(&mut stats, StateId(0), ActionId(0), &Context::empty(1), 1.0);
        let StatePosterior::Categorical { probs } = prior.posterior(&stats, StateId(0)) else {
            panic!()
        };
        // Likelihood ratio exp(-(1^2)/(2*0.25)) = e^-2 between the cells.
        let expect = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((probs[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn mean_model_of_categorical_prior() {
        let prior = RewardPrior::categorical(
            vec![vec![vec![0.0], vec![1.0]]],
            vec![vec![3.0, 1.0]],
            0.25,
        )
        .unwrap();
        let m = prior.mean_model();
        assert!((m.table_value(ActionId(0), StateId(0)).unwrap() - 0.25).abs() < 1e-12);
    }
}
