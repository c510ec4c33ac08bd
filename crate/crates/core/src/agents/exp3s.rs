//! Exponential weights with a weight floor, over the per-state experts of a
//! reward model. Expert `s` recommends `argmax_a mu(a, x, s)`.
//!
//! Exp3.S treats experts as arms; Exp4.S mixes their advice over actions.
//! Both mix `e alpha / M` of the total weight into every expert after each
//! update so that no expert is ever written off.

use std::f64::consts::E;

use rand_chacha::ChaCha8Rng;

use crate::agents::{argmax, check_reward, Agent, Pending};
use crate::domain::{ActionId, Context, MeanRewardModel, StateId};
use crate::error::{Error, Result};
use crate::sampling::sample_categorical;

/// `gamma = min(1, sqrt(M ln(M n) / ((e - 1) n)))`, `alpha = 1 / n`.
pub fn default_exp3s_params(experts: usize, horizon: usize) -> (f64, f64) {
    let m = experts as f64;
    let n = horizon as f64;
    let gamma = (m * (m * n).ln() / ((E - 1.0) * n)).sqrt().min(1.0);
    (gamma, 1.0 / n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpParams {
    pub gamma: f64,
    pub alpha: f64,
    /// Rewards are mapped from `[lo, hi]` to `[0, 1]` and clipped.
    pub reward_range: (f64, f64),
}

impl ExpParams {
    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::config("need gamma in (0, 1] and alpha in [0, 1)"));
        }
        if !(self.reward_range.1 > self.reward_range.0) {
            return Err(Error::config("reward range must be increasing"));
        }
        Ok(())
    }

    fn scale(&self, r: f64) -> f64 {
        let (lo, hi) = self.reward_range;
        ((r - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

/// One weight update: `w_i <- w_i exp(gamma g_i / k) + (e alpha / M) W`,
/// then renormalized to sum to one.
fn update_weights(weights: &mut [f64], gains: &[f64], gamma: f64, alpha: f64, k: f64) {
    let total: f64 = weights.iter().sum();
    let m = weights.len() as f64;
    for (w, g) in weights.iter_mut().zip(gains) {
        *w = *w * (gamma * g / k).exp() + E * alpha / m * total;
    }
    let new_total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= new_total);
}

fn expert_actions(model: &MeanRewardModel, ctx: &Context) -> Result<Vec<ActionId>> {
    (0..model.num_states())
        .map(|s| argmax(&model.arm_means(ctx, StateId(s))))
        .collect()
}

pub struct Exp3S {
    model: MeanRewardModel,
    params: ExpParams,
    weights: Vec<f64>,
    probs: Vec<f64>,
    chosen: Option<usize>,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl Exp3S {
    pub fn new(model: MeanRewardModel, params: ExpParams, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        let m = model.num_states();
        Ok(Exp3S {
            model,
            params,
            weights: vec![1.0 / m as f64; m],
            probs: vec![1.0 / m as f64; m],
            chosen: None,
            rng,
            pending: Pending::default(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expert selection probabilities of the last `act`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

impl Agent for Exp3S {
    fn name(&self) -> &str {
        "exp3s"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        self.model.check_context(ctx)?;
        let m = self.weights.len() as f64;
        let g = self.params.gamma;
        self.probs = self.weights.iter().map(|w| (1.0 - g) * w + g / m).collect();
        let i = sample_categorical(&self.probs, &mut self.rng);
        self.chosen = Some(i);
        let a = argmax(&self.model.arm_means(ctx, StateId(i)))?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, _ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        let i = self.chosen.take().expect("act picks an expert");
        let mut gains = vec![0.0; self.weights.len()];
        gains[i] = self.params.scale(reward) / self.probs[i];
        let m = self.weights.len() as f64;
        update_weights(&mut self.weights, &gains, self.params.gamma, self.params.alpha, m);
        Ok(())
    }

    fn reset(&mut self) {
        let m = self.weights.len();
        self.weights = vec![1.0 / m as f64; m];
        self.probs = self.weights.clone();
        self.chosen = None;
        self.pending.clear();
    }
}

pub struct Exp4S {
    model: MeanRewardModel,
    params: ExpParams,
    weights: Vec<f64>,
    advice: Vec<ActionId>,
    probs: Vec<f64>,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl Exp4S {
    pub fn new(model: MeanRewardModel, params: ExpParams, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        let m = model.num_states();
        Ok(Exp4S {
            model,
            params,
            weights: vec![1.0 / m as f64; m],
            advice: Vec::new(),
            probs: Vec::new(),
            rng,
            pending: Pending::default(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Action probabilities of the last `act`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

impl Agent for Exp4S {
    fn name(&self) -> &str {
        "exp4s"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        self.model.check_context(ctx)?;
        let k = ctx.num_arms();
        let g = self.params.gamma;
        self.advice = expert_actions(&self.model, ctx)?;
        let mut probs = vec![g / k as f64; k];
        for (w, a) in self.weights.iter().zip(&self.advice) {
            probs[a.0] += (1.0 - g) * w;
        }
        self.probs = probs;
        let a = ActionId(sample_categorical(&self.probs, &mut self.rng));
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, _ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        let y = self.params.scale(reward) / self.probs[action.0];
        let gains: Vec<f64> = self
            .advice
            .iter()
            .map(|a| if *a == action { y } else { 0.0 })
            .collect();
        let k = self.probs.len() as f64;
        update_weights(&mut self.weights, &gains, self.params.gamma, self.params.alpha, k);
        Ok(())
    }

    fn reset(&mut self) {
        let m = self.weights.len();
        self.weights = vec![1.0 / m as f64; m];
        self.advice.clear();
        self.probs.clear();
        self.pending.clear();
    }
}
