//! Sliding-window elimination of latent states.
//!
//! The agent keeps the last `tau` rounds of `(believed state, prediction
//! gap)` pairs and drops any state whose accumulated gap is implausibly
//! large, then plays the best `(state, arm)` pair among the survivors.
//! With a point model and `epsilon = 0` this is SW-mUCB; with the prior mean
//! model and `epsilon > 0` it is SW-umUCB.

use std::collections::VecDeque;

use crate::agents::{check_reward, Agent, Pending};
use crate::domain::{ActionId, Context, MeanRewardModel, StateId};
use crate::error::{Error, Result};

/// Rebuild the running sums from scratch this often to shed rounding drift.
const RECOMPUTE_EVERY: usize = 4096;

/// Window length minimizing `L tau + 2 sigma sqrt(6 |S| n^2 ln n / tau)`:
/// `ceil((sigma n sqrt(6 |S| ln n) / L)^(2/3))`, clamped to `[1, n]`.
pub fn optimal_window(n: usize, states: usize, sigma: f64, segments: usize) -> usize {
    let nf = n as f64;
    let x = sigma * nf * (6.0 * states as f64 * nf.ln()).sqrt() / segments.max(1) as f64;
    (x.powf(2.0 / 3.0).ceil() as usize).clamp(1, n.max(1))
}

/// Window bookkeeping: per-state counts `N(s)` and gaps `G(s)`.
#[derive(Debug, Clone)]
pub struct SwState {
    window: usize,
    entries: VecDeque<(StateId, f64)>,
    counts: Vec<usize>,
    gaps: Vec<f64>,
    since_recompute: usize,
}

impl SwState {
    pub fn new(window: usize, states: usize) -> Self {
        SwState {
            window,
            entries: VecDeque::with_capacity(window + 1),
            counts: vec![0; states],
            gaps: vec![0.0; states],
            since_recompute: 0,
        }
    }

    pub fn push(&mut self, state: StateId, gap: f64) {
        self.entries.push_back((state, gap));
        self.counts[state.0] += 1;
        self.gaps[state.0] += gap;
        if self.entries.len() > self.window {
            let (s, g) = self.entries.pop_front().expect("non-empty window");
            self.counts[s.0] -= 1;
            self.gaps[s.0] -= g;
        }
        self.since_recompute += 1;
        if self.since_recompute >= RECOMPUTE_EVERY {
            self.recompute();
        }
    }

    fn recompute(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.gaps.iter_mut().for_each(|g| *g = 0.0);
        for (s, g) in &self.entries {
            self.counts[s.0] += 1;
            self.gaps[s.0] += g;
        }
        self.since_recompute = 0;
    }

    pub fn clear(&mut self) {
        self.entries.clear();
        self.recompute();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, s: StateId) -> usize {
        self.counts[s.0]
    }

    pub fn gap(&self, s: StateId) -> f64 {
        self.gaps[s.0]
    }

    /// `{s : G(s) <= sigma sqrt(6 N(s) ln n)}`, or every state if that set
    /// is empty.
    pub fn consistent_states(&self, sigma: f64, horizon: usize) -> Vec<StateId> {
        let log_n = (horizon as f64).ln();
        let c: Vec<StateId> = (0..self.counts.len())
            .filter(|&s| self.gaps[s] <= sigma * (6.0 * self.counts[s] as f64 * log_n).sqrt())
            .map(StateId)
            .collect();
        if c.is_empty() {
            (0..self.counts.len()).map(StateId).collect()
        } else {
            c
        }
    }
}

/// Joint arg max over consistent states (outer) and arms (inner), first
/// maximum wins.
pub fn sw_select(model: &MeanRewardModel, ctx: &Context, consistent: &[StateId]) -> (StateId, ActionId) {
    let mut best = (consistent[0], ActionId(0));
    let mut best_value = f64::NEG_INFINITY;
    for &s in consistent {
        for (a, v) in model.arm_means(ctx, s).into_iter().enumerate() {
            if v > best_value {
                best_value = v;
                best = (s, ActionId(a));
            }
        }
    }
    best
}

pub struct SwUcb {
    name: &'static str,
    model: MeanRewardModel,
    sigma: f64,
    epsilon: f64,
    horizon: usize,
    state: SwState,
    believed: Option<StateId>,
    pending: Pending,
}

impl SwUcb {
    /// SW-mUCB with the true model.
    pub fn known(model: MeanRewardModel, sigma: f64, window: usize, horizon: usize) -> Result<Self> {
        SwUcb::build("sw_mucb", model, sigma, 0.0, window, horizon)
    }

    /// SW-umUCB with the prior-mean model and slack `epsilon`.
    pub fn uncertain(
        prior_mean: MeanRewardModel,
        sigma: f64,
        epsilon: f64,
        window: usize,
        horizon: usize,
    ) -> Result<Self> {
        SwUcb::build("sw_umucb", prior_mean, sigma, epsilon, window, horizon)
    }

    fn build(
        name: &'static str,
        model: MeanRewardModel,
        sigma: f64,
        epsilon: f64,
        window: usize,
        horizon: usize,
    ) -> Result<Self> {
        if window == 0 || horizon == 0 {
            return Err(Error::config("window and horizon must be positive"));
        }
        if !(sigma > 0.0) || !(epsilon >= 0.0) {
            return Err(Error::config("sigma must be positive and epsilon non-negative"));
        }
        Ok(SwUcb {
            name,
            state: SwState::new(window, model.num_states()),
            model,
            sigma,
            epsilon,
            horizon,
            believed: None,
            pending: Pending::default(),
        })
    }

    pub fn window_state(&self) -> &SwState {
        &self.state
    }

    /// Chooses `(B_t, A_t)` for this round.
    pub fn step(&mut self, ctx: &Context) -> Result<(StateId, ActionId)> {
        self.model.check_context(ctx)?;
        let c = self.state.consistent_states(self.sigma, self.horizon);
        Ok(sw_select(&self.model, ctx, &c))
    }
}

impl Agent for SwUcb {
    fn name(&self) -> &str {
        self.name
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        let (b, a) = self.step(ctx)?;
        self.believed = Some(b);
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        let b = self.believed.take().expect("act sets the believed state");
        let gap = self.model.mean(action, ctx, b) - self.epsilon - reward;
        self.state.push(b, gap);
        Ok(())
    }

    fn reset(&mut self) {
        self.state.clear();
        self.believed = None;
        self.pending.clear();
    }
}
