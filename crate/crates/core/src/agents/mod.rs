//! Bandit policies.

pub mod base;
pub mod cd;
pub mod detectors;
pub mod exp3s;
pub mod mts;
pub mod swucb;
pub mod umts;

use crate::domain::{ActionId, Context};
use crate::error::{Error, Result};
use crate::inference::ParticleSet;
use crate::metrics::argmax_tiebreak;

pub use base::{GaussianTs, LinTs, LinUcb, Ucb1};
pub use cd::CdAgent;
pub use detectors::{cd_threshold, ChangeDetector, LinearDetector, MabDetector};
pub use exp3s::{default_exp3s_params, Exp3S, Exp4S};
pub use mts::{mts_act, Mts};
pub use swucb::{optimal_window, SwState, SwUcb};
pub use umts::{umts_pf_act, UmtsExact, UmtsPf};

/// A policy interacting with an environment one round at a time.
///
/// Each `act` must be followed by exactly one `update` for the same action.
pub trait Agent: Send {
    fn name(&self) -> &str;
    fn act(&mut self, ctx: &Context) -> Result<ActionId>;
    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()>;
    /// Forgets everything learned, keeping the random stream.
    fn reset(&mut self);
    /// True arm means of the coming round; only the oracle listens.
    fn observe_truth(&mut self, _means: &[f64]) {}
    fn particles(&self) -> Option<&ParticleSet> {
        None
    }
}

/// Tracks the action awaiting its reward.
#[derive(Debug, Clone, Default)]
pub(crate) struct Pending(Option<ActionId>);

impl Pending {
    pub(crate) fn begin(&mut self, a: ActionId) -> ActionId {
        self.0 = Some(a);
        a
    }

    pub(crate) fn finish(&mut self, a: ActionId) -> Result<()> {
        match self.0.take() {
            Some(p) if p == a => Ok(()),
            Some(p) => Err(Error::Protocol(format!(
                "update for action {a} but the agent played {p}"
            ))),
            None => Err(Error::Protocol("update without a preceding act".into())),
        }
    }

    pub(crate) fn clear(&mut self) {
        self.0 = None;
    }
}

pub(crate) fn check_reward(reward: f64) -> Result<()> {
    if reward.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("reward {reward} is not finite")))
    }
}

pub(crate) fn argmax(values: &[f64]) -> Result<ActionId> {
    argmax_tiebreak(values).map(ActionId)
}

/// Plays the best arm given the true means it is shown before each round.
#[derive(Debug, Clone, Default)]
pub struct Oracle {
    means: Vec<f64>,
    pending: Pending,
}

impl Oracle {
    pub fn new() -> Self {
        Oracle::default()
    }
}

impl Agent for Oracle {
    fn name(&self) -> &str {
        "oracle"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        if self.means.len() != ctx.num_arms() {
            return Err(Error::Protocol("oracle was not shown this round's means".into()));
        }
        let a = argmax(&self.means)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, _ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.means.clear();
        Ok(())
    }

    fn reset(&mut self) {
        self.means.clear();
        self.pending.clear();
    }

    fn observe_truth(&mut self, means: &[f64]) {
        self.means = means.to_vec();
    }
}
