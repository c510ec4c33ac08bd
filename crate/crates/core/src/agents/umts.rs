//! Thompson sampling that also learns the reward model and transitions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{argmax, check_reward, Agent, Pending};
use crate::domain::{ActionId, Context, StateId};
use crate::error::Result;
use crate::inference::{
    exact_joint_posterior, ExactProblem, HistoryStep, ParticleFilterConfig, ParticleModel, ParticleSet,
};
use crate::sampling::sample_categorical;

/// Best arm under the weight-averaged means of freshly drawn
/// `(believed state, theta)` pairs.
pub fn umts_pf_act<R: Rng + ?Sized>(set: &mut ParticleSet, ctx: &Context, rng: &mut R) -> Result<ActionId> {
    argmax(&set.draw_mean_rewards(ctx, rng))
}

pub struct UmtsPf {
    set: ParticleSet,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl UmtsPf {
    pub fn new(model: ParticleModel, config: ParticleFilterConfig, rng: ChaCha8Rng) -> Result<Self> {
        Ok(UmtsPf {
            set: ParticleSet::new(model, config)?,
            rng,
            pending: Pending::default(),
        })
    }
}

impl Agent for UmtsPf {
    fn name(&self) -> &str {
        "umts_pf"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        let a = umts_pf_act(&mut self.set, ctx, &mut self.rng)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.set.observe(action, ctx, reward, &mut self.rng)?;
        Ok(())
    }

    fn reset(&mut self) {
        self.set.reset();
        self.pending.clear();
    }

    fn particles(&self) -> Option<&ParticleSet> {
        Some(&self.set)
    }
}

/// Samples `(state, model)` from the exact joint posterior each round.
/// Only usable for short horizons on small instances.
pub struct UmtsExact {
    problem: ExactProblem,
    history: Vec<HistoryStep>,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl UmtsExact {
    pub fn new(problem: ExactProblem, rng: ChaCha8Rng) -> Self {
        UmtsExact {
            problem,
            history: Vec::new(),
            rng,
            pending: Pending::default(),
        }
    }
}

impl Agent for UmtsExact {
    fn name(&self) -> &str {
        "umts_exact"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        let post = exact_joint_posterior(&self.problem, &self.history)?;
        let k = sample_categorical(post.probs(), &mut self.rng);
        let (s, g) = (k / post.num_cells(), k % post.num_cells());
        let model = self.problem.grid.cell(g);
        model.check_context(ctx)?;
        let a = argmax(&model.arm_means(ctx, StateId(s)))?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.history.push(HistoryStep {
            action,
            context: ctx.clone(),
            reward,
        });
        Ok(())
    }

    fn reset(&mut self) {
        self.history.clear();
        self.pending.clear();
    }
}
