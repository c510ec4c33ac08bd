//! Thompson sampling with a known reward model and transition matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{argmax, check_reward, Agent, Pending};
use crate::domain::{ActionId, Context, MeanRewardModel, StateId, TransitionMatrix};
use crate::error::{Error, Result};
use crate::inference::{filter_update_log, BeliefVector};
use crate::sampling::gaussian_log_pdf;

/// Samples a state from the belief and plays its best arm.
pub fn mts_act<R: Rng + ?Sized>(
    belief: &BeliefVector,
    model: &MeanRewardModel,
    ctx: &Context,
    rng: &mut R,
) -> Result<ActionId> {
    let b = belief.sample(rng);
    argmax(&model.arm_means(ctx, b))
}

pub struct Mts {
    model: MeanRewardModel,
    transition: TransitionMatrix,
    noise_var: f64,
    initial: BeliefVector,
    belief: BeliefVector,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl Mts {
    pub fn new(
        model: MeanRewardModel,
        transition: TransitionMatrix,
        noise_std: f64,
        initial: BeliefVector,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if model.num_states() != transition.num_states() || initial.num_states() != model.num_states() {
            return Err(Error::config("mTS model, transition and belief disagree on |S|"));
        }
        if !(noise_std > 0.0) {
            return Err(Error::config("mTS needs a positive noise std"));
        }
        Ok(Mts {
            model,
            transition,
            noise_var: noise_std * noise_std,
            belief: initial.clone(),
            initial,
            rng,
            pending: Pending::default(),
        })
    }

    pub fn belief(&self) -> &BeliefVector {
        &self.belief
    }
}

impl Agent for Mts {
    fn name(&self) -> &str {
        "mts"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        self.model.check_context(ctx)?;
        let a = mts_act(&self.belief, &self.model, ctx, &mut self.rng)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        let ll: Vec<f64> = (0..self.model.num_states())
            .map(|s| gaussian_log_pdf(reward, self.model.mean(action, ctx, StateId(s)), self.noise_var))
            .collect();
        self.belief = filter_update_log(&self.belief, &self.transition, &ll)?.0;
        Ok(())
    }

    fn reset(&mut self) {
        self.belief = self.initial.clone();
        self.pending.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn table() -> MeanRewardModel {
        // Rows are arms, columns states.
        MeanRewardModel::tabular_from_rows(&[vec![0.2, 0.9], vec![0.7, 0.1]]).unwrap()
    }

    #[test]
    fn one_hot_belief_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ctx = Context::empty(2);
        let b = BeliefVector::one_hot(2, StateId(0));
        for _ in 0..20 {
            assert_eq!(mts_act(&b, &table(), &ctx, &mut rng).unwrap(), ActionId(1));
        }
    }

    #[test]
    fn two_state_update_arithmetic() {
        // Likelihood ratio 0.8 : 0.2 from a reward that favours state 0.
        let model = MeanRewardModel::tabular(1, 2, vec![0.0, 1.0]).unwrap();
        let phi = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let sigma2: f64 = 0.25;
        // Pick r so that L0 / L1 = 4: (1 - 2r) / (2 sigma^2) = ln 4.
        let r = 0.5 - sigma2 * 4f64.ln();
        let mut agent = Mts::new(model, phi, sigma2.sqrt(), BeliefVector::uniform(2), ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ctx = Context::empty(1);
        let a = agent.act(&ctx).unwrap();
        agent.update(&ctx, a, r).unwrap();
        assert!((agent.belief().probs()[0] - 0.76).abs() < 1e-12);
    }

    #[test]
    fn evidence_concentrates_belief() {
        let model = MeanRewardModel::tabular(1, 2, vec![0.0, 1.0]).unwrap();
        let phi = TransitionMatrix::new(vec![vec![0.99, 0.01], vec![0.01, 0.99]]).unwrap();
        let mut agent = Mts::new(model, phi, 0.5, BeliefVector::uniform(2), ChaCha8Rng::seed_from_u64(1)).unwrap();
        let ctx = Context::empty(1);
        let mut last = 0.5;
        for _ in 0..30 {
            let a = agent.act(&ctx).unwrap();
            agent.update(&ctx, a, 1.0).unwrap();
            let p = agent.belief().probs()[1];
            assert!(p >= last - 1e-12);
            last = p;
        }
        assert!(last > 0.98);
    }
}
