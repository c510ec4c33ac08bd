//! Change-detection wrapper: resets the base algorithm when the detector
//! fires.

use crate::agents::detectors::ChangeDetector;
use crate::agents::Agent;
use crate::domain::{ActionId, Context};
use crate::error::Result;

pub struct CdAgent {
    name: String,
    base: Box<dyn Agent>,
    detector: ChangeDetector,
    resets: Vec<usize>,
    round: usize,
}

impl CdAgent {
    pub fn new(name: impl Into<String>, base: Box<dyn Agent>, detector: ChangeDetector) -> Self {
        CdAgent {
            name: name.into(),
            base,
            detector,
            resets: Vec::new(),
            round: 0,
        }
    }

    /// Rounds (1-based) after which a reset happened.
    pub fn resets(&self) -> &[usize] {
        &self.resets
    }

    /// Clears the base agent and the detector windows.
    pub fn force_reset(&mut self) {
        self.base.reset();
        self.detector.reset();
        self.resets.push(self.round);
    }
}

impl Agent for CdAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        self.base.act(ctx)
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        self.base.update(ctx, action, reward)?;
        self.round += 1;
        if self.detector.observe(ctx, action, reward) {
            self.force_reset();
        }
        Ok(())
    }

    fn reset(&mut self) {
        self.base.reset();
        self.detector.reset();
        self.resets.clear();
        self.round = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{MabDetector, Ucb1};

    fn run(agent: &mut dyn Agent, rewards: &[f64]) -> Vec<ActionId> {
        let ctx = Context::empty(2);
        rewards
            .iter()
            .map(|r| {
                let a = agent.act(&ctx).unwrap();
                agent.update(&ctx, a, *r * (a.0 as f64 + 1.0) * 0.5).unwrap();
                a
            })
            .collect()
    }

    #[test]
    fn silent_detector_is_pass_through() {
        let rewards: Vec<f64> = (0..200).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let mut bare = Ucb1::new(2, 1.0).unwrap();
        let det = ChangeDetector::Mab(MabDetector::new(2, 10, f64::INFINITY).unwrap());
        let mut cd = CdAgent::new("cd_ucb", Box::new(Ucb1::new(2, 1.0).unwrap()), det);
        assert_eq!(run(&mut bare, &rewards), run(&mut cd, &rewards));
        assert!(cd.resets().is_empty());
    }

    #[test]
    fn forced_reset_restores_fresh_behaviour() {
        let rewards: Vec<f64> = (0..50).map(|i| (i % 3) as f64).collect();
        let det = ChangeDetector::Mab(MabDetector::new(2, 10, f64::INFINITY).unwrap());
        let mut cd = CdAgent::new("cd_ucb", Box::new(Ucb1::new(2, 1.0).unwrap()), det);
        run(&mut cd, &rewards);
        cd.force_reset();
        let mut fresh = Ucb1::new(2, 1.0).unwrap();
        assert_eq!(run(&mut cd, &rewards), run(&mut fresh, &rewards));
    }
}
