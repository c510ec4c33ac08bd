//! Two-window change detectors used to reset stationary bandit algorithms.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::domain::{ActionId, Context};
use crate::error::{Error, Result};

/// Ridge term that keeps short-window regressions solvable.
pub const LINEAR_RIDGE: f64 = 1e-3;

/// `sigma sqrt(tau ln(2 K n^2) / 2)`.
pub fn cd_threshold(sigma: f64, tau: usize, arms: usize, horizon: usize) -> f64 {
    let n = horizon as f64;
    sigma * (tau as f64 * (2.0 * arms as f64 * n * n).ln() / 2.0).sqrt()
}

/// Per-arm detector: compares the reward sums of the newest `tau/2`
/// observations of an arm against the `tau/2` before them.
#[derive(Debug, Clone)]
pub struct MabDetector {
    tau: usize,
    threshold: f64,
    history: Vec<VecDeque<f64>>,
}

impl MabDetector {
    pub fn new(arms: usize, tau: usize, threshold: f64) -> Result<Self> {
        if tau < 2 || tau % 2 != 0 {
            return Err(Error::config(format!("detector window {tau} must be even and >= 2")));
        }
        Ok(MabDetector {
            tau,
            threshold,
            history: vec![VecDeque::with_capacity(tau + 1); arms],
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Absolute half-window difference for `arm`, once it has `tau`
    /// observations.
    pub fn statistic(&self, arm: ActionId) -> Option<f64> {
        let h = &self.history[arm.0];
        if h.len() < self.tau {
            return None;
        }
        let half = self.tau / 2;
        let older: f64 = h.iter().take(half).sum();
        let newer: f64 = h.iter().skip(half).sum();
        Some((newer - older).abs())
    }

    /// Records a reward and reports whether a change was detected.
    pub fn observe(&mut self, arm: ActionId, reward: f64) -> bool {
        let h = &mut self.history[arm.0];
        h.push_back(reward);
        if h.len() > self.tau {
            h.pop_front();
        }
        self.statistic(arm).is_some_and(|d| d > self.threshold)
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(VecDeque::clear);
    }
}

/// Linear detector: least-squares fits on the newest and previous `tau/2`
/// rounds, fired when `||W - W'||` weighted by the window's `sum x x^T`
/// reaches the threshold.
#[derive(Debug, Clone)]
pub struct LinearDetector {
    tau: usize,
    threshold: f64,
    ridge: f64,
    history: VecDeque<(Vec<f64>, f64)>,
}

impl LinearDetector {
    pub fn new(tau: usize, threshold: f64) -> Result<Self> {
        if tau < 2 || tau % 2 != 0 {
            return Err(Error::config(format!("detector window {tau} must be even and >= 2")));
        }
        Ok(LinearDetector {
            tau,
            threshold,
            ridge: LINEAR_RIDGE,
            history: VecDeque::with_capacity(tau + 1),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn fit<'a>(rows: impl Iterator<Item = &'a (Vec<f64>, f64)>, d: usize, ridge: f64) -> DVector<f64> {
        let mut a = DMatrix::<f64>::identity(d, d) * ridge;
        let mut b = DVector::<f64>::zeros(d);
        for (x, r) in rows {
            let x = DVector::from_column_slice(x);
            a.ger(1.0, &x, &x, 1.0);
            b.axpy(*r, &x, 1.0);
        }
        a.cholesky()
            .expect("ridge-regularized Gram matrix is positive definite")
            .solve(&b)
    }

    /// Weighted distance between the two half-window fits, once the
    /// window is full.
    pub fn statistic(&self) -> Option<f64> {
        if self.history.len() < self.tau {
            return None;
        }
        let d = self.history[0].0.len();
        let half = self.tau / 2;
        let older = Self::fit(self.history.iter().take(half), d, self.ridge);
        let newer = Self::fit(self.history.iter().skip(half), d, self.ridge);
        let delta = newer - older;
        let mut q = 0.0;
        for (x, _) in &self.history {
            let p: f64 = x.iter().zip(delta.iter()).map(|(a, b)| a * b).sum();
            q += p * p;
        }
        Some(q.sqrt())
    }

    pub fn observe(&mut self, features: &[f64], reward: f64) -> bool {
        self.history.push_back((features.to_vec(), reward));
        if self.history.len() > self.tau {
            self.history.pop_front();
        }
        self.statistic().is_some_and(|d| d >= self.threshold)
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }
}

#[derive(Debug, Clone)]
pub enum ChangeDetector {
    Mab(MabDetector),
    Linear(LinearDetector),
}

impl ChangeDetector {
    pub fn observe(&mut self, ctx: &Context, action: ActionId, reward: f64) -> bool {
        match self {
            ChangeDetector::Mab(d) => d.observe(action, reward),
            ChangeDetector::Linear(d) => d.observe(ctx.row(action), reward),
        }
    }

    pub fn reset(&mut self) {
        match self {
            ChangeDetector::Mab(d) => d.reset(),
            ChangeDetector::Linear(d) => d.reset(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_value() {
        let b = cd_threshold(0.5, 100, 5, 2000);
        assert!((b - 0.5 * (50.0 * 4e7f64.ln()).sqrt()).abs() < 1e-12);
        assert!((b - 14.79).abs() < 0.01);
    }

    #[test]
    fn constant_rewards_never_fire() {
        let mut d = MabDetector::new(2, 10, 0.1).unwrap();
        for _ in 0..100 {
            assert!(!d.observe(ActionId(0), 0.7));
        }
    }

    #[test]
    fn step_change_fires() {
        let mut d = MabDetector::new(1, 10, 2.0).unwrap();
        for _ in 0..10 {
            d.observe(ActionId(0), 0.0);
        }
        let fired: Vec<bool> = (0..10).map(|_| d.observe(ActionId(0), 1.0)).collect();
        // Difference after k new values is k (older half all zero) until
        // the change crosses the midpoint.
        assert!(!fired[1]);
        assert!(fired[2]);
    }

    #[test]
    fn odd_window_rejected() {
        assert!(MabDetector::new(1, 7, 1.0).is_err());
        assert!(LinearDetector::new(7, 1.0).is_err());
    }

    #[test]
    fn identical_halves_have_zero_norm() {
        let mut d = LinearDetector::new(4, 1.0).unwrap();
        for (x, r) in [(1.0, 2.0), (2.0, 4.0), (1.0, 2.0), (2.0, 4.0)] {
            d.observe(&[x], r);
        }
        assert!(d.statistic().unwrap() < 1e-9);
    }

    #[test]
    fn scalar_weighted_norm() {
        // Older half fits W' = 0, newer half W = 2; sum x^2 over window = 4.
        let mut d = LinearDetector::new(4, 1.0).unwrap();
        d.ridge = 0.0;
        for (x, r) in [(1.0, 0.0), (1.0, 0.0), (1.0, 2.0), (1.0, 2.0)] {
            d.observe(&[x], r);
        }
        assert!((d.statistic().unwrap() - 4.0).abs() < 1e-12);
    }
}
