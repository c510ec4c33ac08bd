//! Stationary bandit algorithms, used bare or under a change detector.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use crate::agents::{argmax, check_reward, Agent, Pending};
use crate::domain::{ActionId, Context};
use crate::error::{Error, Result};
use crate::inference::conjugate::sample_mvn;
use crate::sampling::standard_normal;

/// UCB1 with index `mean + scale * sqrt(2 ln t / n_a)`; every arm is
/// pulled once first.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    scale: f64,
    counts: Vec<f64>,
    sums: Vec<f64>,
    t: usize,
    pending: Pending,
}

impl Ucb1 {
    pub fn new(arms: usize, scale: f64) -> Result<Self> {
        if arms == 0 || !(scale >= 0.0) {
            return Err(Error::config("UCB1 needs arms and a non-negative scale"));
        }
        Ok(Ucb1 {
            scale,
            counts: vec![0.0; arms],
            sums: vec![0.0; arms],
            t: 0,
            pending: Pending::default(),
        })
    }
}

impl Agent for Ucb1 {
    fn name(&self) -> &str {
        "ucb1"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        if ctx.num_arms() != self.counts.len() {
            return Err(Error::invalid("context arm count does not match the agent"));
        }
        let a = match self.counts.iter().position(|c| *c == 0.0) {
            Some(a) => ActionId(a),
            None => {
                let log_t = (self.t as f64).ln();
                let index: Vec<f64> = self
                    .sums
                    .iter()
                    .zip(&self.counts)
                    .map(|(s, n)| s / n + self.scale * (2.0 * log_t / n).sqrt())
                    .collect();
                argmax(&index)?
            }
        };
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, _ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.counts[action.0] += 1.0;
        self.sums[action.0] += reward;
        self.t += 1;
        Ok(())
    }

    fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0.0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.t = 0;
        self.pending.clear();
    }
}

/// Independent Gaussian Thompson sampling per arm.
#[derive(Debug, Clone)]
pub struct GaussianTs {
    prior_mean: f64,
    prior_var: f64,
    noise_var: f64,
    counts: Vec<f64>,
    sums: Vec<f64>,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl GaussianTs {
    pub fn new(arms: usize, prior_mean: f64, prior_var: f64, noise_var: f64, rng: ChaCha8Rng) -> Result<Self> {
        if arms == 0 || !(prior_var > 0.0) || !(noise_var > 0.0) {
            return Err(Error::config("Gaussian TS needs arms and positive variances"));
        }
        Ok(GaussianTs {
            prior_mean,
            prior_var,
            noise_var,
            counts: vec![0.0; arms],
            sums: vec![0.0; arms],
            rng,
            pending: Pending::default(),
        })
    }
}

impl Agent for GaussianTs {
    fn name(&self) -> &str {
        "gaussian_ts"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        if ctx.num_arms() != self.counts.len() {
            return Err(Error::invalid("context arm count does not match the agent"));
        }
        let draws: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.counts)
            .map(|(s, n)| {
                let (m, v) = crate::inference::conjugate::gaussian_posterior(
                    self.prior_mean,
                    self.prior_var,
                    self.noise_var,
                    *s,
                    *n,
                );
                m + v.sqrt() * standard_normal(&mut self.rng)
            })
            .collect();
        let a = argmax(&draws)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, _ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.counts[action.0] += 1.0;
        self.sums[action.0] += reward;
        Ok(())
    }

    fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0.0);
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.pending.clear();
    }
}

/// Ridge-regression statistics shared by the linear agents, with the
/// inverse Gram matrix kept current by Sherman-Morrison updates.
#[derive(Debug, Clone)]
struct RidgeStats {
    reg: f64,
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
}

impl RidgeStats {
    fn new(dim: usize, reg: f64) -> Self {
        RidgeStats {
            reg,
            a_inv: DMatrix::identity(dim, dim) / reg,
            b: DVector::zeros(dim),
        }
    }

    fn estimate(&self) -> DVector<f64> {
        &self.a_inv * &self.b
    }

    fn observe(&mut self, x: &[f64], r: f64) {
        let x = DVector::from_column_slice(x);
        let ax = &self.a_inv * &x;
        let denom = 1.0 + x.dot(&ax);
        self.a_inv.ger(-1.0 / denom, &ax, &ax, 1.0);
        self.b.axpy(r, &x, 1.0);
    }

    fn reset(&mut self) {
        let d = self.b.len();
        *self = RidgeStats::new(d, self.reg);
    }
}

fn check_linear_ctx(ctx: &Context, dim: usize) -> Result<()> {
    if ctx.dim() != dim {
        return Err(Error::invalid(format!(
            "context dimension {} does not match the agent's {dim}",
            ctx.dim()
        )));
    }
    Ok(())
}

/// LinUCB with index `x^T w + alpha sqrt(x^T A^-1 x)`.
#[derive(Debug, Clone)]
pub struct LinUcb {
    alpha: f64,
    stats: RidgeStats,
    pending: Pending,
}

impl LinUcb {
    pub fn new(dim: usize, reg: f64, alpha: f64) -> Result<Self> {
        if dim == 0 || !(reg > 0.0) || !(alpha >= 0.0) {
            return Err(Error::config("LinUCB needs features, positive ridge and alpha >= 0"));
        }
        Ok(LinUcb {
            alpha,
            stats: RidgeStats::new(dim, reg),
            pending: Pending::default(),
        })
    }
}

impl Agent for LinUcb {
    fn name(&self) -> &str {
        "linucb"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        check_linear_ctx(ctx, self.stats.b.len())?;
        let w = self.stats.estimate();
        let index: Vec<f64> = (0..ctx.num_arms())
            .map(|a| {
                let x = DVector::from_column_slice(ctx.row(ActionId(a)));
                let width = x.dot(&(&self.stats.a_inv * &x)).max(0.0).sqrt();
                x.dot(&w) + self.alpha * width
            })
            .collect();
        let a = argmax(&index)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.stats.observe(ctx.row(action), reward);
        Ok(())
    }

    fn reset(&mut self) {
        self.stats.reset();
        self.pending.clear();
    }
}

/// Linear Thompson sampling with `w ~ N(A^-1 b, v^2 A^-1)`.
#[derive(Debug, Clone)]
pub struct LinTs {
    v: f64,
    stats: RidgeStats,
    rng: ChaCha8Rng,
    pending: Pending,
}

impl LinTs {
    pub fn new(dim: usize, reg: f64, v: f64, rng: ChaCha8Rng) -> Result<Self> {
        if dim == 0 || !(reg > 0.0) || !(v >= 0.0) {
            return Err(Error::config("LinTS needs features, positive ridge and v >= 0"));
        }
        Ok(LinTs {
            v,
            stats: RidgeStats::new(dim, reg),
            rng,
            pending: Pending::default(),
        })
    }
}

impl Agent for LinTs {
    fn name(&self) -> &str {
        "lints"
    }

    fn act(&mut self, ctx: &Context) -> Result<ActionId> {
        check_linear_ctx(ctx, self.stats.b.len())?;
        let cov = &self.stats.a_inv * (self.v * self.v);
        let w = sample_mvn(&self.stats.estimate(), &cov, &mut self.rng);
        let values: Vec<f64> = (0..ctx.num_arms())
            .map(|a| crate::domain::dot(ctx.row(ActionId(a)), &w))
            .collect();
        let a = argmax(&values)?;
        Ok(self.pending.begin(a))
    }

    fn update(&mut self, ctx: &Context, action: ActionId, reward: f64) -> Result<()> {
        check_reward(reward)?;
        self.pending.finish(action)?;
        self.stats.observe(ctx.row(action), reward);
        Ok(())
    }

    fn reset(&mut self) {
        self.stats.reset();
        self.pending.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ucb1_pulls_each_arm_first() {
        let mut u = Ucb1::new(3, 1.0).unwrap();
        let ctx = Context::empty(3);
        for expect in 0..3 {
            let a = u.act(&ctx).unwrap();
            assert_eq!(a, ActionId(expect));
            u.update(&ctx, a, 0.0).unwrap();
        }
    }

    #[test]
    fn ucb1_prefers_better_arm() {
        let mut u = Ucb1::new(2, 1.0).unwrap();
        let ctx = Context::empty(2);
        let mut pulls = [0; 2];
        for _ in 0..500 {
            let a = u.act(&ctx).unwrap();
            pulls[a.0] += 1;
            u.update(&ctx, a, if a.0 == 1 { 1.0 } else { 0.0 }).unwrap();
        }
        assert!(pulls[1] > 400);
    }

    #[test]
    fn ridge_inverse_matches_direct() {
        let mut s = RidgeStats::new(2, 0.5);
        let xs = [[1.0, 2.0], [0.5, -1.0], [3.0, 0.2]];
        for x in &xs {
            s.observe(x, 1.0);
        }
        let mut a = DMatrix::identity(2, 2) * 0.5;
        for x in &xs {
            let v = DVector::from_column_slice(x);
            a += &v * v.transpose();
        }
        let inv = a.try_inverse().unwrap();
        assert!((inv - &s.a_inv).amax() < 1e-12);
    }

    #[test]
    fn reset_matches_fresh() {
        let ctx = Context::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut a = LinUcb::new(2, 1.0, 1.0).unwrap();
        let act = a.act(&ctx).unwrap();
        a.update(&ctx, act, 3.0).unwrap();
        a.reset();
        let fresh = LinUcb::new(2, 1.0, 1.0).unwrap();
        assert_eq!(a.stats.a_inv, fresh.stats.a_inv);
        assert_eq!(a.stats.b, fresh.stats.b);
    }

    #[test]
    fn lints_learns_direction() {
        let ctx = Context::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut a = LinTs::new(2, 1.0, 0.5, ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut last = 0;
        for _ in 0..300 {
            let act = a.act(&ctx).unwrap();
            last = act.0;
            a.update(&ctx, act, if act.0 == 0 { 1.0 } else { 0.0 }).unwrap();
        }
        assert_eq!(last, 0);
    }
}
