//! Dirichlet posteriors over the rows of the transition matrix.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{StateId, TransitionMatrix};
use crate::error::{Error, Result};
use crate::sampling::sample_dirichlet;

/// Row `s` holds the Dirichlet parameters of the transitions out of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCounts {
    n: usize,
    alpha: Vec<f64>,
}

impl DirichletCounts {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("Dirichlet counts must be a square matrix"));
        }
        if rows.iter().flatten().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::invalid("Dirichlet parameters must be positive"));
        }
        Ok(DirichletCounts {
            n,
            alpha: rows.concat(),
        })
    }

    /// `self_weight` on the diagonal, `other_weight` elsewhere.
    pub fn sticky(n: usize, self_weight: f64, other_weight: f64) -> Result<Self> {
        DirichletCounts::new(
            (0..n)
                .map(|s| {
                    (0..n)
                        .map(|t| if s == t { self_weight } else { other_weight })
                        .collect()
                })
                .collect(),
        )
    }

    /// `alpha = scale * phi`.
    pub fn scaled(transition: &TransitionMatrix, scale: f64) -> Result<Self> {
        DirichletCounts::new(
            transition
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(|p| p * scale).collect())
                .collect(),
        )
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn row(&self, s: StateId) -> &[f64] {
        &self.alpha[s.0 * self.n..(s.0 + 1) * self.n]
    }

    pub fn get(&self, from: StateId, to: StateId) -> f64 {
        self.alpha[from.0 * self.n + to.0]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.alpha.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Adds one observed transition.
    pub fn observe(&mut self, from: StateId, to: StateId) {
        self.alpha[from.0 * self.n + to.0] += 1.0;
    }

    /// Posterior-mean transition row, which is also the one-step predictive.
    pub fn mean_row(&self, s: StateId) -> Vec<f64> {
        let row = self.row(s);
        let total: f64 = row.iter().sum();
        row.iter().map(|a| a / total).collect()
    }

    pub fn mean_matrix(&self) -> TransitionMatrix {
        TransitionMatrix::from_weights(self.rows()).expect("positive Dirichlet rows")
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, s: StateId, rng: &mut R) -> Vec<f64> {
        sample_dirichlet(self.row(s), rng)
    }

    /// Expected probability of leaving the most persistent state,
    /// `1 - min_s alpha_ss / sum_s' alpha_ss'`.
    pub fn expected_change_prob(&self) -> f64 {
        (0..self.n)
            .map(|s| {
                let row = self.row(StateId(s));
                1.0 - row[s] / row.iter().sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// What a learner knows about the latent dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionPrior {
    Known(TransitionMatrix),
    Dirichlet(DirichletCounts),
}

impl TransitionPrior {
    pub fn num_states(&self) -> usize {
        match self {
            TransitionPrior::Known(m) => m.num_states(),
            TransitionPrior::Dirichlet(d) => d.num_states(),
        }
    }

    /// Point estimate: the matrix itself or the Dirichlet mean.
    pub fn mean_matrix(&self) -> TransitionMatrix {
        match self {
            TransitionPrior::Known(m) => m.clone(),
            TransitionPrior::Dirichlet(d) => d.mean_matrix(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_update_is_exact() {
        let mut d = DirichletCounts::sticky(5, 796.0, 1.0).unwrap();
        for _ in 0..3 {
            d.observe(StateId(0), StateId(0));
        }
        assert_eq!(d.row(StateId(0)), &[799.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(d.row(StateId(1)), &[1.0, 796.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn sticky_prior_change_rate() {
        let d = DirichletCounts::sticky(5, 796.0, 1.0).unwrap();
        assert!((d.expected_change_prob() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(DirichletCounts::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn scaled_rows_sum_to_scale() {
        let phi = TransitionMatrix::new(vec![vec![0.7, 0.3], vec![0.25, 0.75]]).unwrap();
        let d = DirichletCounts::scaled(&phi, 800.0).unwrap();
        for r in d.rows() {
            assert!((r.iter().sum::<f64>() - 800.0).abs() < 1e-9);
        }
    }
}
