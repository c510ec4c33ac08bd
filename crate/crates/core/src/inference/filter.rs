//! Forward filtering over latent states with a known transition kernel.

use rand::Rng;

use crate::domain::{StateId, TransitionMatrix, ROW_SUM_TOL};
use crate::error::{Error, Result};
use crate::sampling::sample_categorical;

/// Distribution over latent states.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector {
    probs: Vec<f64>,
}

impl BeliefVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("belief over zero states"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("belief entries must be finite and non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::invalid(format!("belief sums to {sum}")));
        }
        Ok(BeliefVector { probs })
    }

    /// Normalizes non-negative masses.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::Numeric(format!(
                "cannot normalize belief with total mass {sum}"
            )));
        }
        BeliefVector::new(crate::domain::normalize_exact(
            weights.into_iter().map(|w| w / sum).collect(),
        ))
    }

    pub fn uniform(n: usize) -> Self {
        BeliefVector {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(n: usize, s: StateId) -> Self {
        let mut probs = vec![0.0; n];
        probs[s.0] = 1.0;
        BeliefVector { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StateId {
        StateId(sample_categorical(&self.probs, rng))
    }
}

/// Result of one filtering step.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterStep {
    /// Belief over the next latent state.
    pub belief: BeliefVector,
    /// Unnormalized mass, i.e. the predictive likelihood of the observation.
    pub evidence: f64,
}

/// `P'(s') ∝ Σ_s P(s) φ(s, s') L(s)`: condition on the reward observed in
/// the current state, then propagate through the kernel.
pub fn filter_update(
    belief: &BeliefVector,
    transition: &TransitionMatrix,
    likelihoods: &[f64],
) -> Result<FilterStep> {
    check_shapes(belief, transition, likelihoods.len())?;
    if likelihoods.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::invalid("likelihoods must be finite and non-negative"));
    }
    let (next, evidence) = propagate(belief, transition, likelihoods);
    if evidence <= 0.0 {
        return Err(Error::Numeric(
            "all likelihoods underflowed to zero; use filter_update_log".into(),
        ));
    }
    Ok(FilterStep {
        belief: BeliefVector::from_weights(next)?,
        evidence,
    })
}

/// Log-space variant of [`filter_update`]; returns the log predictive
/// likelihood instead of the raw mass.
pub fn filter_update_log(
    belief: &BeliefVector,
    transition: &TransitionMatrix,
    log_likelihoods: &[f64],
) -> Result<(BeliefVector, f64)> {
    check_shapes(belief, transition, log_likelihoods.len())?;
    let shift = belief
        .probs
        .iter()
        .zip(log_likelihoods)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::Numeric(
            "no state with positive belief has finite likelihood".into(),
        ));
    }
    let scaled: Vec<f64> = log_likelihoods.iter().map(|l| (l - shift).exp()).collect();
    let (next, mass) = propagate(belief, transition, &scaled);
    Ok((BeliefVector::from_weights(next)?, mass.ln() + shift))
}

fn propagate(belief: &BeliefVector, transition: &TransitionMatrix, lik: &[f64]) -> (Vec<f64>, f64) {
    let n = belief.num_states();
    let mut next = vec![0.0; n];
    let mut mass = 0.0;
    for (s, (p, l)) in belief.probs.iter().zip(lik).enumerate() {
        let w = p * l;
        if w == 0.0 {
            continue;
        }
        mass += w;
        for (t, q) in transition.row(StateId(s)).iter().enumerate() {
            next[t] += w * q;
        }
    }
    (next, mass)
}

fn check_shapes(belief: &BeliefVector, transition: &TransitionMatrix, n: usize) -> Result<()> {
    if belief.num_states() != transition.num_states() || n != belief.num_states() {
        return Err(Error::invalid(format!(
            "shape mismatch: belief {}, transition {}, likelihoods {n}",
            belief.num_states(),
            transition.num_states()
        )));
    }
    Ok(())
}
