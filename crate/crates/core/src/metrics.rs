//! Regret and segment statistics over run traces.

use crate::domain::{RunTrace, StateId};
use crate::error::{Error, Result};

/// Index of the maximum; ties go to the smallest index.
pub fn argmax_tiebreak(values: &[f64]) -> Result<usize> {
    if values.is_empty() {
        return Err(Error::invalid("argmax of an empty vector"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("argmax over NaN"));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Prefix sums of per-round pseudo-regret `optimal_mean - chosen_mean`.
pub fn cumulative_regret(trace: &RunTrace) -> Vec<f64> {
    trace
        .records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.instant_regret();
            Some(*acc)
        })
        .collect()
}

/// Number of maximal constant runs in a latent state sequence.
pub fn segment_count(states: &[StateId]) -> usize {
    if states.is_empty() {
        return 0;
    }
    1 + states.windows(2).filter(|w| w[0] != w[1]).count()
}
