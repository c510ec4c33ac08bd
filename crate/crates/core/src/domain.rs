//! Shared domain types: arms, latent states, contexts, reward models,
//! transition kernels and per-round run records.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::sample_categorical;

/// Tolerance on transition-matrix row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Per-round arm features, one row per arm.
///
/// Context-free problems use `dim == 0`: the context only fixes the arm count.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    arms: usize,
    dim: usize,
    features: Vec<f64>,
}

impl Context {
    /// Context-free round with `arms` arms.
    pub fn empty(arms: usize) -> Self {
        Context {
            arms,
            dim: 0,
            features: Vec::new(),
        }
    }

    /// Row-major `arms x dim` feature matrix.
    pub fn new(arms: usize, dim: usize, features: Vec<f64>) -> Result<Self> {
        if arms == 0 {
            return Err(Error::invalid("context needs at least one arm"));
        }
        if features.len() != arms * dim {
            return Err(Error::invalid(format!(
                "context has {} features, expected {arms}x{dim}",
                features.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("context features must be finite"));
        }
        Ok(Context {
            arms,
            dim,
            features,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("context rows have unequal length"));
        }
        Context::new(rows.len(), dim, rows.concat())
    }

    pub fn num_arms(&self) -> usize {
        self.arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_contextual(&self) -> bool {
        self.dim > 0
    }

    /// Feature vector of arm `a`; empty for context-free rounds.
    pub fn row(&self, a: ActionId) -> &[f64] {
        &self.features[a.0 * self.dim..(a.0 + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModelRepr {
    /// `values[a * states + s]`
    Tabular {
        arms: usize,
        states: usize,
        values: Vec<f64>,
    },
    /// One weight vector per latent state; the mean is `x_a . w_s`.
    Linear { weights: Vec<Vec<f64>> },
}

/// Mean reward `mu(a, x, s)` for every action, context and latent state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRewardModel(ModelRepr);

impl MeanRewardModel {
    /// Arm-major table: `values[a * states + s]`.
    pub fn tabular(arms: usize, states: usize, values: Vec<f64>) -> Result<Self> {
        if arms == 0 || states == 0 {
            return Err(Error::invalid("tabular model needs arms and states"));
        }
        if values.len() != arms * states {
            return Err(Error::invalid(format!(
                "tabular model has {} entries, expected {arms}x{states}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabular model entries must be finite"));
        }
        Ok(MeanRewardModel(ModelRepr::Tabular {
            arms,
            states,
            values,
        }))
    }

    /// Table given as one row per arm, one column per state.
    pub fn tabular_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let states = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != states) {
            return Err(Error::invalid("tabular rows have unequal length"));
        }
        MeanRewardModel::tabular(rows.len(), states, rows.concat())
    }

    pub fn linear(weights: Vec<Vec<f64>>) -> Result<Self> {
        let dim = weights.first().map_or(0, Vec::len);
        if weights.is_empty() || dim == 0 {
            return Err(Error::invalid("linear model needs states and dimensions"));
        }
        if weights.iter().any(|w| w.len() != dim) {
            return Err(Error::invalid("linear weight vectors differ in dimension"));
        }
        if weights.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("linear weights must be finite"));
        }
        Ok(MeanRewardModel(ModelRepr::Linear { weights }))
    }

    pub fn num_states(&self) -> usize {
        match &self.0 {
            ModelRepr::Tabular { states, .. } => *states,
            ModelRepr::Linear { weights } => weights.len(),
        }
    }

    /// Arm count for tabular models; linear models take it from the context.
    pub fn num_arms(&self) -> Option<usize> {
        match &self.0 {
            ModelRepr::Tabular { arms, .. } => Some(*arms),
            ModelRepr::Linear { .. } => None,
        }
    }

    /// Feature dimension for linear models, 0 for tabular ones.
    pub fn dim(&self) -> usize {
        match &self.0 {
            ModelRepr::Tabular { .. } => 0,
            ModelRepr::Linear { weights } => weights[0].len(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.0, ModelRepr::Linear { .. })
    }

    /// Checks that this model can score `ctx`.
    pub fn check_context(&self, ctx: &Context) -> Result<()> {
        match &self.0 {
            ModelRepr::Tabular { arms, .. } if *arms != ctx.num_arms() => Err(Error::config(
                format!("model has {arms} arms, context has {}", ctx.num_arms()),
            )),
            ModelRepr::Linear { weights } if weights[0].len() != ctx.dim() => {
                Err(Error::config(format!(
                    "linear model has dimension {}, context has {}",
                    weights[0].len(),
                    ctx.dim()
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self, a: ActionId, ctx: &Context, s: StateId) -> f64 {
        match &self.0 {
            ModelRepr::Tabular { states, values, .. } => values[a.0 * states + s.0],
            ModelRepr::Linear { weights } => dot(ctx.row(a), &weights[s.0]),
        }
    }

    /// Means of every arm in state `s`.
    pub fn arm_means(&self, ctx: &Context, s: StateId) -> Vec<f64> {
        (0..ctx.num_arms())
            .map(|a| self.mean(ActionId(a), ctx, s))
            .collect()
    }

    /// Tabular entry; `None` for linear models.
    pub fn table_value(&self, a: ActionId, s: StateId) -> Option<f64> {
        match &self.0 {
            ModelRepr::Tabular { states, values, .. } => Some(values[a.0 * states + s.0]),
            ModelRepr::Linear { .. } => None,
        }
    }

    /// Weight vector of state `s`; `None` for tabular models.
    pub fn state_weights(&self, s: StateId) -> Option<&[f64]> {
        match &self.0 {
            ModelRepr::Linear { weights } => Some(&weights[s.0]),
            ModelRepr::Tabular { .. } => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-stochastic latent transition kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: usize,
    probs: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates rows: entries non-negative and rows summing to 1 within 1e-12.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("transition matrix needs at least one state"));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("transition row {s} has wrong length")));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::invalid(format!(
                    "transition row {s} has negative or non-finite entries"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::invalid(format!(
                    "transition row {s} sums to {sum}, not 1"
                )));
            }
        }
        Ok(TransitionMatrix {
            n,
            probs: rows.concat(),
        })
    }

    /// Normalizes each row of non-negative weights.
    pub fn from_weights(rows: Vec<Vec<f64>>) -> Result<Self> {
        let normalized = rows
            .into_iter()
            .enumerate()
            .map(|(s, row)| {
                let sum: f64 = row.iter().sum();
                if !(sum > 0.0 && sum.is_finite()) || row.iter().any(|w| *w < 0.0) {
                    return Err(Error::invalid(format!("transition row {s} cannot be normalized")));
                }
                Ok(normalize_exact(row.into_iter().map(|w| w / sum).collect()))
            })
            .collect::<Result<Vec<_>>>()?;
        TransitionMatrix::new(normalized)
    }

    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; n * n];
        for s in 0..n {
            probs[s * n + s] = 1.0;
        }
        TransitionMatrix { n, probs }
    }

    /// Each state moves to every other state with probability `off_diagonal`.
    pub fn uniform_change(n: usize, off_diagonal: f64) -> Result<Self> {
        if n == 0 || off_diagonal < 0.0 || off_diagonal * (n as f64 - 1.0) > 1.0 {
            return Err(Error::invalid(format!(
                "invalid uniform-change matrix: n={n}, off-diagonal={off_diagonal}"
            )));
        }
        let stay = 1.0 - off_diagonal * (n as f64 - 1.0);
        let rows = (0..n)
            .map(|s| {
                (0..n)
                    .map(|t| if s == t { stay } else { off_diagonal })
                    .collect()
            })
            .collect();
        TransitionMatrix::new(rows)
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn row(&self, s: StateId) -> &[f64] {
        &self.probs[s.0 * self.n..(s.0 + 1) * self.n]
    }

    pub fn prob(&self, from: StateId, to: StateId) -> f64 {
        self.probs[from.0 * self.n + to.0]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, from: StateId, rng: &mut R) -> StateId {
        StateId(sample_categorical(self.row(from), rng))
    }

    /// Largest probability of leaving any state.
    pub fn max_change_prob(&self) -> f64 {
        (0..self.n)
            .map(|s| 1.0 - self.prob(StateId(s), StateId(s)))
            .fold(0.0, f64::max)
    }

    /// Stationary distribution by power iteration on the lazy chain
    /// `(I + P) / 2`, which has the same fixed points and always converges
    /// for irreducible chains.
    pub fn stationary_distribution(&self) -> Vec<f64> {
        let n = self.n;
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..1_000_000 {
            let mut next = vec![0.0; n];
            for (s, p) in pi.iter().enumerate() {
                for (t, q) in self.row(StateId(s)).iter().enumerate() {
                    next[t] += 0.5 * p * q;
                }
                next[s] += 0.5 * p;
            }
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-15 {
                break;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter().map(|p| p / total).collect()
    }
}

/// Absorbs the rounding residue of a normalized row into its largest entry so
/// the row sums to 1 as closely as floating point allows.
pub(crate) fn normalize_exact(mut row: Vec<f64>) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    if let Ok(imax) = crate::metrics::argmax_tiebreak(&row) {
        row[imax] += 1.0 - sum;
        if row[imax] < 0.0 {
            row[imax] = 0.0;
        }
    }
    row
}

/// One round of interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    pub context: Context,
    pub action: ActionId,
    pub reward: f64,
    pub true_state: StateId,
    pub optimal_action: ActionId,
    pub optimal_mean: f64,
    pub chosen_mean: f64,
}

impl RoundRecord {
    pub fn instant_regret(&self) -> f64 {
        self.optimal_mean - self.chosen_mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<RoundRecord>,
    pub seed: u64,
    pub agent_name: String,
    pub env_name: String,
}

impl RunTrace {
    pub fn new(agent_name: impl Into<String>, env_name: impl Into<String>, seed: u64) -> Self {
        RunTrace {
            records: Vec::new(),
            seed,
            agent_name: agent_name.into(),
            env_name: env_name.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn states(&self) -> Vec<StateId> {
        self.records.iter().map(|r| r.true_state).collect()
    }

    /// Checks that records are numbered 1, 2, ... without gaps.
    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if r.t != i + 1 {
                return Err(Error::invalid(format!(
                    "record {i} has round index {}, expected {}",
                    r.t,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// CSV with header `t,action,reward,true_state,optimal_action,instant_regret`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,action,reward,true_state,optimal_action,instant_regret")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t,
                r.action,
                r.reward,
                r.true_state,
                r.optimal_action,
                r.instant_regret()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabular_lookup_is_arm_major() {
        let m = MeanRewardModel::tabular_from_rows(&[vec![0.2, 0.9], vec![0.7, 0.1]]).unwrap();
        let ctx = Context::empty(2);
        assert_eq!(m.mean(ActionId(0), &ctx, StateId(1)), 0.9);
        assert_eq!(m.mean(ActionId(1), &ctx, StateId(0)), 0.7);
        assert_eq!(m.num_states(), 2);
    }

    #[test]
    fn linear_mean_is_dot_product() {
        let m = MeanRewardModel::linear(vec![vec![1.0, 0.0]]).unwrap();
        let ctx = Context::from_rows(&[vec![0.7, 0.3]]).unwrap();
        assert_eq!(m.mean(ActionId(0), &ctx, StateId(0)), 0.7);
    }

    #[test]
    fn transition_rows_must_be_stochastic() {
        assert!(TransitionMatrix::new(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1.1, -0.1], vec![0.0, 1.0]]).is_err());
        let m = TransitionMatrix::from_weights(vec![vec![1.0, 3.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(m.row(StateId(0)), &[0.25, 0.75]);
    }

    #[test]
    fn stationary_distribution_of_two_state_chain() {
        let m = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let pi = m.stationary_distribution();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn trace_csv_header() {
        let mut trace = RunTrace::new("a", "e", 1);
        trace.records.push(RoundRecord {
            t: 1,
            context: Context::empty(2),
            action: ActionId(1),
            reward: 0.5,
            true_state: StateId(0),
            optimal_action: ActionId(0),
            optimal_mean: 0.75,
            chosen_mean: 0.5,
        });
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "t,action,reward,true_state,optimal_action,instant_regret\n1,1,0.5,0,0,0.25\n"
        );
    }
}
