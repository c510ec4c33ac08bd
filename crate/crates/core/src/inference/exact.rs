//! Exact joint posterior over (latent state, reward parameters) by
//! enumerating every latent trajectory.
//!
//! Reward parameters live on a finite grid of candidate models. The
//! transition matrix is either known or integrated out under its Dirichlet
//! prior, in which case each trajectory's probability is a product of Pólya
//! predictive terms `(alpha_ss' + n_ss') / (sum_s' alpha_ss' + n_s)`.
//!
//! The cost is `|S|^t` per grid cell, so instances are capped.

use crate::domain::{ActionId, Context, MeanRewardModel, StateId};
use crate::error::{Error, Result};
use crate::inference::conjugate::RewardPrior;
use crate::inference::dirichlet::TransitionPrior;
use crate::inference::filter::BeliefVector;
use crate::sampling::gaussian_log_pdf;

pub const MAX_EXACT_ROUNDS: usize = 12;
pub const MAX_EXACT_STATES: usize = 3;

/// Finite prior over complete reward models.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrior {
    cells: Vec<MeanRewardModel>,
    log_weights: Vec<f64>,
    noise_var: f64,
}

impl GridPrior {
    pub fn new(cells: Vec<MeanRewardModel>, weights: Vec<f64>, noise_var: f64) -> Result<Self> {
        if cells.is_empty() || cells.len() != weights.len() {
            return Err(Error::invalid("grid needs one weight per cell"));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        let states = cells[0].num_states();
        if cells.iter().any(|c| c.num_states() != states) {
            return Err(Error::invalid("grid cells disagree on the number of states"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("grid weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        Ok(GridPrior {
            cells,
            log_weights: weights.iter().map(|w| (w / total).ln()).collect(),
            noise_var,
        })
    }

    /// A single known model.
    pub fn point(model: MeanRewardModel, noise_var: f64) -> Result<Self> {
        GridPrior::new(vec![model], vec![1.0], noise_var)
    }

    /// Product grid of a per-state categorical prior. Cell `g` picks
    /// candidate `g_s` for each state, with `g_0` varying slowest.
    pub fn from_categorical(prior: &RewardPrior) -> Result<Self> {
        let RewardPrior::Categorical(p) = prior else {
            return Err(Error::invalid("product grid needs a categorical reward prior"));
        };
        let per_state = p.cells();
        let log_prior = p.log_prior();
        let states = per_state.len();
        let arms = per_state[0][0].len();
        let sizes: Vec<usize> = per_state.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut cells = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for mut g in 0..total {
            let mut pick = vec![0; states];
            for s in (0..states).rev() {
                pick[s] = g % sizes[s];
                g /= sizes[s];
            }
            let mut values = vec![0.0; arms * states];
            let mut lw = 0.0;
            for (s, &c) in pick.iter().enumerate() {
                for a in 0..arms {
                    values[a * states + s] = per_state[s][c][a];
                }
                lw += log_prior[s][c];
            }
            cells.push(MeanRewardModel::tabular(arms, states, values)?);
            weights.push(lw.exp());
        }
        GridPrior::new(cells, weights, p.noise_var_value())
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_states(&self) -> usize {
        self.cells[0].num_states()
    }

    pub fn cell(&self, g: usize) -> &MeanRewardModel {
        &self.cells[g]
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

/// One observed round.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryStep {
    pub action: ActionId,
    pub context: Context,
    pub reward: f64,
}

/// Everything the exact posterior conditions on besides the history.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactProblem {
    pub grid: GridPrior,
    pub transition: TransitionPrior,
    /// Distribution of the first latent state.
    pub initial: BeliefVector,
}

/// Normalized table over `(state, grid cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPosterior {
    states: usize,
    cells: usize,
    probs: Vec<f64>,
    log_evidence: f64,
}

impl JointPosterior {
    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn prob(&self, s: StateId, g: usize) -> f64 {
        self.probs[s.0 * self.cells + g]
    }

    /// Flattened state-major table.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Log marginal likelihood of the rewards in the history.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn state_marginal(&self) -> Vec<f64> {
        self.probs
            .chunks(self.cells)
            .map(|row| row.iter().sum())
            .collect()
    }

    pub fn cell_marginal(&self) -> Vec<f64> {
        (0..self.cells)
            .map(|g| (0..self.states).map(|s| self.probs[s * self.cells + g]).sum())
            .collect()
    }
}

/// Posterior over `(S_{t+1}, theta)` after observing `t = history.len()`
/// rewards.
pub fn exact_joint_posterior(problem: &ExactProblem, history: &[HistoryStep]) -> Result<JointPosterior> {
    enumerate(problem, history, true)
}

/// Posterior over `(S_t, theta)`, the state the last reward was drawn in.
/// Requires a non-empty history.
pub fn exact_filtered_posterior(
    problem: &ExactProblem,
    history: &[HistoryStep],
) -> Result<JointPosterior> {
    if history.is_empty() {
        return Err(Error::invalid("filtered posterior needs at least one round"));
    }
    enumerate(problem, history, false)
}

/// Online log-sum-exp accumulator.
#[derive(Clone, Copy)]
struct LogAcc {
    max: f64,
    sum: f64,
}

impl LogAcc {
    const EMPTY: LogAcc = LogAcc {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

struct Enumerator<'a> {
    problem: &'a ExactProblem,
    n: usize,
    cells: usize,
    /// `loglik[k][s * cells + g]`
    loglik: Vec<Vec<f64>>,
    counts: Vec<f64>,
    totals: Vec<f64>,
    path: Vec<usize>,
    acc: Vec<LogAcc>,
    predictive: bool,
}

impl Enumerator<'_> {
    fn log_transition(&self, from: usize, to: usize) -> f64 {
        match &self.problem.transition {
            TransitionPrior::Known(m) => m.prob(StateId(from), StateId(to)).ln(),
            TransitionPrior::Dirichlet(d) => {
                let row = d.row(StateId(from));
                let row_total: f64 = row.iter().sum();
                ((row[to] + self.counts[from * self.n + to])
                    / (row_total + self.totals[from]))
                    .ln()
            }
        }
    }

    fn visit(&mut self, k: usize, log_traj: f64, log_lik: &[f64]) {
        let t = self.loglik.len();
        if k == t {
            let last = self.path[t - 1];
            if self.predictive {
                for next in 0..self.n {
                    let lt = log_traj + self.log_transition(last, next);
                    for g in 0..self.cells {
                        self.acc[next * self.cells + g].add(lt + log_lik[g]);
                    }
                }
            } else {
                for g in 0..self.cells {
                    self.acc[last * self.cells + g].add(log_traj + log_lik[g]);
                }
            }
            return;
        }
        let mut next_lik = vec![0.0; self.cells];
        for s in 0..self.n {
            let step = if k == 0 {
                self.problem.initial.probs()[s].ln()
            } else {
                self.log_transition(self.path[k - 1], s)
            };
            if step == f64::NEG_INFINITY {
                continue;
            }
            for g in 0..self.cells {
                next_lik[g] = log_lik[g] + self.loglik[k][s * self.cells + g];
            }
            if k > 0 {
                let prev = self.path[k - 1];
                self.counts[prev * self.n + s] += 1.0;
                self.totals[prev] += 1.0;
            }
            self.path.push(s);
            self.visit(k + 1, log_traj + step, &next_lik);
            self.path.pop();
            if k > 0 {
                let prev = self.path[k - 1];
                self.counts[prev * self.n + s] -= 1.0;
                self.totals[prev] -= 1.0;
            }
        }
    }
}

fn enumerate(
    problem: &ExactProblem,
    history: &[HistoryStep],
    predictive: bool,
) -> Result<JointPosterior> {
    let n = problem.grid.num_states();
    if history.len() > MAX_EXACT_ROUNDS {
        return Err(Error::InstanceTooLarge(format!(
            "{} rounds exceeds the limit of {MAX_EXACT_ROUNDS}",
            history.len()
        )));
    }
    if n > MAX_EXACT_STATES {
        return Err(Error::InstanceTooLarge(format!(
            "{n} states exceeds the limit of {MAX_EXACT_STATES}"
        )));
    }
    if problem.transition.num_states() != n || problem.initial.num_states() != n {
        return Err(Error::invalid("grid, transition prior and initial belief disagree on |S|"));
    }
    let cells = problem.grid.num_cells();
    let var = problem.grid.noise_var;
    let mut loglik = Vec::with_capacity(history.len());
    for step in history {
        let mut row = vec![0.0; n * cells];
        for s in 0..n {
            for (g, cell) in problem.grid.cells.iter().enumerate() {
                cell.check_context(&step.context)?;
                let mean = cell.mean(step.action, &step.context, StateId(s));
                row[s * cells + g] = gaussian_log_pdf(step.reward, mean, var);
            }
        }
        loglik.push(row);
    }

    let mut acc = vec![LogAcc::EMPTY; n * cells];
    if history.is_empty() {
        for s in 0..n {
            for g in 0..cells {
                acc[s * cells + g]
                    .add(problem.initial.probs()[s].ln() + problem.grid.log_weights[g]);
            }
        }
    } else {
        let mut e = Enumerator {
            problem,
            n,
            cells,
            loglik,
            counts: vec![0.0; n * n],
            totals: vec![0.0; n],
            path: Vec::with_capacity(history.len()),
            acc,
            predictive,
        };
        let prior = problem.grid.log_weights.clone();
        e.visit(0, 0.0, &prior);
        acc = e.acc;
    }

    let logs: Vec<f64> = acc.iter().map(LogAcc::value).collect();
    let mut total = LogAcc::EMPTY;
    for l in &logs {
        total.add(*l);
    }
    let z = total.value();
    if !z.is_finite() {
        return Err(Error::Numeric("every trajectory has zero probability".into()));
    }
    Ok(JointPosterior {
        states: n,
        cells,
        probs: logs.iter().map(|l| (l - z).exp()).collect(),
        log_evidence: z,
    })
}
