//! Alternating least squares on the observed entries of a ratings matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::standard_normal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlsConfig {
    pub rank: usize,
    pub lambda: f64,
    pub iterations: usize,
    /// Standard deviation of the random initial factors.
    pub init_std: f64,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            rank: 20,
            lambda: 0.05,
            iterations: 20,
            init_std: 0.1,
        }
    }
}

/// `M ≈ U V^T` with one row per user in `u` and per movie in `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl FactorModel {
    pub fn rank(&self) -> usize {
        self.u.first().or(self.v.first()).map_or(0, Vec::len)
    }

    pub fn predict(&self, user: usize, movie: usize) -> f64 {
        crate::domain::dot(&self.u[user], &self.v[movie])
    }

    pub fn rmse(&self, entries: &[(usize, usize, f64)]) -> f64 {
        if entries.is_empty() {
            return 0.0;
        }
        let sse: f64 = entries
            .iter()
            .map(|&(i, j, r)| (r - self.predict(i, j)).powi(2))
            .sum();
        (sse / entries.len() as f64).sqrt()
    }

    /// `sum (r - u_i . v_j)^2 + lambda (||U||^2 + ||V||^2)`.
    pub fn objective(&self, entries: &[(usize, usize, f64)], lambda: f64) -> f64 {
        let sse: f64 = entries
            .iter()
            .map(|&(i, j, r)| (r - self.predict(i, j)).powi(2))
            .sum();
        let norm = |rows: &[Vec<f64>]| rows.iter().flatten().map(|x| x * x).sum::<f64>();
        sse + lambda * (norm(&self.u) + norm(&self.v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlsReport {
    /// Objective at the start and after every half-iteration.
    pub objective: Vec<f64>,
    /// Training RMSE after every full iteration.
    pub train_rmse: Vec<f64>,
}

/// Solves `(sum_j v_j v_j^T + lambda I) u = sum_j r_j v_j` for every row.
fn solve_side(
    rows: &[Vec<(usize, f64)>],
    fixed: &[Vec<f64>],
    rank: usize,
    lambda: f64,
) -> Vec<Vec<f64>> {
    rows.par_iter()
        .map(|obs| {
            let mut a = DMatrix::<f64>::identity(rank, rank) * lambda;
            let mut b = DVector::<f64>::zeros(rank);
            for &(j, r) in obs {
                let x = DVector::from_column_slice(&fixed[j]);
                a.ger(1.0, &x, &x, 1.0);
                b.axpy(r, &x, 1.0);
            }
            a.cholesky()
                .expect("lambda > 0 keeps the normal equations positive definite")
                .solve(&b)
                .as_slice()
                .to_vec()
        })
        .collect()
}

/// Fits rank-`config.rank` factors to `entries` over a `users x movies`
/// matrix. Rows with no observations stay at zero after the first solve.
pub fn als_complete<R: Rng + ?Sized>(
    entries: &[(usize, usize, f64)],
    users: usize,
    movies: usize,
    config: &AlsConfig,
    rng: &mut R,
) -> Result<(FactorModel, AlsReport)> {
    if config.rank == 0 || !(config.lambda > 0.0) {
        return Err(Error::config("ALS needs rank >= 1 and lambda > 0"));
    }
    let mut by_user = vec![Vec::new(); users];
    let mut by_movie = vec![Vec::new(); movies];
    for &(i, j, r) in entries {
        if i >= users || j >= movies {
            return Err(Error::invalid(format!("entry ({i}, {j}) outside {users} x {movies}")));
        }
        by_user[i].push((j, r));
        by_movie[j].push((i, r));
    }
    let mut init = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..config.rank).map(|_| config.init_std * standard_normal(rng)).collect())
            .collect()
    };
    let mut model = FactorModel {
        u: init(users),
        v: init(movies),
    };
    let mut report = AlsReport {
        objective: vec![model.objective(entries, config.lambda)],
        train_rmse: Vec::with_capacity(config.iterations),
    };
    for _ in 0..config.iterations {
        model.u = solve_side(&by_user, &model.v, config.rank, config.lambda);
        report.objective.push(model.objective(entries, config.lambda));
        model.v = solve_side(&by_movie, &model.u, config.rank, config.lambda);
        report.objective.push(model.objective(entries, config.lambda));
        report.train_rmse.push(model.rmse(entries));
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full(u: &[f64], v: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut e = Vec::new();
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                e.push((i, j, a * b));
            }
        }
        e
    }

    #[test]
    fn rank_one_exact_recovery() {
        let u = [1.0, -0.5, 2.0, 0.3, 1.2];
        let v = [0.7, 1.1, -1.3, 0.4];
        let e = full(&u, &v);
        let cfg = AlsConfig {
            rank: 1,
            lambda: 1e-12,
            iterations: 50,
            init_std: 1.0,
        };
        let (m, _) = als_complete(&e, 5, 4, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(m.rmse(&e) < 1e-6);
    }

    #[test]
    fn heavy_regularization_shrinks_to_zero() {
        let e = full(&[1.0, 2.0, 3.0], &[1.0, 2.0]);
        let cfg = AlsConfig {
            rank: 2,
            lambda: 1e9,
            iterations: 5,
            init_std: 0.1,
        };
        let (m, _) = als_complete(&e, 3, 2, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(m.u.iter().chain(&m.v).flatten().all(|x| x.abs() < 1e-6));
        assert!(e.iter().all(|&(i, j, _)| m.predict(i, j).abs() < 1e-9));
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e: Vec<(usize, usize, f64)> = (0..20)
            .flat_map(|i| (0..15).map(move |j| (i, j)))
            .filter(|_| rng.random::<f64>() < 0.4)
            .map(|(i, j)| (i, j, ((i * 7 + j * 3) % 5) as f64 + 1.0))
            .collect();
        let (_, rep) = als_complete(&e, 20, 15, &AlsConfig::default(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for w in rep.objective.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert_eq!(rep.train_rmse.len(), 20);
    }
}
