//! Per-cluster Gaussian priors over user factors and a Dirichlet prior over
//! transitions between clusters.

use serde::{Deserialize, Serialize};

use crate::envs::build_superuser_transition;
use crate::error::{Error, Result};

/// Added to every covariance diagonal.
pub const DIAGONAL_LOADING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflinePrior {
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Vec<Vec<f64>>>,
    /// Dirichlet parameters, row `s` for transitions out of `s`.
    pub alpha: Vec<Vec<f64>>,
    /// Transition matrix estimated from the cluster means.
    pub transition: Vec<Vec<f64>>,
}

/// Cluster means and (n - 1)-normalized covariances of `rows`, then
/// `alpha = scale * phi_hat` with `phi_hat` built from the means.
pub fn build_prior(
    rows: &[Vec<f64>],
    assignments: &[usize],
    clusters: usize,
    scale: f64,
    p_change: f64,
) -> Result<OfflinePrior> {
    if rows.len() != assignments.len() || rows.is_empty() {
        return Err(Error::invalid("need one assignment per row"));
    }
    if !(scale > 0.0) {
        return Err(Error::invalid("transition scale must be positive"));
    }
    let d = rows[0].len();
    let mut means = Vec::with_capacity(clusters);
    let mut covariances = Vec::with_capacity(clusters);
    for c in 0..clusters {
        let members: Vec<&Vec<f64>> = rows
            .iter()
            .zip(assignments)
            .filter(|(_, a)| **a == c)
            .map(|(r, _)| r)
            .collect();
        if members.len() < 2 {
            return Err(Error::invalid(format!(
                "cluster {c} has {} members, need at least 2",
                members.len()
            )));
        }
        let n = members.len() as f64;
        let mean: Vec<f64> = (0..d).map(|k| members.iter().map(|r| r[k]).sum::<f64>() / n).collect();
        let mut cov = vec![vec![0.0; d]; d];
        for r in &members {
            for i in 0..d {
                let di = r[i] - mean[i];
                for j in 0..=i {
                    cov[i][j] += di * (r[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in 0..=i {
                cov[i][j] /= n - 1.0;
                cov[j][i] = cov[i][j];
            }
            cov[i][i] += DIAGONAL_LOADING;
        }
        means.push(mean);
        covariances.push(cov);
    }
    let phi = build_superuser_transition(&means, p_change)?;
    let transition = phi.rows();
    let alpha = transition
        .iter()
        .map(|row| row.iter().map(|p| scale * p).collect())
        .collect();
    Ok(OfflinePrior {
        means,
        covariances,
        alpha,
        transition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_means_and_covariance() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![10.0, 10.0],
            vec![10.0, 14.0],
        ];
        let p = build_prior(&rows, &[0, 0, 1, 1], 2, 800.0, 0.0025).unwrap();
        assert_eq!(p.means, vec![vec![1.0, 0.0], vec![10.0, 12.0]]);
        // Two points one unit from the mean: (1 + 1) / (2 - 1).
        assert!((p.covariances[0][0][0] - (2.0 + DIAGONAL_LOADING)).abs() < 1e-15);
        assert_eq!(p.covariances[0][0][1], 0.0);
        assert!((p.covariances[1][1][1] - (8.0 + DIAGONAL_LOADING)).abs() < 1e-12);
        for row in &p.alpha {
            assert!((row.iter().sum::<f64>() - 800.0).abs() < 1e-9);
            assert!(row.iter().all(|a| *a > 0.0));
        }
    }

    #[test]
    fn identical_members_get_loading_only() {
        let rows = vec![vec![1.0, 2.0]; 3];
        let rows: Vec<Vec<f64>> = rows.into_iter().chain(vec![vec![0.0, 0.0], vec![0.5, 0.0]]).collect();
        let p = build_prior(&rows, &[0, 0, 0, 1, 1], 2, 800.0, 0.0025).unwrap();
        assert_eq!(p.covariances[0], vec![vec![DIAGONAL_LOADING, 0.0], vec![0.0, DIAGONAL_LOADING]]);
    }

    #[test]
    fn singleton_cluster_rejected() {
        let rows = vec![vec![0.0], vec![1.0], vec![5.0]];
        assert!(build_prior(&rows, &[0, 0, 1], 2, 800.0, 0.0025).is_err());
    }
}
