//! Small sampling helpers shared by environments, agents and filters.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Draws an index with probability proportional to `weights`.
///
/// Weights need not be normalized. Falls back to the last positive entry
/// when rounding leaves the cumulative sum just short of the draw.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Dirichlet draw via normalized Gamma(alpha_i, 1) variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let mut draws: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive Dirichlet parameter").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter_mut().for_each(|d| *d /= total);
    } else {
        // Every gamma underflowed (all-tiny alphas): fall back to the largest alpha.
        let imax = crate::metrics::argmax_tiebreak(alpha).unwrap_or(0);
        draws.iter_mut().enumerate().for_each(|(i, d)| *d = f64::from(u8::from(i == imax)));
    }
    draws
}

/// Beta draw via two gammas.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x: f64 = Gamma::new(a, 1.0).expect("positive beta parameter").sample(rng);
    let y: f64 = Gamma::new(b, 1.0).expect("positive beta parameter").sample(rng);
    if x + y > 0.0 {
        x / (x + y)
    } else {
        a / (a + b)
    }
}

/// `log(sum(exp(v)))` with a max shift.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log density of `N(mean, var)` at `x`.
pub fn gaussian_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (d * d / var + (2.0 * std::f64::consts::PI * var).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn categorical_respects_zero_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let i = sample_categorical(&[0.0, 1.0, 0.0, 2.0], &mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn dirichlet_rows_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = sample_dirichlet(&[796.0, 1.0, 1.0, 1.0, 1.0], &mut rng);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d[0] > 0.9);
    }
}
