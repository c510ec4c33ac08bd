//! k-means with k-means++ seeding and Lloyd iterations.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia after every assignment step.
    pub inertia: Vec<f64>,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centroids.iter().enumerate() {
        let d = dist2(point, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centroids = vec![rows[rng.random_range(0..rows.len())].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| dist2(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            crate::sampling::sample_categorical(&d2, rng)
        } else {
            rng.random_range(0..rows.len())
        };
        centroids.push(rows[next].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(dist2(r, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

/// Clusters `rows` into `k` groups. Stops when assignments no longer change
/// or after `max_iter` Lloyd steps. A cluster left empty is moved onto the
/// point farthest from its centroid.
pub fn kmeans<R: Rng + ?Sized>(rows: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut R) -> Result<KMeansResult> {
    if k == 0 || k > rows.len() {
        return Err(Error::invalid(format!("k = {k} with {} rows", rows.len())));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("rows differ in length"));
    }
    let mut centroids = plus_plus(rows, k, rng);
    let mut assignments = vec![usize::MAX; rows.len()];
    let mut inertia = Vec::new();
    let mut iterations = 0;
    loop {
        let mut changed = false;
        let mut dists = vec![0.0; rows.len()];
        for (i, r) in rows.iter().enumerate() {
            let (c, dd) = nearest(r, &centroids);
            changed |= assignments[i] != c;
            assignments[i] = c;
            dists[i] = dd;
        }
        inertia.push(dists.iter().sum());
        if !changed || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (r, &c) in rows.iter().zip(&assignments) {
            counts[c] += 1;
            sums[c].iter_mut().zip(r).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..rows.len())
                    .max_by(|&a, &b| {
                        let da = dist2(&rows[a], &centroids[assignments[a]]);
                        let db = dist2(&rows[b], &centroids[assignments[b]]);
                        da.total_cmp(&db)
                    })
                    .expect("rows is non-empty");
                centroids[c] = rows[far].clone();
                // Claim the point so a second empty cluster picks another one.
                assignments[far] = c;
            }
        }
    }
    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::standard_normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_cluster_per_point() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 5.0], vec![-3.0, 2.0]];
        let r = kmeans(&rows, 3, 100, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(*r.inertia.last().unwrap(), 0.0);
        let mut a = r.assignments.clone();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2]);
    }

    #[test]
    fn separated_blobs_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rows = Vec::new();
        for i in 0..200 {
            let c = if i < 100 { -10.0 } else { 10.0 };
            rows.push(vec![c + standard_normal(&mut rng), standard_normal(&mut rng)]);
        }
        let r = kmeans(&rows, 2, 100, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let first = r.assignments[0];
        assert!(r.assignments[..100].iter().all(|&a| a == first));
        assert!(r.assignments[100..].iter().all(|&a| a != first));
    }

    #[test]
    fn seeded_runs_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![standard_normal(&mut rng); 3]).collect();
        let a = kmeans(&rows, 4, 100, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = kmeans(&rows, 4, 100, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_many_clusters_rejected() {
        assert!(kmeans(&[vec![1.0]], 2, 10, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
