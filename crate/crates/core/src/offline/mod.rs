//! Offline model building for the recommender experiment: ratings are
//! filtered and split, each half is factorized, training users are
//! clustered, and the clusters become the agents' prior.

pub mod als;
pub mod kmeans;
pub mod prior;
pub mod ratings;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use als::{als_complete, AlsConfig, AlsReport, FactorModel};
pub use kmeans::{kmeans, KMeansResult};
pub use prior::{build_prior, OfflinePrior, DIAGONAL_LOADING};
pub use ratings::{
    filter_dense, filter_dense_fixpoint, load_movies, load_ratings, parse_movies, parse_ratings,
    split_ratings, DenseRatings, Rating, RatingsTable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfflineConfig {
    pub min_user: usize,
    pub min_movie: usize,
    /// Repeat the density filter until nothing more is removed.
    pub fixpoint_filter: bool,
    pub train_fraction: f64,
    pub als: AlsConfig,
    pub clusters: usize,
    pub kmeans_max_iter: usize,
    /// Dirichlet prior strength: `alpha = scale * phi_hat`.
    pub transition_scale: f64,
    pub p_change: f64,
    pub seed: u64,
}

impl Default for OfflineConfig {
    fn default() -> Self {
        OfflineConfig {
            min_user: 200,
            min_movie: 200,
            fixpoint_filter: false,
            train_fraction: 0.5,
            als: AlsConfig::default(),
            clusters: 5,
            kmeans_max_iter: 300,
            transition_scale: 800.0,
            p_change: 0.0025,
            seed: 0,
        }
    }
}

/// Everything the recommender environment and its agents need.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineModel {
    pub user_ids: Vec<u32>,
    pub movie_ids: Vec<u32>,
    pub train: FactorModel,
    pub test: FactorModel,
    /// Training-set cluster of each user.
    pub clusters: Vec<usize>,
    pub prior: OfflinePrior,
}

#[derive(Debug, Clone)]
pub struct OfflineRun {
    pub model: OfflineModel,
    pub train_report: AlsReport,
    pub test_report: AlsReport,
    pub kmeans: KMeansResult,
    /// Held-out RMSE of the training factors on the test ratings.
    pub heldout_rmse: f64,
}

pub fn build_offline(table: &RatingsTable, config: &OfflineConfig) -> Result<OfflineRun> {
    let filtered = if config.fixpoint_filter {
        filter_dense_fixpoint(table, config.min_user, config.min_movie)
    } else {
        filter_dense(table, config.min_user, config.min_movie)
    };
    if filtered.is_empty() {
        return Err(Error::invalid("no ratings left after filtering"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (train, test) = split_ratings(&filtered, config.train_fraction, &mut rng)?;
    let users = filtered.users();
    let movies = filtered.movies();
    let train = train.dense_over(&users, &movies);
    let test = test.dense_over(&users, &movies);
    let (nu, nm) = (users.len(), movies.len());
    let (train_f, train_report) = als_complete(&train.entries, nu, nm, &config.als, &mut rng)?;
    let (test_f, test_report) = als_complete(&test.entries, nu, nm, &config.als, &mut rng)?;
    let heldout_rmse = train_f.rmse(&test.entries);
    let km = kmeans(&train_f.u, config.clusters, config.kmeans_max_iter, &mut rng)?;
    let prior = build_prior(
        &train_f.u,
        &km.assignments,
        config.clusters,
        config.transition_scale,
        config.p_change,
    )?;
    Ok(OfflineRun {
        model: OfflineModel {
            user_ids: train.user_ids,
            movie_ids: train.movie_ids,
            train: train_f,
            test: test_f,
            clusters: km.assignments.clone(),
            prior,
        },
        train_report,
        test_report,
        kmeans: km,
        heldout_rmse,
    })
}

pub const TRAIN_FACTORS: &str = "factors_train.csv";
pub const TEST_FACTORS: &str = "factors_test.csv";
pub const CLUSTERS: &str = "clusters.csv";
pub const PRIOR: &str = "prior.json";

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn write_factors(path: &Path, f: &FactorModel, user_ids: &[u32], movie_ids: &[u32]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["kind".to_string(), "id".to_string()];
    header.extend((0..f.rank()).map(|k| format!("f{k}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (kind, ids, rows) in [("user", user_ids, &f.u), ("movie", movie_ids, &f.v)] {
        for (id, row) in ids.iter().zip(rows) {
            let mut rec = vec![kind.to_string(), id.to_string()];
            rec.extend(row.iter().map(|x| x.to_string()));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

type FactorRows = (Vec<u32>, Vec<Vec<f64>>, Vec<u32>, Vec<Vec<f64>>);

fn read_factors(path: &Path) -> Result<FactorRows> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let (mut uids, mut u, mut mids, mut v) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: m,
        };
        let id: u32 = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad id".into()))?;
        let row = rec
            .iter()
            .skip(2)
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad factor {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        match rec.get(0) {
            Some("user") => {
                uids.push(id);
                u.push(row);
            }
            Some("movie") => {
                mids.push(id);
                v.push(row);
            }
            other => return Err(bad(format!("unknown kind {other:?}"))),
        }
    }
    Ok((uids, u, mids, v))
}

impl OfflineModel {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_factors(&dir.join(TRAIN_FACTORS), &self.train, &self.user_ids, &self.movie_ids)?;
        write_factors(&dir.join(TEST_FACTORS), &self.test, &self.user_ids, &self.movie_ids)?;
        let path = dir.join(CLUSTERS);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["user", "cluster"]).map_err(|e| csv_err(&path, e))?;
        for (id, c) in self.user_ids.iter().zip(&self.clusters) {
            w.write_record([id.to_string(), c.to_string()])
                .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let path = dir.join(PRIOR);
        let json = serde_json::to_string_pretty(&self.prior).expect("prior serializes");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let (user_ids, train_u, movie_ids, train_v) = read_factors(&dir.join(TRAIN_FACTORS))?;
        let (test_uids, test_u, test_mids, test_v) = read_factors(&dir.join(TEST_FACTORS))?;
        if test_uids != user_ids || test_mids != movie_ids {
            return Err(Error::config("train and test factor files list different ids"));
        }
        let path = dir.join(CLUSTERS);
        let mut r = csv::Reader::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let mut by_user = BTreeMap::new();
        for rec in r.deserialize::<(u32, usize)>() {
            let (u, c) = rec.map_err(|e| csv_err(&path, e))?;
            by_user.insert(u, c);
        }
        let clusters = user_ids
            .iter()
            .map(|u| {
                by_user
                    .get(u)
                    .copied()
                    .ok_or_else(|| Error::config(format!("user {u} has no cluster")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let path = dir.join(PRIOR);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let prior: OfflinePrior = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(OfflineModel {
            user_ids,
            movie_ids,
            train: FactorModel { u: train_u, v: train_v },
            test: FactorModel { u: test_u, v: test_v },
            clusters,
            prior,
        })
    }
}
