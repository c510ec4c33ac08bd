//! Contextual "superuser" environment built from matrix-factorized ratings.
//!
//! Each latent state is a real user. Arms are movies, one per sampled
//! genre; the agent sees training-set movie factors while rewards are
//! generated from test-set factors.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;

use crate::domain::{dot, ActionId, Context, StateId, TransitionMatrix};
use crate::envs::{EnvStreams, Environment, ModelKnowledge};
use crate::error::{Error, Result};
use crate::sampling::standard_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenreSampling {
    /// Distinct genres each round; needs at least as many genres as arms.
    #[default]
    WithoutReplacement,
    /// Genres drawn independently; works with small genre sets.
    WithReplacement,
}

/// Movie features and genre membership.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieCatalog {
    /// Features shown to agents, one row per movie.
    pub train_features: Vec<Vec<f64>>,
    /// Features that generate rewards, one row per movie.
    pub test_features: Vec<Vec<f64>>,
    /// Movies of each genre.
    pub genre_members: Vec<Vec<usize>>,
}

impl MovieCatalog {
    pub fn new(
        train_features: Vec<Vec<f64>>,
        test_features: Vec<Vec<f64>>,
        movie_genres: &[Vec<usize>],
    ) -> Result<Self> {
        let n = train_features.len();
        if n == 0 || test_features.len() != n || movie_genres.len() != n {
            return Err(Error::invalid("catalog needs train/test features and genres per movie"));
        }
        let d = train_features[0].len();
        if train_features.iter().chain(&test_features).any(|r| r.len() != d) {
            return Err(Error::invalid("movie features have inconsistent dimensions"));
        }
        let num_genres = movie_genres.iter().flatten().map(|g| g + 1).max().unwrap_or(0);
        let mut genre_members = vec![Vec::new(); num_genres];
        for (m, gs) in movie_genres.iter().enumerate() {
            for &g in gs {
                genre_members[g].push(m);
            }
        }
        genre_members.retain(|m| !m.is_empty());
        Ok(MovieCatalog {
            train_features,
            test_features,
            genre_members,
        })
    }

    pub fn num_movies(&self) -> usize {
        self.train_features.len()
    }

    pub fn num_genres(&self) -> usize {
        self.genre_members.len()
    }

    pub fn dim(&self) -> usize {
        self.train_features[0].len()
    }
}

/// Samples `arms` genres, then one movie uniformly within each. Returns
/// the context (training features) and the movie index of each arm.
pub fn sample_movie_context<R: Rng + ?Sized>(
    catalog: &MovieCatalog,
    arms: usize,
    sampling: GenreSampling,
    rng: &mut R,
) -> Result<(Context, Vec<usize>)> {
    let g = catalog.num_genres();
    let genres: Vec<usize> = match sampling {
        GenreSampling::WithoutReplacement => {
            if g < arms {
                return Err(Error::config(format!(
                    "catalog has {g} genres, need {arms} distinct genres per round"
                )));
            }
            index::sample(rng, g, arms).into_vec()
        }
        GenreSampling::WithReplacement => {
            if g == 0 {
                return Err(Error::config("catalog has no genres"));
            }
            (0..arms).map(|_| rng.random_range(0..g)).collect()
        }
    };
    let movies: Vec<usize> = genres
        .iter()
        .map(|&genre| {
            let members = &catalog.genre_members[genre];
            members[rng.random_range(0..members.len())]
        })
        .collect();
    let d = catalog.dim();
    let mut features = Vec::with_capacity(arms * d);
    for &m in &movies {
        features.extend_from_slice(&catalog.train_features[m]);
    }
    Ok((Context::new(arms, d, features)?, movies))
}

/// `0.9 J + 0.1 K`, where `J` stays put with probability `1 - p_change` and
/// otherwise moves uniformly, and `K(s, s') ∝ exp(-||u_s' - u_s||^2)`
/// favours similar states.
pub fn build_superuser_transition(state_vectors: &[Vec<f64>], p_change: f64) -> Result<TransitionMatrix> {
    let n = state_vectors.len();
    if n < 2 {
        return Err(Error::invalid("superuser transition needs at least two states"));
    }
    if !(p_change > 0.0 && p_change < 1.0) {
        return Err(Error::invalid(format!("change probability {p_change} not in (0, 1)")));
    }
    let rows = (0..n)
        .map(|s| {
            let k: Vec<f64> = (0..n)
                .map(|t| {
                    let d2: f64 = state_vectors[s]
                        .iter()
                        .zip(&state_vectors[t])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (-d2).exp()
                })
                .collect();
            let k_total: f64 = k.iter().sum();
            (0..n)
                .map(|t| {
                    let j = if s == t {
                        1.0 - p_change
                    } else {
                        p_change / (n as f64 - 1.0)
                    };
                    0.9 * j + 0.1 * k[t] / k_total
                })
                .collect()
        })
        .collect();
    TransitionMatrix::from_weights(rows)
}

#[derive(Debug, Clone)]
pub struct SuperuserEnvConfig {
    /// Test-set user factors, one per latent state.
    pub state_user_vectors: Vec<Vec<f64>>,
    pub catalog: Arc<MovieCatalog>,
    pub arms_per_round: usize,
    pub reward_variance: f64,
    pub transition: TransitionMatrix,
    pub genre_sampling: GenreSampling,
}

pub struct SuperuserEnv {
    config: SuperuserEnvConfig,
    knowledge: ModelKnowledge,
    state: StateId,
    round: usize,
    context: Context,
    movies: Vec<usize>,
    sigma: f64,
    streams: EnvStreams,
}

impl SuperuserEnv {
    pub fn new(config: SuperuserEnvConfig, knowledge: ModelKnowledge, mut streams: EnvStreams) -> Result<Self> {
        let n = config.state_user_vectors.len();
        if n == 0 || config.transition.num_states() != n || knowledge.initial.num_states() != n {
            return Err(Error::config("superuser states, transition and prior disagree"));
        }
        if !(config.reward_variance > 0.0) {
            return Err(Error::config("reward variance must be positive"));
        }
        if config.arms_per_round == 0 || config.arms_per_round > config.catalog.num_movies() {
            return Err(Error::config("arms per round must be in [1, catalog size]"));
        }
        let d = config.catalog.dim();
        if config.state_user_vectors.iter().any(|u| u.len() != d) {
            return Err(Error::config("user and movie factors differ in dimension"));
        }
        let state = knowledge.initial.sample(&mut streams.latent);
        Ok(SuperuserEnv {
            sigma: config.reward_variance.sqrt(),
            context: Context::empty(config.arms_per_round),
            movies: Vec::new(),
            config,
            knowledge,
            state,
            round: 0,
            streams,
        })
    }

    /// Movie index behind each arm of the current round.
    pub fn movies(&self) -> &[usize] {
        &self.movies
    }
}

impl Environment for SuperuserEnv {
    fn name(&self) -> &str {
        "superuser"
    }

    fn num_arms(&self) -> usize {
        self.config.arms_per_round
    }

    fn num_states(&self) -> usize {
        self.config.state_user_vectors.len()
    }

    fn context_dim(&self) -> usize {
        self.config.catalog.dim()
    }

    fn knowledge(&self) -> &ModelKnowledge {
        &self.knowledge
    }

    fn begin_round(&mut self, t: usize) -> Context {
        assert_eq!(t, self.round + 1, "rounds must be consecutive");
        if t > 1 {
            self.state = self
                .config
                .transition
                .sample_next(self.state, &mut self.streams.latent);
        }
        self.round = t;
        let (ctx, movies) = sample_movie_context(
            &self.config.catalog,
            self.config.arms_per_round,
            self.config.genre_sampling,
            &mut self.streams.context,
        )
        .expect("catalog was validated against the genre sampling mode");
        self.context = ctx.clone();
        self.movies = movies;
        ctx
    }

    fn state(&self) -> StateId {
        self.state
    }

    fn mean_reward(&self, a: ActionId) -> f64 {
        let movie = self.movies[a.0];
        dot(
            &self.config.state_user_vectors[self.state.0],
            &self.config.catalog.test_features[movie],
        )
    }

    fn pull(&mut self, a: ActionId) -> f64 {
        self.mean_reward(a) + self.sigma * standard_normal(&mut self.streams.reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_per_genre(g: usize) -> MovieCatalog {
        let feats: Vec<Vec<f64>> = (0..g).map(|m| vec![m as f64, 1.0]).collect();
        let genres: Vec<Vec<usize>> = (0..g).map(|m| vec![m]).collect();
        MovieCatalog::new(feats.clone(), feats, &genres).unwrap()
    }

    #[test]
    fn forced_permutation() {
        let cat = one_per_genre(20);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ctx, mut movies) =
            sample_movie_context(&cat, 20, GenreSampling::WithoutReplacement, &mut rng).unwrap();
        assert_eq!(ctx.num_arms(), 20);
        movies.sort_unstable();
        assert_eq!(movies, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_genres_is_config_error() {
        let cat = one_per_genre(18);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            sample_movie_context(&cat, 20, GenreSampling::WithoutReplacement, &mut rng),
            Err(Error::Config(_))
        ));
        assert!(sample_movie_context(&cat, 20, GenreSampling::WithReplacement, &mut rng).is_ok());
    }

    #[test]
    fn context_is_deterministic() {
        let cat = one_per_genre(25);
        let a = sample_movie_context(&cat, 20, GenreSampling::WithoutReplacement, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_movie_context(&cat, 20, GenreSampling::WithoutReplacement, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn identical_users_give_uniform_kernel() {
        let u = vec![vec![0.3, -0.2]; 4];
        let m = build_superuser_transition(&u, 0.0025).unwrap();
        let row = m.row(StateId(1));
        assert!((row[1] - (0.9 * 0.9975 + 0.1 * 0.25)).abs() < 1e-12);
        assert!((row[0] - (0.9 * 0.0025 / 3.0 + 0.1 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn small_p_limit() {
        let u = vec![vec![1.0]; 3];
        let m = build_superuser_transition(&u, 1e-12).unwrap();
        assert!((m.prob(StateId(0), StateId(0)) - (0.9 + 0.1 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_superuser_transition(&[vec![0.0]], 0.1).is_err());
        assert!(build_superuser_transition(&[vec![0.0], vec![1.0]], 0.0).is_err());
    }
}
