use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nslb::agents::exp3s::ExpParams;
use nslb::agents::{Agent, Exp3S, Exp4S};
use nslb::domain::{ActionId, Context, MeanRewardModel, StateId, TransitionMatrix};
use nslb::inference::{filter_update, filter_update_log, BeliefVector};
use nslb::metrics::segment_count;
use nslb::offline::{build_prior, filter_dense, filter_dense_fixpoint, Rating, RatingsTable};

fn table(cells: &[Option<u8>], users: usize) -> RatingsTable {
    let ratings = cells
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            v.map(|v| Rating {
                user: (i % users) as u32,
                movie: (i / users) as u32,
                value: v as f64,
            })
        })
        .collect();
    RatingsTable {
        ratings,
        genres: Default::default(),
    }
}

fn count_by<F: Fn(&Rating) -> u32>(t: &RatingsTable, key: F) -> std::collections::BTreeMap<u32, usize> {
    let mut m = std::collections::BTreeMap::new();
    for r in &t.ratings {
        *m.entry(key(r)).or_insert(0) += 1;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn filtering_only_removes(cells in prop::collection::vec(prop::option::of(1u8..=5), 120), mu in 0usize..8, mm in 0usize..8) {
        let t = table(&cells, 10);
        let once = filter_dense(&t, mu, mm);
        prop_assert!(once.ratings.iter().all(|r| t.ratings.contains(r)));
        let fixed = filter_dense_fixpoint(&t, mu, mm);
        prop_assert!(fixed.ratings.iter().all(|r| once.ratings.contains(r)));
        prop_assert!(count_by(&fixed, |r| r.user).values().all(|c| *c >= mu));
        prop_assert!(count_by(&fixed, |r| r.movie).values().all(|c| *c >= mm));
        // Stricter thresholds never keep more.
        prop_assert!(filter_dense_fixpoint(&t, mu + 1, mm).len() <= fixed.len());
    }

    #[test]
    fn prior_covariances_are_symmetric_psd(
        rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 6..30),
    ) {
        let assignments: Vec<usize> = (0..rows.len()).map(|i| i % 2).collect();
        let prior = build_prior(&rows, &assignments, 2, 800.0, 0.0025).unwrap();
        for cov in &prior.covariances {
            let m = DMatrix::from_fn(3, 3, |i, j| cov[i][j]);
            prop_assert!((&m - m.transpose()).abs().max() < 1e-12);
            let eig = SymmetricEigen::new(m);
            prop_assert!(eig.eigenvalues.min() > 0.0);
        }
        for row in &prior.transition {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_and_linear_filters_agree(
        b in prop::collection::vec(0.01f64..1.0, 3),
        phi in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 3),
        ll in prop::collection::vec(-20.0f64..0.0, 3),
    ) {
        let belief = BeliefVector::from_weights(b).unwrap();
        let phi = TransitionMatrix::from_weights(phi).unwrap();
        let lik: Vec<f64> = ll.iter().map(|x| x.exp()).collect();
        let lin = filter_update(&belief, &phi, &lik).unwrap();
        let (log, log_ev) = filter_update_log(&belief, &phi, &ll).unwrap();
        for (p, q) in lin.belief.probs().iter().zip(log.probs()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
        prop_assert!((lin.evidence.ln() - log_ev).abs() < 1e-9);
    }

    #[test]
    fn segments_count_changes(states in prop::collection::vec(0usize..3, 0..60)) {
        let ids: Vec<StateId> = states.iter().map(|s| StateId(*s)).collect();
        let changes = states.windows(2).filter(|w| w[0] != w[1]).count();
        let expected = if states.is_empty() { 0 } else { changes + 1 };
        prop_assert_eq!(segment_count(&ids), expected);
        prop_assert!(segment_count(&ids) <= states.len());
    }

    #[test]
    fn exp_agents_tolerate_out_of_range_rewards(
        seed in any::<u64>(),
        rewards in prop::collection::vec(-2.0f64..3.0, 1..50),
        gamma in 0.01f64..1.0,
    ) {
        let model = MeanRewardModel::tabular(3, 4, (0..12).map(|i| (i % 5) as f64 / 5.0).collect()).unwrap();
        let params = ExpParams { gamma, alpha: 0.01, reward_range: (0.0, 1.0) };
        let mut agents: Vec<Box<dyn Agent>> = vec![
            Box::new(Exp3S::new(model.clone(), params, ChaCha8Rng::seed_from_u64(seed)).unwrap()),
            Box::new(Exp4S::new(model, params, ChaCha8Rng::seed_from_u64(seed)).unwrap()),
        ];
        let ctx = Context::empty(3);
        for agent in agents.iter_mut() {
            for r in &rewards {
                let a: ActionId = agent.act(&ctx).unwrap();
                prop_assert!(a.0 < 3);
                agent.update(&ctx, a, *r).unwrap();
            }
        }
    }
}

#[test]
fn exp_probabilities_sum_to_one() {
    let model = MeanRewardModel::tabular(3, 4, (0..12).map(|i| (i % 5) as f64 / 5.0).collect()).unwrap();
    let params = ExpParams {
        gamma: 0.2,
        alpha: 0.01,
        reward_range: (0.0, 1.0),
    };
    let ctx = Context::empty(3);
    let mut e3 = Exp3S::new(model.clone(), params, ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut e4 = Exp4S::new(model, params, ChaCha8Rng::seed_from_u64(1)).unwrap();
    for t in 0..30 {
        let a = e3.act(&ctx).unwrap();
        e3.update(&ctx, a, (t % 3) as f64 / 2.0).unwrap();
        let a = e4.act(&ctx).unwrap();
        assert!((e4.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e4.probabilities().iter().all(|p| *p >= 0.2 / 3.0 - 1e-15));
        e4.update(&ctx, a, (t % 3) as f64 / 2.0).unwrap();
        for w in [e3.weights(), e3.probabilities(), e4.weights()] {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
