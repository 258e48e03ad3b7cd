use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use visrec_core::dataset::Rating;
use visrec_core::evalproto::{evaluate_with, make_splits, Family, Metric, CUTOFFS, RELEVANCE_THRESHOLD};
use visrec_core::recsys::InteractionMatrix;
use visrec_oracles::metrics::{protocol, standard, OracleUser};

struct Toy {
    known: InteractionMatrix,
    test: Vec<Rating>,
    scores: BTreeMap<u64, Vec<f64>>,
}

/// Coarse scores so ties are common.
fn toy(users: u64, items: u64, seed: u64) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratings = Vec::new();
    let mut test = Vec::new();
    let mut scores = BTreeMap::new();
    for u in 0..users {
        for i in 0..items {
            if rng.random_bool(0.3) {
                let r = Rating { user: u, item: i, rating: rng.random_range(1..=10) as f64 / 2.0, timestamp: 0 };
                if rng.random_bool(0.3) {
                    test.push(r);
                }
                ratings.push(r);
            }
        }
        scores.insert(u, (0..items).map(|_| rng.random_range(0..6) as f64 / 5.0).collect());
    }
    let catalog: Vec<u64> = (0..items).collect();
    Toy { known: InteractionMatrix::new(&ratings, &catalog).unwrap(), test, scores }
}

fn check(t: &Toy) {
    let metrics = evaluate_with(&t.known, &t.test, RELEVANCE_THRESHOLD, &CUTOFFS, |u| Ok(Some(t.scores[&u].clone()))).unwrap();
    let oracle_users: Vec<OracleUser> = t
        .scores
        .iter()
        .map(|(&u, s)| {
            let idx = t.known.user_index(u);
            OracleUser {
                scores: s.clone(),
                known: (0..s.len()).map(|i| idx.is_some_and(|ui| t.known.has_rated(ui, i))).collect(),
                relevant: t
                    .test
                    .iter()
                    .filter(|r| r.user == u && r.rating >= RELEVANCE_THRESHOLD)
                    .map(|r| r.item as usize)
                    .collect(),
            }
        })
        .filter(|o| !o.relevant.is_empty())
        .collect();
    let mut previous = 0.0;
    for n in CUTOFFS {
        let (rec, prec, map) = protocol(&oracle_users, n);
        assert_eq!(metrics.get(Family::Protocol, Metric::Recall, n), Some(rec), "protocol recall@{n}");
        assert_eq!(metrics.get(Family::Protocol, Metric::Precision, n), Some(prec));
        assert!((metrics.get(Family::Protocol, Metric::Map, n).unwrap() - map).abs() < 1e-12);
        // exact up to the rounding of one division
        assert!((prec * n as f64 - rec).abs() <= f64::EPSILON * rec);
        assert!(rec >= previous);
        previous = rec;

        let (rec, prec, map) = standard(&oracle_users, n);
        assert!((metrics.get(Family::Standard, Metric::Recall, n).unwrap() - rec).abs() < 1e-12);
        assert!((metrics.get(Family::Standard, Metric::Precision, n).unwrap() - prec).abs() < 1e-12);
        assert!((metrics.get(Family::Standard, Metric::Map, n).unwrap() - map).abs() < 1e-12, "standard map@{n}: {} vs {map}", metrics.get(Family::Standard, Metric::Map, n).unwrap());
    }
}

#[test]
fn three_user_toy_matches_enumeration() {
    check(&toy(3, 60, 1));
}

#[test]
fn many_random_toys_match_enumeration() {
    for seed in 0..40 {
        check(&toy(5, 45, 100 + seed));
    }
}

#[test]
fn split_proportions_on_synthetic_users() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ratings = Vec::new();
    for u in 0..100u64 {
        let mut items: Vec<u64> = (0..200).collect();
        rand::seq::SliceRandom::shuffle(items.as_mut_slice(), &mut rng);
        ratings.extend(items[..20].iter().map(|&i| Rating { user: u, item: i, rating: 3.0, timestamp: 0 }));
    }
    let r = InteractionMatrix::from_ratings(&ratings).unwrap();
    for split in make_splits(&r, 5, 11).unwrap() {
        let total = ratings.len() as f64;
        assert!((split.train.len() as f64 / total - 0.8).abs() <= 0.005);
        assert!((split.validation.len() as f64 / total - 0.1).abs() <= 0.005);
        assert!((split.test.len() as f64 / total - 0.1).abs() <= 0.005);
    }
}
