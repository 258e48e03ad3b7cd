//! Offline evaluation: stratified random splits, one-plus-unrated ranking,
//! and recall/precision/MAP at fixed cutoffs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Rating;
use crate::error::{Error, Result};
use crate::recsys::{score, InteractionMatrix, SimilarityModel};

pub const CUTOFFS: [usize; 3] = [1, 10, 20];
pub const RELEVANCE_THRESHOLD: f64 = 4.0;
/// Users with fewer ratings stay entirely in the training set.
pub const MIN_RATINGS_TO_SPLIT: usize = 3;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub fold: usize,
    pub seed: u64,
    pub train: Vec<Rating>,
    pub validation: Vec<Rating>,
    pub test: Vec<Rating>,
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Independent 80/10/10 splits, stratified per user.
pub fn make_splits(r: &InteractionMatrix, folds: usize, seed: u64) -> Result<Vec<Split>> {
    if r.nnz() == 0 {
        return Err(Error::EmptyInput("no ratings to split"));
    }
    if folds == 0 {
        return Err(Error::Parameter("at least one fold is required".into()));
    }
    let ratings = r.to_ratings();
    let mut by_user: BTreeMap<u64, Vec<Rating>> = BTreeMap::new();
    for rating in ratings {
        by_user.entry(rating.user).or_default().push(rating);
    }
    Ok((0..folds)
        .map(|fold| {
            let seed = fold_seed(seed, fold);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut split = Split {
                fold,
                seed,
                train: Vec::new(),
                validation: Vec::new(),
                test: Vec::new(),
            };
            for user_ratings in by_user.values() {
                let mut shuffled = user_ratings.clone();
                shuffled.shuffle(&mut rng);
                let n = shuffled.len();
                let held = if n < MIN_RATINGS_TO_SPLIT { 0 } else { (n as f64 * 0.1).round() as usize };
                split.test.extend(shuffled.drain(..held));
                split.validation.extend(shuffled.drain(..held));
                split.train.extend(shuffled);
            }
            split
        })
        .collect())
}

/// 1-based rank of `test` among itself and `candidates`; any candidate
/// scoring at least as high is placed ahead of it.
pub fn rank_against(scores: &[f64], test: usize, candidates: impl IntoIterator<Item = usize>) -> usize {
    let s = scores[test];
    1 + candidates.into_iter().filter(|&c| c != test && scores[c] >= s).count()
}

/// Rank of `test_item` against every item `user` has not rated in `known`,
/// scored from the training interactions.
pub fn rank_one_plus_unrated(
    model: &SimilarityModel,
    train: &InteractionMatrix,
    known: &InteractionMatrix,
    user: u64,
    test_item: u64,
) -> Result<usize> {
    let scores = score(model, train, user)?;
    let u = known.user_index(user).ok_or(Error::MissingUser(user))?;
    let t = known
        .item_index(test_item)
        .ok_or_else(|| Error::Alignment(format!("test item {test_item} not in the catalog")))?;
    Ok(rank_against(&scores, t, (0..known.n_items()).filter(|&i| !known.has_rated(u, i))))
}

/// Ranks for one user's relevant held-out items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserRanks {
    pub user: u64,
    /// One-plus-unrated rank of each item.
    pub protocol: Vec<usize>,
    /// Positions in the user's single list over unrated plus held-out items.
    pub standard: Vec<usize>,
}

/// `known(i)` tells whether the user rated item `i` anywhere; `relevant`
/// are dense indices of held-out relevant items.
pub fn user_ranks(user: u64, scores: &[f64], known: impl Fn(usize) -> bool, relevant: &[usize]) -> UserRanks {
    let unrated: Vec<usize> = (0..scores.len()).filter(|&i| !known(i)).collect();
    let protocol = relevant
        .iter()
        .map(|&t| rank_against(scores, t, unrated.iter().copied()))
        .collect();
    let mut standard: Vec<usize> = relevant
        .iter()
        .map(|&k| {
            let above_rel = relevant
                .iter()
                .filter(|&&j| j != k && (scores[j] > scores[k] || (scores[j] == scores[k] && j < k)))
                .count();
            rank_against(scores, k, unrated.iter().copied()) + above_rel
        })
        .collect();
    standard.sort_unstable();
    UserRanks {
        user,
        protocol,
        standard,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Per held-out item, one candidate list each.
    Protocol,
    /// Per user, one top-N list each.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Recall,
    Precision,
    Map,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Protocol, Family::Standard];

    pub fn name(self) -> &'static str {
        match self {
            Family::Protocol => "protocol",
            Family::Standard => "standard",
        }
    }
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Recall, Metric::Precision, Metric::Map];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Recall => "recall",
            Metric::Precision => "precision",
            Metric::Map => "map",
        }
    }
}

pub type MetricKey = (Family, Metric, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub values: BTreeMap<MetricKey, f64>,
    pub tests: usize,
    pub users: usize,
    /// Test ratings whose user had nothing in training.
    pub skipped: usize,
}

impl FoldMetrics {
    pub fn get(&self, family: Family, metric: Metric, cutoff: usize) -> Option<f64> {
        self.values.get(&(family, metric, cutoff)).copied()
    }
}

pub fn compute_metrics(users: &[UserRanks], cutoffs: &[usize]) -> Result<FoldMetrics> {
    if let Some(&c) = cutoffs.iter().find(|&&c| c < 1) {
        return Err(Error::Parameter(format!("cutoff {c} must be at least 1")));
    }
    let tests: usize = users.iter().map(|u| u.protocol.len()).sum();
    if tests == 0 {
        return Err(Error::EmptyInput("no ranked test items"));
    }
    let rated_users: Vec<&UserRanks> = users.iter().filter(|u| !u.standard.is_empty()).collect();
    let mut values = BTreeMap::new();
    for &n in cutoffs {
        let hits = users.iter().flat_map(|u| &u.protocol).filter(|&&r| r <= n).count();
        let rr: f64 = users.iter().flat_map(|u| &u.protocol).filter(|&&r| r <= n).map(|&r| 1.0 / r as f64).sum();
        let recall = hits as f64 / tests as f64;
        values.insert((Family::Protocol, Metric::Recall, n), recall);
        values.insert((Family::Protocol, Metric::Precision, n), recall / n as f64);
        values.insert((Family::Protocol, Metric::Map, n), rr / tests as f64);

        let (mut rec, mut prec, mut map) = (0.0, 0.0, 0.0);
        for u in &rated_users {
            // standard ranks are sorted, so the i-th hit has i previous hits
            let mut hits = 0usize;
            let mut ap = 0.0;
            for &r in u.standard.iter().take_while(|&&r| r <= n) {
                hits += 1;
                ap += hits as f64 / r as f64;
            }
            rec += hits as f64 / u.standard.len() as f64;
            prec += hits as f64 / n as f64;
            map += ap / u.standard.len().min(n) as f64;
        }
        let m = rated_users.len() as f64;
        values.insert((Family::Standard, Metric::Recall, n), rec / m);
        values.insert((Family::Standard, Metric::Precision, n), prec / m);
        values.insert((Family::Standard, Metric::Map, n), map / m);
    }
    Ok(FoldMetrics {
        values,
        tests,
        users: rated_users.len(),
        skipped: 0,
    })
}

/// Ranks every relevant test rating with the given scorer. `scorer(user)`
/// returns scores over `known.items()`, or `None` if the user cannot be
/// scored (counted as skipped).
pub fn evaluate_with<F>(known: &InteractionMatrix, test: &[Rating], threshold: f64, cutoffs: &[usize], mut scorer: F) -> Result<FoldMetrics>
where
    F: FnMut(u64) -> Result<Option<Vec<f64>>>,
{
    let mut per_user: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for t in test.iter().filter(|t| t.rating >= threshold) {
        let item = known
            .item_index(t.item)
            .ok_or_else(|| Error::Alignment(format!("test item {} not in the catalog", t.item)))?;
        per_user.entry(t.user).or_default().push(item);
    }
    let mut ranks = Vec::with_capacity(per_user.len());
    let mut skipped = 0;
    for (user, items) in per_user {
        let u = known.user_index(user).ok_or(Error::MissingUser(user))?;
        match scorer(user)? {
            Some(scores) => ranks.push(user_ranks(user, &scores, |i| known.has_rated(u, i), &items)),
            None => skipped += items.len(),
        }
    }
    let mut metrics = compute_metrics(&ranks, cutoffs)?;
    metrics.skipped = skipped;
    Ok(metrics)
}

/// `train` and `known` must share the model's item catalog.
pub fn evaluate_model(
    model: &SimilarityModel,
    train: &InteractionMatrix,
    known: &InteractionMatrix,
    test: &[Rating],
    threshold: f64,
    cutoffs: &[usize],
) -> Result<FoldMetrics> {
    evaluate_with(known, test, threshold, cutoffs, |user| match score(model, train, user) {
        Ok(s) => Ok(Some(s)),
        Err(Error::MissingUser(_)) => Ok(None),
        Err(e) => Err(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Normal-approximation 95% half-width of the mean over folds.
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub cutoffs: Vec<usize>,
    pub folds: Vec<FoldMetrics>,
}

impl EvalReport {
    pub fn new(label: impl Into<String>, cutoffs: &[usize], folds: Vec<FoldMetrics>) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::EmptyInput("no folds in report"));
        }
        Ok(Self {
            label: label.into(),
            cutoffs: cutoffs.to_vec(),
            folds,
        })
    }

    pub fn keys(&self) -> impl Iterator<Item = MetricKey> + '_ {
        Family::ALL.into_iter().flat_map(move |f| {
            Metric::ALL
                .into_iter()
                .flat_map(move |m| self.cutoffs.iter().map(move |&n| (f, m, n)))
        })
    }

    pub fn fold_values(&self, key: MetricKey) -> Vec<f64> {
        self.folds.iter().map(|f| f.values.get(&key).copied().unwrap_or(f64::NAN)).collect()
    }

    pub fn summary(&self, key: MetricKey) -> Summary {
        let v = self.fold_values(key);
        let k = v.len() as f64;
        let mean = v.iter().sum::<f64>() / k;
        let ci95 = if v.len() < 2 {
            0.0
        } else {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            Z95 * var.sqrt() / k.sqrt()
        };
        Summary { mean, ci95 }
    }

    /// `family,metric,cutoff,fold,value`; fold is an index, `mean` or `ci95`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["family", "metric", "cutoff", "fold", "value"])?;
        for key @ (family, metric, n) in self.keys() {
            let (f, m, c) = (family.name(), metric.name(), n.to_string());
            for (i, v) in self.fold_values(key).into_iter().enumerate() {
                w.write_record([f, m, &c, &i.to_string(), &format!("{v:.12}")])?;
            }
            let s = self.summary(key);
            w.write_record([f, m, &c, "mean", &format!("{:.12}", s.mean)])?;
            w.write_record([f, m, &c, "ci95", &format!("{:.12}", s.ci95)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv_values(bytes: &[u8]) -> Result<HashMap<(String, String, usize, String), f64>> {
        let mut out = HashMap::new();
        for (line, rec) in csv::Reader::from_reader(bytes).records().enumerate() {
            let rec = rec?;
            let parse_err = || Error::format(line + 2, "malformed report row");
            let cutoff = rec.get(2).and_then(|c| c.parse().ok()).ok_or_else(parse_err)?;
            let value = rec.get(4).and_then(|c| c.parse().ok()).ok_or_else(parse_err)?;
            out.insert((rec[0].to_string(), rec[1].to_string(), cutoff, rec[3].to_string()), value);
        }
        Ok(out)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} ({} folds)", self.label, self.folds.len())?;
        writeln!(f, "{:<10} {:<10} {:>4}  {:>8}  {:>8}", "family", "metric", "N", "mean", "±ci95")?;
        for key @ (family, metric, n) in self.keys() {
            let s = self.summary(key);
            writeln!(f, "{:<10} {:<10} {:>4}  {:>8.4}  {:>8.4}", family.name(), metric.name(), n, s.mean, s.ci95)?;
        }
        let skipped: usize = self.folds.iter().map(|f| f.skipped).sum();
        if skipped > 0 {
            writeln!(f, "skipped test ratings (user absent from training): {skipped}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rating(user: u64, item: u64, rating: f64) -> Rating {
        Rating { user, item, rating, timestamp: 0 }
    }

    #[test]
    fn ten_ratings_split_eight_one_one() {
        let ratings: Vec<Rating> = (0..10).map(|i| rating(1, i, 4.0)).chain([rating(2, 0, 3.0), rating(2, 1, 3.0)]).collect();
        let r = InteractionMatrix::from_ratings(&ratings).unwrap();
        let splits = make_splits(&r, 5, 3).unwrap();
        for s in &splits {
            let count = |v: &[Rating], u| v.iter().filter(|x| x.user == u).count();
            assert_eq!((count(&s.train, 1), count(&s.validation, 1), count(&s.test, 1)), (8, 1, 1));
            assert_eq!(count(&s.train, 2), 2);
        }
        assert_eq!(splits, make_splits(&r, 5, 3).unwrap());
        assert_ne!(splits[0].test, splits[1].test);
    }

    #[test]
    fn split_sets_partition_the_ratings() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ratings: Vec<Rating> = (0..100)
            .flat_map(|u| (0..60).filter(|_| rng.random_bool(0.3)).map(move |i| rating(u, i, 3.0)).collect::<Vec<_>>())
            .collect();
        let r = InteractionMatrix::from_ratings(&ratings).unwrap();
        for s in make_splits(&r, 2, 9).unwrap() {
            let mut all: Vec<(u64, u64)> = [&s.train, &s.validation, &s.test].iter().flat_map(|v| v.iter().map(|x| (x.user, x.item))).collect();
            all.sort_unstable();
            let mut expect: Vec<(u64, u64)> = ratings.iter().map(|x| (x.user, x.item)).collect();
            expect.sort_unstable();
            assert_eq!(all, expect);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_against(&[0.9, 0.1, 0.2], 0, [1, 2]), 1);
        assert_eq!(rank_against(&[0.5; 6], 0, 1..6), 6);
        // hand sort: 0.7 > 0.4 = 0.4(test, loses tie) > 0.3 > 0.1
        assert_eq!(rank_against(&[0.4, 0.7, 0.1, 0.4, 0.3], 0, [1, 2, 3, 4]), 3);
    }

    #[test]
    fn perfect_and_total_miss_rankers() {
        let perfect = [UserRanks { user: 1, protocol: vec![1, 1], standard: vec![1, 2] }];
        let m = compute_metrics(&perfect, &CUTOFFS).unwrap();
        for n in CUTOFFS {
            assert_eq!(m.get(Family::Protocol, Metric::Recall, n), Some(1.0));
            assert_eq!(m.get(Family::Protocol, Metric::Map, n), Some(1.0));
        }
        assert_eq!(m.get(Family::Protocol, Metric::Precision, 10), Some(0.1));
        let miss = [UserRanks { user: 1, protocol: vec![40, 21], standard: vec![30, 31] }];
        let m = compute_metrics(&miss, &CUTOFFS).unwrap();
        assert!(m.values.values().all(|&v| v == 0.0));
        assert!(matches!(compute_metrics(&perfect, &[0, 1]), Err(Error::Parameter(_))));
        assert!(matches!(compute_metrics(&[], &CUTOFFS), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn random_scorer_recall_matches_cutoff_over_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 1000;
        let hits = (0..trials)
            .filter(|_| {
                let scores: Vec<f64> = (0..100).map(|_| rng.random()).collect();
                rank_against(&scores, 0, 1..100) <= 10
            })
            .count();
        assert!((hits as f64 / trials as f64 - 0.1).abs() <= 0.03);
    }

    #[test]
    fn report_csv_and_interval() {
        let fold = |r: usize| compute_metrics(&[UserRanks { user: 1, protocol: vec![r], standard: vec![r] }], &CUTOFFS).unwrap();
        let report = EvalReport::new("toy", &CUTOFFS, (1..=5).map(fold).collect()).unwrap();
        let key = (Family::Protocol, Metric::Map, 10);
        let s = report.summary(key);
        let v = report.fold_values(key);
        let max_dev = v.iter().map(|x| (x - s.mean).abs()).fold(0.0, f64::max);
        assert!(s.ci95 <= max_dev);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let parsed = EvalReport::read_csv_values(&buf).unwrap();
        assert_eq!(parsed.len(), 2 * 3 * 3 * 7);
        assert!((parsed[&("protocol".into(), "map".into(), 10, "2".into())] - 1.0 / 3.0).abs() < 1e-12);
        assert!(report.to_string().contains("standard"));
    }
}
