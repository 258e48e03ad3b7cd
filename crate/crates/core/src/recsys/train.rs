use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FeatureMatrix, InteractionMatrix, SimilarityModel};
use crate::error::{Error, Result};

/// Upper bound on feature-phase gradient substeps per epoch.
pub const MAX_FEATURE_SUBSTEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Weight of the ranking loss; `1 - alpha` weights feature reconstruction.
    pub alpha: f64,
    /// L2 penalty on the similarity matrix.
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Ratings at or above this count as positives.
    pub relevance_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            gamma: 1e-3,
            learning_rate: 0.05,
            epochs: 30,
            seed: 42,
            relevance_threshold: 4.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma {} must be a finite non-negative number", self.gamma));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !self.relevance_threshold.is_finite() {
            return bad("relevance threshold must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Total objective after each epoch.
    pub losses: Vec<f64>,
    pub positives: usize,
    pub feature_substeps: usize,
}

/// Draws (user, positive item, unrated item) triples.
#[derive(Debug, Clone)]
pub struct BprSampler<'a> {
    r: &'a InteractionMatrix,
    positives: Vec<(usize, usize)>,
}

impl<'a> BprSampler<'a> {
    pub fn new(r: &'a InteractionMatrix, threshold: f64) -> Self {
        let positives = (0..r.n_users())
            .flat_map(|u| {
                r.row(u)
                    .iter()
                    .filter(|e| e.rating >= threshold)
                    .map(move |e| (u, e.item))
            })
            .filter(|&(u, _)| r.row(u).len() < r.n_items())
            .collect();
        Self { r, positives }
    }

    pub fn positives(&self) -> usize {
        self.positives.len()
    }

    /// `None` only when there are no usable positives.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<(usize, usize, usize)> {
        if self.positives.is_empty() {
            return None;
        }
        let (u, i) = self.positives[rng.random_range(0..self.positives.len())];
        loop {
            let j = rng.random_range(0..self.r.n_items());
            if !self.r.has_rated(u, j) {
                return Some((u, i, j));
            }
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn zero_diagonal(s: &mut DMatrix<f64>) {
    s.fill_diagonal(0.0);
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn top_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618).fract());
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = g * &v;
        let norm = w.norm();
        if norm < 1e-300 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Power iteration approaches from below; pad for a safe step bound.
    lambda * 1.01
}

struct FeatureTerm {
    g: DMatrix<f64>,
    scale: f64,
    lipschitz: f64,
}

impl FeatureTerm {
    fn new(f: &DMatrix<f64>, alpha: f64, gamma: f64) -> Self {
        let (n, d) = f.shape();
        let g = f * f.transpose();
        let scale = (1.0 - alpha) / (n * d.max(1)) as f64;
        let lipschitz = 2.0 * scale * top_eigenvalue(&g) + 2.0 * gamma;
        Self { g, scale, lipschitz }
    }

    /// `scale * ‖F - Sᵀ F‖²` written through the Gram matrix.
    fn loss(&self, s: &DMatrix<f64>) -> f64 {
        let e = DMatrix::identity(s.nrows(), s.ncols()) - s;
        let ge = &self.g * &e;
        self.scale * e.component_mul(&ge).sum()
    }
}

/// Learns the item-item similarity matrix. Each epoch interleaves one pass
/// of pairwise ranking SGD with gradient steps on the feature term.
pub fn train_collective_slim(
    r: &InteractionMatrix,
    features: Option<&FeatureMatrix>,
    config: &TrainConfig,
) -> Result<(SimilarityModel, TrainReport)> {
    config.validate()?;
    let n = r.n_items();
    if n == 0 {
        return Err(Error::EmptyInput("no items"));
    }
    let feature_term = match features {
        Some(f) => {
            if f.item_ids() != r.items() {
                return Err(Error::Alignment(format!(
                    "feature rows cover {} items, interaction catalog has {}",
                    f.item_ids().len(),
                    n
                )));
            }
            (config.alpha < 1.0).then(|| FeatureTerm::new(&f.standardized(), config.alpha, config.gamma))
        }
        None if config.alpha < 1.0 => {
            return Err(Error::Parameter("alpha < 1 requires item features".into()));
        }
        None => None,
    };

    let sampler = BprSampler::new(r, config.relevance_threshold);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut s = DMatrix::<f64>::zeros(n, n);
    let lr = config.learning_rate;
    let (alpha, gamma) = (config.alpha, config.gamma);
    let steps = sampler.positives();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut substeps_used = 0;

    for epoch in 1..=config.epochs {
        let mut ranking_loss = 0.0;
        for _ in 0..steps {
            let Some((u, i, j)) = sampler.sample(&mut rng) else { break };
            let row = r.row(u);
            let x: f64 = row.iter().map(|e| e.rating * (s[(e.item, i)] - s[(e.item, j)])).sum();
            ranking_loss += softplus(-x);
            let g = alpha * sigmoid(-x);
            for e in row {
                let l = e.item;
                if l != i {
                    let sli = s[(l, i)];
                    s[(l, i)] = sli + lr * (g * e.rating - 2.0 * gamma * sli);
                }
                let slj = s[(l, j)];
                s[(l, j)] = slj - lr * (g * e.rating + 2.0 * gamma * slj);
            }
        }
        if steps > 0 {
            ranking_loss /= steps as f64;
        }

        let mut objective = alpha * ranking_loss + gamma * s.norm_squared();
        if let Some(term) = &feature_term {
            let budget = lr * steps.max(1) as f64;
            let m = ((budget * term.lipschitz).ceil() as usize).clamp(1, MAX_FEATURE_SUBSTEPS);
            let eta = (budget / m as f64).min(1.0 / term.lipschitz.max(1e-300));
            for _ in 0..m {
                // d/dS of scale‖F - SᵀF‖² + γ‖S‖² = 2 scale G (S - I) + 2γ S
                let mut grad = &term.g * &s;
                grad -= &term.g;
                grad *= 2.0 * term.scale;
                grad += &s * (2.0 * gamma);
                s -= grad * eta;
                zero_diagonal(&mut s);
            }
            substeps_used += m;
            objective += term.loss(&s);
        }
        if !objective.is_finite() || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        losses.push(objective);
    }

    let family = features.map(FeatureMatrix::family);
    let model = SimilarityModel::new(r.items().to_vec(), s, *config, family)?;
    Ok((
        model,
        TrainReport {
            losses,
            positives: steps,
            feature_substeps: substeps_used,
        },
    ))
}

/// Pure ranking SLIM: no feature term regardless of `alpha`.
pub fn train_bpr_slim(r: &InteractionMatrix, config: &TrainConfig) -> Result<(SimilarityModel, TrainReport)> {
    let config = TrainConfig { alpha: 1.0, ..*config };
    train_collective_slim(r, None, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Rating;
    use crate::features::FeatureKind;
    use crate::recsys::{recommend, score};
    use rand::rngs::StdRng;
    use visrec_oracles::linalg::{reconstruction_error, zero_diagonal_least_squares};

    fn rating(user: u64, item: u64, rating: f64) -> Rating {
        Rating { user, item, rating, timestamp: 0 }
    }

    /// Two disjoint blocks of users and items; each user rates most of its block.
    fn blocks(users: u64, items: u64, seed: u64) -> Vec<Rating> {
        let mut rng = StdRng::seed_from_u64(seed);
        let half = items / 2;
        let mut out = Vec::new();
        for u in 0..users {
            let block = u % 2;
            for it in 0..half {
                if rng.random_bool(0.7) {
                    out.push(rating(u, block * half + it, [4.0, 4.5, 5.0][rng.random_range(0..3)]));
                }
            }
        }
        out
    }

    fn features(items: &[u64], d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let data = DMatrix::from_fn(items.len(), d, |_, _| rng.random_range(-1.0..1.0));
        FeatureMatrix::new(items.to_vec(), data, FeatureKind::Fused).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for cfg in [
            TrainConfig { alpha: 1.5, ..Default::default() },
            TrainConfig { gamma: -1.0, ..Default::default() },
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn sampler_never_returns_a_rated_negative() {
        let r = InteractionMatrix::from_ratings(&blocks(20, 12, 1)).unwrap();
        let sampler = BprSampler::new(&r, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5000 {
            let (u, i, j) = sampler.sample(&mut rng).unwrap();
            assert!(r.row(u).iter().any(|e| e.item == i && e.rating >= 4.0));
            assert!(!r.has_rated(u, j));
        }
    }

    #[test]
    fn alpha_one_matches_pure_ranking_bitwise() {
        let r = InteractionMatrix::from_ratings(&blocks(30, 16, 2)).unwrap();
        let f = features(r.items(), 5, 9);
        let cfg = TrainConfig { alpha: 1.0, epochs: 5, ..Default::default() };
        let (a, _) = train_collective_slim(&r, Some(&f), &cfg).unwrap();
        let (b, _) = train_bpr_slim(&r, &cfg).unwrap();
        assert!(a.similarity().iter().zip(b.similarity().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn deterministic_with_zero_diagonal() {
        let r = InteractionMatrix::from_ratings(&blocks(30, 16, 4)).unwrap();
        let f = features(r.items(), 5, 9);
        let cfg = TrainConfig { epochs: 4, ..Default::default() };
        let (a, ra) = train_collective_slim(&r, Some(&f), &cfg).unwrap();
        let (b, rb) = train_collective_slim(&r, Some(&f), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(a.similarity().diagonal().iter().all(|&v| v == 0.0));
        let (c, _) = train_collective_slim(&r, Some(&f), &TrainConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn feature_only_objective_reaches_least_squares_optimum() {
        // Need interactions for the step budget; alpha = 0 ignores their content.
        let ratings: Vec<Rating> = (0..4).flat_map(|u| (0..3).map(move |i| rating(u, (u + i) % 5, 5.0))).collect();
        let r = InteractionMatrix::new(&ratings, &[0, 1, 2, 3, 4]).unwrap();
        let f = features(r.items(), 7, 11);
        let cfg = TrainConfig { alpha: 0.0, gamma: 0.0, learning_rate: 0.5, epochs: 400, ..Default::default() };
        let (model, report) = train_collective_slim(&r, Some(&f), &cfg).unwrap();

        let std = f.standardized();
        let rows: Vec<Vec<f64>> = std.row_iter().map(|row| row.iter().copied().collect()).collect();
        let optimum = reconstruction_error(&rows, &zero_diagonal_least_squares(&rows, 0.0));
        let s = model.similarity();
        let learned: Vec<Vec<f64>> = (0..5).map(|l| (0..5).map(|t| s[(l, t)]).collect()).collect();
        let achieved = reconstruction_error(&rows, &learned);
        assert!(achieved <= optimum * 1.02 + 1e-9, "achieved {achieved}, optimum {optimum}");
        let last = *report.losses.last().unwrap();
        assert!((last - achieved / 35.0).abs() < 1e-9 * (1.0 + last));
    }

    #[test]
    fn ranking_loss_decreases_and_blocks_are_learned() {
        let r = InteractionMatrix::from_ratings(&blocks(40, 16, 5)).unwrap();
        let cfg = TrainConfig { epochs: 30, ..Default::default() };
        let (model, report) = train_bpr_slim(&r, &cfg).unwrap();
        assert!(report.losses.last().unwrap() < &report.losses[0]);
        // user 0 lives in block 0 (items 0..8)
        let top = recommend(&model, &r, 0, 3).unwrap();
        let rated = r.user_row(0).unwrap().len();
        if rated < 8 {
            assert!(top[0].0 < 8, "{top:?}");
        }
        let scores = score(&model, &r, 0).unwrap();
        let in_block: f64 = scores[..8].iter().sum::<f64>() / 8.0;
        let out_block: f64 = scores[8..].iter().sum::<f64>() / 8.0;
        assert!(in_block > out_block);
    }

    #[test]
    fn divergence_is_reported() {
        let r = InteractionMatrix::from_ratings(&blocks(20, 10, 6)).unwrap();
        let cfg = TrainConfig { alpha: 1.0, gamma: 1e100, learning_rate: 1.0, epochs: 3, ..Default::default() };
        assert!(matches!(train_bpr_slim(&r, &cfg), Err(Error::Divergence { epoch: 1..=3 })));
    }

    #[test]
    fn misaligned_features_are_rejected() {
        let r = InteractionMatrix::from_ratings(&blocks(10, 8, 7)).unwrap();
        let f = features(&[0, 1, 2], 3, 1);
        assert!(matches!(
            train_collective_slim(&r, Some(&f), &TrainConfig::default()),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(train_collective_slim(&r, None, &TrainConfig::default()), Err(Error::Parameter(_))));
    }
}
