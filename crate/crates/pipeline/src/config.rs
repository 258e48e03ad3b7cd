use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use visrec_core::aggregate::AggregationKind;
use visrec_core::features::FeatureKind;
use visrec_core::recsys::TrainConfig;

use crate::error::{PipelineError, Result};

/// Feature families a recommender can be trained on; `NONE` trains on
/// ratings alone.
pub const FAMILIES: [&str; 6] = ["MPEG7_ALL", "DNN", "FUSED", "GENRE", "TAG_LSA", "NONE"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub segment: SegmentParams,
    #[serde(default)]
    pub aggregate: AggregateParams,
    #[serde(default)]
    pub fuse: FuseParams,
    #[serde(default)]
    pub textfeat: TextParams,
    #[serde(default)]
    pub train: TrainParams,
    #[serde(default)]
    pub evaluate: EvaluateParams,
    #[serde(default)]
    pub recommend: RecommendParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Directory of `<movie_id>.y4m` files.
    pub videos: PathBuf,
    pub ratings: PathBuf,
    pub tags: PathBuf,
    pub movies: PathBuf,
    /// Per-keyframe DNN activations; optional, required by `fuse` and `DNN`.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    pub cache: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentParams {
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregateParams {
    /// Pooling of MPEG-7 keyframe vectors.
    pub mpeg7: String,
    /// Pooling of DNN keyframe vectors.
    pub dnn: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuseParams {
    pub k: usize,
    /// Per-view default when absent.
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TextParams {
    pub lsa_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainParams {
    pub alpha: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub relevance_threshold: f64,
    pub families: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateParams {
    pub folds: usize,
    pub cutoffs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecommendParams {
    pub user: Option<u64>,
    pub n: usize,
    pub family: String,
}

fn default_seed() -> u64 {
    42
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            threshold: visrec_core::shotseg::DEFAULT_THRESHOLD,
        }
    }
}

impl Default for AggregateParams {
    fn default() -> Self {
        Self {
            mpeg7: AggregationKind::Intersection.name().to_string(),
            dnn: AggregationKind::Average.name().to_string(),
        }
    }
}

impl Default for FuseParams {
    fn default() -> Self {
        Self { k: 10, ridge: None }
    }
}

impl Default for TextParams {
    fn default() -> Self {
        Self {
            lsa_rank: visrec_core::textfeat::DEFAULT_LSA_RANK,
        }
    }
}

impl Default for TrainParams {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            alpha: t.alpha,
            gamma: t.gamma,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            relevance_threshold: t.relevance_threshold,
            families: FAMILIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Default for EvaluateParams {
    fn default() -> Self {
        Self {
            folds: 5,
            cutoffs: visrec_core::evalproto::CUTOFFS.to_vec(),
        }
    }
}

impl Default for RecommendParams {
    fn default() -> Self {
        Self {
            user: None,
            n: 10,
            family: "FUSED".into(),
        }
    }
}

/// A training family: a feature kind, or ratings only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Features(FeatureKind),
    RatingsOnly,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Family::RatingsOnly);
        }
        match s.parse::<FeatureKind>() {
            Ok(k @ (FeatureKind::Mpeg7All | FeatureKind::Dnn | FeatureKind::Fused | FeatureKind::Genre | FeatureKind::TagLsa)) => {
                Ok(Family::Features(k))
            }
            _ => Err(PipelineError::Config(format!(
                "unknown feature family {s:?}; expected one of {}",
                FAMILIES.join(", ")
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Features(k) => k.name(),
            Family::RatingsOnly => "NONE",
        }
    }
}

impl PipelineConfig {
    /// Reads TOML; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(0.0..=1.0).contains(&self.segment.threshold) {
            return bad(format!("segment.threshold {} outside [0, 1]", self.segment.threshold));
        }
        self.aggregation(FeatureKind::Mpeg7All)?;
        self.aggregation(FeatureKind::Dnn)?;
        if self.fuse.k == 0 {
            return bad("fuse.k must be at least 1".into());
        }
        if self.fuse.ridge.is_some_and(|r| !(r >= 0.0 && r.is_finite())) {
            return bad("fuse.ridge must be finite and non-negative".into());
        }
        if self.textfeat.lsa_rank == 0 {
            return bad("textfeat.lsa_rank must be at least 1".into());
        }
        self.train_config()
            .validate()
            .map_err(|e| PipelineError::Config(format!("train: {e}")))?;
        self.families()?;
        if self.train.families.is_empty() {
            return bad("train.families is empty".into());
        }
        if self.evaluate.folds == 0 {
            return bad("evaluate.folds must be at least 1".into());
        }
        if self.evaluate.cutoffs.is_empty() || self.evaluate.cutoffs.contains(&0) {
            return bad("evaluate.cutoffs must be non-empty and at least 1".into());
        }
        if self.recommend.n == 0 {
            return bad("recommend.n must be at least 1".into());
        }
        Family::parse(&self.recommend.family)?;
        Ok(())
    }

    /// Pooling method for the keyframe vectors of `kind` (MPEG7_ALL or DNN).
    pub fn aggregation(&self, kind: FeatureKind) -> Result<AggregationKind> {
        let (field, value) = match kind {
            FeatureKind::Dnn => ("dnn", &self.aggregate.dnn),
            _ => ("mpeg7", &self.aggregate.mpeg7),
        };
        value
            .parse()
            .map_err(|e| PipelineError::Config(format!("aggregate.{field}: {e}")))
    }

    pub fn families(&self) -> Result<Vec<Family>> {
        self.train.families.iter().map(|f| Family::parse(f)).collect()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            alpha: self.train.alpha,
            gamma: self.train.gamma,
            learning_rate: self.train.learning_rate,
            epochs: self.train.epochs,
            seed: self.seed,
            relevance_threshold: self.train.relevance_threshold,
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.videos);
        fix(&mut self.ratings);
        fix(&mut self.tags);
        fix(&mut self.movies);
        fix(&mut self.cache);
        if let Some(e) = self.embeddings.as_mut() {
            fix(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [paths]
        videos = "v"
        ratings = "r.csv"
        tags = "t.csv"
        movies = "m.csv"
        cache = "/abs/cache"
    "#;

    #[test]
    fn defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.videos, dir.path().join("v"));
        assert_eq!(cfg.paths.cache, PathBuf::from("/abs/cache"));
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.evaluate.cutoffs, vec![1, 10, 20]);
        assert_eq!(cfg.families().unwrap().len(), 6);
        assert_eq!(cfg.aggregation(FeatureKind::Mpeg7All).unwrap(), AggregationKind::Intersection);
        assert_eq!(cfg.aggregation(FeatureKind::Dnn).unwrap(), AggregationKind::Average);
    }

    #[test]
    fn out_of_range_knobs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        for extra in [
            "[segment]\nthreshold = 1.5",
            "[train]\nalpha = -0.1",
            "[train]\nfamilies = [\"SCD\"]",
            "[aggregate]\nmpeg7 = \"mode\"",
            "[evaluate]\ncutoffs = [0]",
            "[fuse]\nk = 0",
            "[bogus]\nx = 1",
        ] {
            std::fs::write(&path, format!("{MINIMAL}\n{extra}")).unwrap();
            assert!(matches!(PipelineConfig::load(&path), Err(PipelineError::Config(_))), "{extra}");
        }
    }
}
