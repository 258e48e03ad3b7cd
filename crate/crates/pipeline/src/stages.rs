//! The eight pipeline stages. Each reads configured inputs and upstream
//! cache directories and writes only its own cache directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::json;
use visrec_core::aggregate::aggregate;
use visrec_core::dataset::{read_movies, read_ratings, read_tags, Movie, Rating};
use visrec_core::embeddings::{load_embeddings, read_manifest, write_manifest};
use visrec_core::evalproto::{evaluate_model, make_splits, EvalReport};
use visrec_core::features::{self, FeatureKind, FeatureRecord, FeatureVector};
use visrec_core::fusion::{default_ridge, fit_cca_with_ridges, fuse};
use visrec_core::media::parse_y4m;
use visrec_core::mpeg7::mpeg7_all;
use visrec_core::recsys::{
    recommend, train_bpr_slim, train_collective_slim, FeatureMatrix, InteractionMatrix, SimilarityModel, TrainConfig,
};
use visrec_core::shotseg::{detect_shots, ShotBoundaryList};
use visrec_core::textfeat::{build_genre_matrix, fit_tag_lsa, tag_counts};

use crate::cache::{digest_path, Cache, Outcome, StageKey};
use crate::config::{Family, PipelineConfig};
use crate::error::{Context, PipelineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Segment,
    Extract,
    Aggregate,
    Fuse,
    Textfeat,
    Train,
    Evaluate,
    Recommend,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Segment,
        Stage::Extract,
        Stage::Aggregate,
        Stage::Fuse,
        Stage::Textfeat,
        Stage::Train,
        Stage::Evaluate,
        Stage::Recommend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Segment => "segment",
            Stage::Extract => "extract",
            Stage::Aggregate => "aggregate",
            Stage::Fuse => "fuse",
            Stage::Textfeat => "textfeat",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Recommend => "recommend",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRun {
    pub stage: String,
    pub outcome: Outcome,
    /// Human-readable result for standard output.
    pub report: Option<String>,
}

/// Overrides for the `recommend` stage.
#[derive(Debug, Clone, Default)]
pub struct RecommendRequest {
    pub user: Option<u64>,
    pub n: Option<usize>,
    pub family: Option<String>,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    cache: Cache,
    force: bool,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(PipelineError::io(path))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(PipelineError::io(path))
}

fn write_features(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    let mut buf = Vec::new();
    features::write_binary(records, &mut buf).context(|| format!("writing {}", path.display()))?;
    write(path, buf)
}

fn read_features(path: &Path) -> Result<Vec<FeatureRecord>> {
    features::read_binary(&read(path)?).context(|| format!("reading {}", path.display()))
}

/// `<movie_id>.y4m` files, sorted by id.
fn list_videos(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(PipelineError::io(dir))? {
        let path = entry.map_err(PipelineError::io(dir))?.path();
        if path.extension().is_some_and(|e| e == "y4m") {
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PipelineError::Config(format!("video name {} is not <movie_id>.y4m", path.display())))?;
            out.push((id, path));
        }
    }
    if out.is_empty() {
        return Err(PipelineError::Config(format!("no .y4m videos in {}", dir.display())));
    }
    out.sort();
    Ok(out)
}

fn shots_file(movie: u64) -> String {
    format!("{movie}.shots.csv")
}

fn keyframe_file(kind: FeatureKind) -> String {
    format!("{}.keyframes.bin", kind.name())
}

fn movie_file(kind: FeatureKind) -> String {
    format!("{}.bin", kind.name())
}

/// Stage and file that hold a family's movie-level features.
fn family_source(kind: FeatureKind) -> &'static str {
    match kind {
        FeatureKind::Fused => "fuse",
        FeatureKind::Genre | FeatureKind::TagLsa => "textfeat",
        _ => "aggregate",
    }
}

fn train_family(r: &InteractionMatrix, features: Option<&FeatureMatrix>, tc: &TrainConfig) -> visrec_core::Result<SimilarityModel> {
    match features {
        Some(f) => train_collective_slim(r, Some(f), tc),
        None => train_bpr_slim(r, tc),
    }
    .map(|(model, _)| model)
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, force: bool) -> Self {
        let cache = Cache::new(&cfg.paths.cache);
        Self { cfg, cache, force }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn run(&self, stage: Stage, request: &RecommendRequest) -> Result<StageRun> {
        match stage {
            Stage::Segment => self.segment(),
            Stage::Extract => self.extract(),
            Stage::Aggregate => self.aggregate(),
            Stage::Fuse => self.fuse(),
            Stage::Textfeat => self.textfeat(),
            Stage::Train => self.train(),
            Stage::Evaluate => self.evaluate(),
            Stage::Recommend => self.recommend(request),
        }
    }

    /// Every stage through `evaluate`; `fuse` only when embeddings are configured.
    pub fn run_all(&self) -> Result<Vec<StageRun>> {
        Stage::ALL
            .into_iter()
            .filter(|&s| s != Stage::Recommend)
            .filter(|&s| s != Stage::Fuse || self.cfg.paths.embeddings.is_some())
            .map(|s| self.run(s, &RecommendRequest::default()))
            .collect()
    }

    fn finish(&self, stage: &str, outcome: Outcome, report: Option<String>) -> StageRun {
        StageRun {
            stage: stage.to_string(),
            outcome,
            report,
        }
    }

    fn catalog(&self) -> Result<Vec<Movie>> {
        let path = &self.cfg.paths.movies;
        let mut movies = read_movies(read(path)?.as_slice()).context(|| format!("reading {}", path.display()))?;
        movies.sort_by_key(|m| m.id);
        if movies.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(PipelineError::Config(format!("{} lists a movie twice", path.display())));
        }
        Ok(movies)
    }

    fn ratings(&self) -> Result<Vec<Rating>> {
        let path = &self.cfg.paths.ratings;
        read_ratings(read(path)?.as_slice()).context(|| format!("reading {}", path.display()))
    }

    fn interactions(&self, catalog: &[u64]) -> Result<InteractionMatrix> {
        InteractionMatrix::new(&self.ratings()?, catalog).context(|| "building the rating matrix".into())
    }

    fn segment(&self) -> Result<StageRun> {
        let threshold = self.cfg.segment.threshold;
        let videos = list_videos(&self.cfg.paths.videos)?;
        let key = StageKey {
            inputs: BTreeMap::from([("videos".into(), digest_path(&self.cfg.paths.videos)?)]),
            params: json!({ "threshold": threshold }),
            seed: None,
        };
        let outcome = self.cache.run("segment", key, self.force, |out| {
            let lists: Vec<ShotBoundaryList> = videos
                .par_iter()
                .map(|(id, path)| {
                    let stream = parse_y4m(&read(path)?).context(|| format!("decoding {}", path.display()))?;
                    detect_shots(&stream, threshold).context(|| format!("segmenting movie {id}"))
                })
                .collect::<Result<_>>()?;
            let mut keys = BTreeSet::new();
            for ((id, _), list) in videos.iter().zip(&lists) {
                let mut buf = Vec::new();
                list.write_csv(&mut buf).context(|| format!("writing shots of movie {id}"))?;
                write(&out.join(shots_file(*id)), buf)?;
                keys.extend(list.keyframes().into_iter().map(|k| (*id, k as u64)));
            }
            let mut buf = Vec::new();
            write_manifest(&keys, &mut buf).context(|| "writing keyframe manifest".into())?;
            write(&out.join("keyframes.csv"), buf)
        })?;
        Ok(self.finish("segment", outcome, None))
    }

    fn extract(&self) -> Result<StageRun> {
        let seg = self.cache.require("extract", "segment")?;
        let videos = list_videos(&self.cfg.paths.videos)?;
        let mut inputs = BTreeMap::from([
            ("videos".into(), digest_path(&self.cfg.paths.videos)?),
            ("segment".into(), self.cache.upstream_digest("extract", "segment")?),
        ]);
        if let Some(e) = &self.cfg.paths.embeddings {
            inputs.insert("embeddings".into(), digest_path(e)?);
        }
        let key = StageKey {
            inputs,
            params: json!({}),
            seed: None,
        };
        let outcome = self.cache.run("extract", key, self.force, |out| {
            let per_movie: Vec<Vec<FeatureRecord>> = videos
                .par_iter()
                .map(|(id, path)| {
                    let shots_path = seg.join(shots_file(*id));
                    let shots = ShotBoundaryList::read_csv(read(&shots_path)?.as_slice())
                        .context(|| format!("reading {}", shots_path.display()))?;
                    let stream = parse_y4m(&read(path)?).context(|| format!("decoding {}", path.display()))?;
                    shots
                        .keyframes()
                        .into_iter()
                        .map(|k| {
                            let frame = stream.frames().get(k).ok_or_else(|| {
                                PipelineError::Config(format!("keyframe {k} beyond the end of movie {id}; rerun segment"))
                            })?;
                            let vector = mpeg7_all(frame).context(|| format!("descriptors of movie {id} frame {k}"))?;
                            Ok(FeatureRecord {
                                movie_id: *id,
                                keyframe: Some(k as u64),
                                vector,
                            })
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let records: Vec<FeatureRecord> = per_movie.into_iter().flatten().collect();
            write_features(&out.join(keyframe_file(FeatureKind::Mpeg7All)), &records)?;

            if let Some(path) = &self.cfg.paths.embeddings {
                let manifest_path = seg.join("keyframes.csv");
                let keys = read_manifest(read(&manifest_path)?.as_slice())
                    .context(|| format!("reading {}", manifest_path.display()))?;
                let table = load_embeddings(path, Some(&keys)).context(|| format!("loading {}", path.display()))?;
                let dnn: Vec<FeatureRecord> = table
                    .iter()
                    .map(|(&(movie_id, k), v)| FeatureRecord {
                        movie_id,
                        keyframe: Some(k),
                        vector: v.clone(),
                    })
                    .collect();
                write_features(&out.join(keyframe_file(FeatureKind::Dnn)), &dnn)?;
            }
            Ok(())
        })?;
        Ok(self.finish("extract", outcome, None))
    }

    fn aggregate(&self) -> Result<StageRun> {
        let ext = self.cache.require("aggregate", "extract")?;
        let methods = [
            (FeatureKind::Mpeg7All, self.cfg.aggregation(FeatureKind::Mpeg7All)?),
            (FeatureKind::Dnn, self.cfg.aggregation(FeatureKind::Dnn)?),
        ];
        let key = StageKey {
            inputs: BTreeMap::from([("extract".into(), self.cache.upstream_digest("aggregate", "extract")?)]),
            params: json!({ "mpeg7": methods[0].1.name(), "dnn": methods[1].1.name() }),
            seed: None,
        };
        let outcome = self.cache.run("aggregate", key, self.force, |out| {
            for (kind, method) in methods {
                let path = ext.join(keyframe_file(kind));
                if !path.exists() {
                    continue;
                }
                let mut by_movie: BTreeMap<u64, Vec<FeatureVector>> = BTreeMap::new();
                for r in read_features(&path)? {
                    by_movie.entry(r.movie_id).or_default().push(r.vector);
                }
                let pooled: Vec<FeatureRecord> = by_movie
                    .into_par_iter()
                    .map(|(movie_id, vectors)| {
                        let vector = aggregate(&vectors, method).context(|| format!("pooling {kind} of movie {movie_id}"))?;
                        Ok(FeatureRecord {
                            movie_id,
                            keyframe: None,
                            vector,
                        })
                    })
                    .collect::<Result<_>>()?;
                write_features(&out.join(movie_file(kind)), &pooled)?;
            }
            Ok(())
        })?;
        Ok(self.finish("aggregate", outcome, None))
    }

    fn fuse(&self) -> Result<StageRun> {
        let agg = self.cache.require("fuse", "aggregate")?;
        let dnn_path = agg.join(movie_file(FeatureKind::Dnn));
        if !dnn_path.exists() {
            return Err(PipelineError::Config(
                "fuse needs DNN embeddings; set paths.embeddings and rerun extract".into(),
            ));
        }
        let key = StageKey {
            inputs: BTreeMap::from([
                ("aggregate".into(), self.cache.upstream_digest("fuse", "aggregate")?),
                ("ratings".into(), digest_path(&self.cfg.paths.ratings)?),
            ]),
            params: json!({ "k": self.cfg.fuse.k, "ridge": self.cfg.fuse.ridge }),
            seed: None,
        };
        let outcome = self.cache.run("fuse", key, self.force, |out| {
            let visual: BTreeMap<u64, FeatureVector> = read_features(&agg.join(movie_file(FeatureKind::Mpeg7All)))?
                .into_iter()
                .map(|r| (r.movie_id, r.vector))
                .collect();
            let dnn: BTreeMap<u64, FeatureVector> =
                read_features(&dnn_path)?.into_iter().map(|r| (r.movie_id, r.vector)).collect();
            let rated: BTreeSet<u64> = self.ratings()?.iter().map(|r| r.item).collect();
            let both: Vec<u64> = visual.keys().filter(|id| dnn.contains_key(id)).copied().collect();
            let warm: Vec<u64> = both.iter().filter(|id| rated.contains(id)).copied().collect();
            let rows = |map: &BTreeMap<u64, FeatureVector>, ids: &[u64]| {
                let d = map[&ids[0]].len();
                DMatrix::from_fn(ids.len(), d, |i, j| map[&ids[i]].values()[j])
            };
            if warm.len() < 2 {
                return Err(PipelineError::Config(format!(
                    "fuse needs at least two rated movies with both feature views, found {}",
                    warm.len()
                )));
            }
            let x = rows(&visual, &warm);
            let y = rows(&dnn, &warm);
            let (rx, ry) = match self.cfg.fuse.ridge {
                Some(r) => (r, r),
                None => (default_ridge(&x), default_ridge(&y)),
            };
            let model = fit_cca_with_ridges(&x, &y, self.cfg.fuse.k, rx, ry).context(|| "fitting CCA".into())?;
            let fused: Vec<FeatureRecord> = both
                .iter()
                .map(|&id| {
                    let vector = fuse(&model, visual[&id].values(), dnn[&id].values()).context(|| format!("fusing movie {id}"))?;
                    Ok(FeatureRecord {
                        movie_id: id,
                        keyframe: None,
                        vector,
                    })
                })
                .collect::<Result<_>>()?;
            let mut buf = Vec::new();
            model.write(&mut buf).context(|| "writing CCA model".into())?;
            write(&out.join("cca.bin"), buf)?;
            write_features(&out.join(movie_file(FeatureKind::Fused)), &fused)?;
            let mut corr = String::from("component,correlation\n");
            for (i, c) in model.correlations.iter().enumerate() {
                writeln!(corr, "{i},{c:.12}").unwrap();
            }
            write(&out.join("correlations.csv"), corr)
        })?;
        Ok(self.finish("fuse", outcome, None))
    }

    fn textfeat(&self) -> Result<StageRun> {
        let key = StageKey {
            inputs: BTreeMap::from([
                ("movies".into(), digest_path(&self.cfg.paths.movies)?),
                ("tags".into(), digest_path(&self.cfg.paths.tags)?),
            ]),
            params: json!({ "lsa_rank": self.cfg.textfeat.lsa_rank }),
            seed: None,
        };
        let outcome = self.cache.run("textfeat", key, self.force, |out| {
            let catalog = self.catalog()?;
            let genres = build_genre_matrix(&catalog).context(|| "building genre vectors".into())?;
            let records: Vec<FeatureRecord> = genres
                .item_ids
                .iter()
                .zip(&genres.rows)
                .map(|(&movie_id, row)| {
                    let values = row.iter().map(|&b| b as f64).collect();
                    Ok(FeatureRecord {
                        movie_id,
                        keyframe: None,
                        vector: FeatureVector::new(FeatureKind::Genre, values).context(|| "genre vector".into())?,
                    })
                })
                .collect::<Result<_>>()?;
            write_features(&out.join(movie_file(FeatureKind::Genre)), &records)?;

            let tags_path = &self.cfg.paths.tags;
            let events = read_tags(read(tags_path)?.as_slice()).context(|| format!("reading {}", tags_path.display()))?;
            let model = fit_tag_lsa(&tag_counts(&events), self.cfg.textfeat.lsa_rank).context(|| "fitting tag LSA".into())?;
            let ids: Vec<u64> = catalog.iter().map(|m| m.id).collect();
            let rows = model.item_rows(&ids);
            let records: Vec<FeatureRecord> = ids
                .iter()
                .enumerate()
                .map(|(i, &movie_id)| {
                    let values = rows.row(i).iter().copied().collect();
                    Ok(FeatureRecord {
                        movie_id,
                        keyframe: None,
                        vector: FeatureVector::new(FeatureKind::TagLsa, values).context(|| "tag vector".into())?,
                    })
                })
                .collect::<Result<_>>()?;
            write_features(&out.join(movie_file(FeatureKind::TagLsa)), &records)
        })?;
        Ok(self.finish("textfeat", outcome, None))
    }

    /// Upstream stages and their digests for the configured families.
    fn family_inputs(&self, stage: &'static str, families: &[Family]) -> Result<BTreeMap<String, String>> {
        let mut inputs = BTreeMap::from([
            ("ratings".into(), digest_path(&self.cfg.paths.ratings)?),
            ("movies".into(), digest_path(&self.cfg.paths.movies)?),
        ]);
        for f in families {
            if let Family::Features(kind) = f {
                let up = family_source(*kind);
                inputs.insert(up.to_string(), self.cache.upstream_digest(stage, up)?);
            }
        }
        Ok(inputs)
    }

    fn family_features(&self, stage: &'static str, family: Family, catalog: &[u64]) -> Result<Option<FeatureMatrix>> {
        let Family::Features(kind) = family else {
            return Ok(None);
        };
        let dir = self.cache.require(stage, family_source(kind))?;
        let path = dir.join(movie_file(kind));
        if !path.exists() {
            return Err(PipelineError::Config(format!(
                "no {kind} features were produced; DNN and FUSED need paths.embeddings"
            )));
        }
        let records = read_features(&path)?;
        FeatureMatrix::from_records(&records, catalog, false)
            .map(Some)
            .context(|| format!("aligning {kind} features to the movie catalog"))
    }

    fn train_params(&self) -> serde_json::Value {
        serde_json::to_value(&self.cfg.train).expect("train params serialize")
    }

    fn train(&self) -> Result<StageRun> {
        let families = self.cfg.families()?;
        let key = StageKey {
            inputs: self.family_inputs("train", &families)?,
            params: self.train_params(),
            seed: Some(self.cfg.seed),
        };
        let outcome = self.cache.run("train", key, self.force, |out| {
            let catalog: Vec<u64> = self.catalog()?.iter().map(|m| m.id).collect();
            let r = self.interactions(&catalog)?;
            let tc = self.cfg.train_config();
            let features: Vec<Option<FeatureMatrix>> = families
                .iter()
                .map(|&f| self.family_features("train", f, &catalog))
                .collect::<Result<_>>()?;
            let trained: Vec<(SimilarityModel, Vec<f64>)> = families
                .par_iter()
                .zip(&features)
                .map(|(f, feats)| {
                    let (model, report) = match feats {
                        Some(m) => train_collective_slim(&r, Some(m), &tc),
                        None => train_bpr_slim(&r, &tc),
                    }
                    .context(|| format!("training on {}", f.name()))?;
                    Ok((model, report.losses))
                })
                .collect::<Result<_>>()?;
            for (f, (model, losses)) in families.iter().zip(trained) {
                let mut buf = Vec::new();
                model.write(&mut buf).context(|| "writing model".into())?;
                write(&out.join(format!("{}.slim", f.name())), buf)?;
                let mut csv = String::from("epoch,loss\n");
                for (e, l) in losses.iter().enumerate() {
                    writeln!(csv, "{},{l:.12}", e + 1).unwrap();
                }
                write(&out.join(format!("{}.loss.csv", f.name())), csv)?;
            }
            Ok(())
        })?;
        Ok(self.finish("train", outcome, None))
    }

    fn evaluate(&self) -> Result<StageRun> {
        let families = self.cfg.families()?;
        let key = StageKey {
            inputs: self.family_inputs("evaluate", &families)?,
            params: json!({ "train": self.train_params(), "evaluate": self.cfg.evaluate }),
            seed: Some(self.cfg.seed),
        };
        let outcome = self.cache.run("evaluate", key, self.force, |out| {
            let catalog: Vec<u64> = self.catalog()?.iter().map(|m| m.id).collect();
            let full = self.interactions(&catalog)?;
            let ev = &self.cfg.evaluate;
            let tc = self.cfg.train_config();
            let splits = make_splits(&full, ev.folds, self.cfg.seed).context(|| "splitting ratings".into())?;
            let mut summary = String::new();
            for &family in &families {
                let feats = self.family_features("evaluate", family, &catalog)?;
                let folds = splits
                    .par_iter()
                    .map(|split| {
                        let train = InteractionMatrix::new(&split.train, &catalog).context(|| "fold training matrix".into())?;
                        let model = train_family(&train, feats.as_ref(), &tc)
                            .context(|| format!("training {} on fold {}", family.name(), split.fold))?;
                        evaluate_model(&model, &train, &full, &split.test, tc.relevance_threshold, &ev.cutoffs)
                            .context(|| format!("evaluating {} on fold {}", family.name(), split.fold))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let report = EvalReport::new(family.name(), &ev.cutoffs, folds).context(|| "assembling report".into())?;
                let mut buf = Vec::new();
                report.write_csv(&mut buf).context(|| "writing report".into())?;
                write(&out.join(format!("{}.csv", family.name())), buf)?;
                writeln!(summary, "{report}").unwrap();
            }
            write(&out.join("summary.txt"), summary)
        })?;
        let summary = self.cache.stage_dir("evaluate").join("summary.txt");
        let text = String::from_utf8_lossy(&read(&summary)?).into_owned();
        Ok(self.finish("evaluate", outcome, Some(text)))
    }

    fn recommend(&self, request: &RecommendRequest) -> Result<StageRun> {
        let rc = &self.cfg.recommend;
        let family = Family::parse(request.family.as_deref().unwrap_or(&rc.family))?;
        let n = request.n.unwrap_or(rc.n);
        let user = request
            .user
            .or(rc.user)
            .ok_or_else(|| PipelineError::Config("recommend needs a user (--user or recommend.user)".into()))?;
        let stage = format!("recommend/{}-user{user}-top{n}", family.name());
        let train_dir = self.cache.require("recommend", "train")?;
        let key = StageKey {
            inputs: BTreeMap::from([
                ("train".into(), self.cache.upstream_digest("recommend", "train")?),
                ("ratings".into(), digest_path(&self.cfg.paths.ratings)?),
                ("movies".into(), digest_path(&self.cfg.paths.movies)?),
            ]),
            params: json!({ "user": user, "n": n, "family": family.name() }),
            seed: None,
        };
        let outcome = self.cache.run(&stage, key, self.force, |out| {
            let model_path = train_dir.join(format!("{}.slim", family.name()));
            if !model_path.exists() {
                return Err(PipelineError::Config(format!(
                    "no model trained on {}; add it to train.families",
                    family.name()
                )));
            }
            let model = SimilarityModel::read(&read(&model_path)?).context(|| format!("reading {}", model_path.display()))?;
            let catalog = self.catalog()?;
            let ids: Vec<u64> = catalog.iter().map(|m| m.id).collect();
            let r = self.interactions(&ids)?;
            let recs = recommend(&model, &r, user, n).context(|| format!("recommending for user {user}"))?;
            let titles: BTreeMap<u64, &str> = catalog.iter().map(|m| (m.id, m.title.as_str())).collect();
            let mut csv = String::from("rank,movie_id,score,title\n");
            for (i, (id, score)) in recs.iter().enumerate() {
                let title = titles[id].replace('"', "\"\"");
                writeln!(csv, "{},{id},{score:.12},\"{title}\"", i + 1).unwrap();
            }
            write(&out.join("recommendations.csv"), csv)
        })?;
        let text = String::from_utf8_lossy(&read(&self.cache.stage_dir(&stage).join("recommendations.csv"))?).into_owned();
        Ok(self.finish(&stage, outcome, Some(text)))
    }
}
