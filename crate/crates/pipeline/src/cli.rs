use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::cache::Outcome;
use crate::config::PipelineConfig;
use crate::error::{exit, PipelineError, Result};
use crate::stages::{Pipeline, RecommendRequest, Stage, StageRun};

#[derive(Debug, Parser)]
#[command(name = "visrec", version, about = "Visual-feature movie recommendation pipeline")]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, short, global = true, default_value = "visrec.toml")]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Rebuild stages whose cached output no longer matches their inputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Overrides the configured cache directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect shots and keyframes in every video.
    Segment,
    /// Compute MPEG-7 descriptors per keyframe and ingest embeddings.
    Extract,
    /// Pool keyframe vectors into one vector per movie.
    Aggregate {
        /// intersection|average|median|union, for both families or as
        /// `mpeg7=METHOD` / `dnn=METHOD`; repeatable.
        #[arg(long = "agg", value_name = "METHOD")]
        agg: Vec<String>,
    },
    /// Fit CCA between MPEG-7 and DNN features and emit fused vectors.
    Fuse,
    /// Build genre and tag-LSA baseline features.
    Textfeat,
    /// Train one recommender per configured feature family.
    Train {
        /// Weight of the ranking term; 1 ignores side features.
        #[arg(long)]
        alpha: Option<f64>,
        /// L2 penalty on the similarity matrix.
        #[arg(long)]
        gamma: Option<f64>,
        /// Step size.
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// mpeg7|dnn|fused|genre|tag-lsa|none; repeatable, replaces the configured families.
        #[arg(long = "features", value_name = "FAMILY")]
        features: Vec<String>,
    },
    /// Cross-validated recall, precision and MAP per family.
    Evaluate,
    /// Top-N movies for one user.
    Recommend {
        /// User id; defaults to the configured one.
        #[arg(long)]
        user: Option<u64>,
        /// List length.
        #[arg(long)]
        n: Option<usize>,
        /// Model to use, as for `train --features`.
        #[arg(long)]
        family: Option<String>,
    },
    /// Every stage from segment through evaluate.
    All,
    /// Write the bundled mini-dataset to a directory.
    GenerateMini { dir: PathBuf },
}

fn print_run(run: &StageRun) {
    let status = match run.outcome {
        Outcome::Built => "built",
        Outcome::UpToDate => "up to date",
    };
    eprintln!("{}: {status}", run.stage);
    if let Some(report) = &run.report {
        print!("{report}");
    }
}

/// Accepts the short CLI spellings as well as the canonical family names.
fn family_name(s: &str) -> String {
    match s.trim().to_ascii_lowercase().as_str() {
        "mpeg7" => "MPEG7_ALL".into(),
        "tag-lsa" => "TAG_LSA".into(),
        other => other.to_ascii_uppercase(),
    }
}

fn apply_overrides(cfg: &mut PipelineConfig, command: &Command) -> Result<()> {
    match command {
        Command::Aggregate { agg } => {
            for spec in agg {
                match spec.split_once('=') {
                    Some(("mpeg7", m)) => cfg.aggregate.mpeg7 = m.into(),
                    Some(("dnn", m)) => cfg.aggregate.dnn = m.into(),
                    Some((family, _)) => {
                        return Err(PipelineError::Config(format!("--agg: unknown family {family:?}; expected mpeg7 or dnn")))
                    }
                    None => {
                        cfg.aggregate.mpeg7 = spec.clone();
                        cfg.aggregate.dnn = spec.clone();
                    }
                }
            }
        }
        Command::Train { alpha, gamma, lr, epochs, features } => {
            cfg.train.alpha = alpha.unwrap_or(cfg.train.alpha);
            cfg.train.gamma = gamma.unwrap_or(cfg.train.gamma);
            cfg.train.learning_rate = lr.unwrap_or(cfg.train.learning_rate);
            cfg.train.epochs = epochs.unwrap_or(cfg.train.epochs);
            if !features.is_empty() {
                cfg.train.families = features.iter().map(|f| family_name(f)).collect();
            }
        }
        Command::Recommend { family: Some(f), .. } => cfg.recommend.family = family_name(f),
        _ => {}
    }
    cfg.validate()
}

fn execute(cli: Cli) -> Result<()> {
    if let Command::GenerateMini { dir } = &cli.command {
        return crate::mini::write_to(dir).map_err(PipelineError::io(dir));
    }
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.cache_dir {
        cfg.paths.cache = dir;
    }
    apply_overrides(&mut cfg, &cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    let pipeline = Pipeline::new(cfg, cli.force);
    pool.install(|| {
        let stage = match cli.command {
            Command::Segment => Stage::Segment,
            Command::Extract => Stage::Extract,
            Command::Aggregate { .. } => Stage::Aggregate,
            Command::Fuse => Stage::Fuse,
            Command::Textfeat => Stage::Textfeat,
            Command::Train { .. } => Stage::Train,
            Command::Evaluate => Stage::Evaluate,
            Command::Recommend { user, n, .. } => {
                let run = pipeline.run(Stage::Recommend, &RecommendRequest { user, n, family: None })?;
                print_run(&run);
                return Ok(());
            }
            Command::All => {
                for run in pipeline.run_all()? {
                    print_run(&run);
                }
                return Ok(());
            }
            Command::GenerateMini { .. } => unreachable!(),
        };
        print_run(&pipeline.run(stage, &RecommendRequest::default())?);
        Ok(())
    })
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
