//! Batch pipeline: trailers → shots → keyframe descriptors → movie
//! features → recommender training → offline evaluation.

pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod mini;
pub mod stages;

pub use config::PipelineConfig;
pub use error::{PipelineError, Result};
pub use stages::{Pipeline, RecommendRequest, Stage, StageRun};
