//! Visual feature extraction and side-information recommendation.
//!
//! The pipeline: decode frames ([`media`]), split them into shots and pick
//! keyframes ([`shotseg`]), describe keyframes with MPEG-7 descriptors
//! ([`mpeg7`]) or externally computed network activations
//! ([`embeddings`]), pool keyframes into one vector per movie
//! ([`aggregate`]), optionally fuse the two families with CCA
//! ([`fusion`]), and feed the result as item side information to a
//! Collective SLIM recommender ([`recsys`]) scored with the top-N protocol
//! in [`evalproto`]. [`textfeat`] builds the genre and tag baselines.

pub mod aggregate;
pub mod dataset;
pub mod embeddings;
pub mod error;
pub mod evalproto;
pub mod features;
pub mod fusion;
pub mod histogram;
pub mod media;
pub mod mpeg7;
pub mod recsys;
pub mod shotseg;
pub mod textfeat;

pub use error::{Error, Result};
