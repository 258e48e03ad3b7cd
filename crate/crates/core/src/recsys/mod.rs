//! Collective SLIM: an item-item similarity matrix learned from pairwise
//! ranking of ratings, regularized to reconstruct item side features.

mod feature_matrix;
mod interactions;
mod model;
mod train;

pub use feature_matrix::FeatureMatrix;
pub use interactions::{Entry, InteractionMatrix};
pub use model::{recommend, score, SimilarityModel};
pub use train::{train_bpr_slim, train_collective_slim, BprSampler, TrainConfig, TrainReport};
