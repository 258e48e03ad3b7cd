//! Slow, independent reference computations for tests.
//!
//! Nothing here shares code with `visrec-core`; every routine is written
//! from the definition with plain loops over `Vec<f64>`.

pub mod cca;
pub mod linalg;
pub mod metrics;
