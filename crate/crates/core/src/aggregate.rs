//! Group-of-pictures pooling of keyframe vectors into one movie vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggregationKind {
    /// Elementwise minimum.
    Intersection,
    Average,
    /// Even counts take the mean of the two middle values.
    Median,
    /// Elementwise maximum.
    Union,
}

impl AggregationKind {
    pub const ALL: [AggregationKind; 4] = [
        AggregationKind::Intersection,
        AggregationKind::Average,
        AggregationKind::Median,
        AggregationKind::Union,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregationKind::Intersection => "intersection",
            AggregationKind::Average => "average",
            AggregationKind::Median => "median",
            AggregationKind::Union => "union",
        }
    }
}

impl fmt::Display for AggregationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggregationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown aggregation {s:?}")))
    }
}

pub fn aggregate<V: AsRef<FeatureVector>>(vectors: &[V], kind: AggregationKind) -> Result<FeatureVector> {
    let first = vectors
        .first()
        .ok_or(Error::EmptyInput("no vectors to aggregate"))?
        .as_ref();
    for v in vectors.iter().map(AsRef::as_ref) {
        if v.kind() != first.kind() {
            return Err(Error::KindMismatch {
                expected: first.kind().to_string(),
                found: v.kind().to_string(),
            });
        }
        if v.len() != first.len() {
            return Err(Error::Dimension(format!(
                "vector lengths {} and {}",
                first.len(),
                v.len()
            )));
        }
    }
    let n = vectors.len();
    let mut column = Vec::with_capacity(n);
    let values = (0..first.len())
        .map(|i| {
            column.clear();
            column.extend(vectors.iter().map(|v| v.as_ref().values()[i]));
            match kind {
                AggregationKind::Intersection => column.iter().copied().fold(f64::INFINITY, f64::min),
                AggregationKind::Union => column.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                AggregationKind::Average => {
                    // sorted summation makes the result independent of input order;
                    // the clamp absorbs rounding past the extremes
                    column.sort_by(f64::total_cmp);
                    (column.iter().sum::<f64>() / n as f64).clamp(column[0], column[n - 1])
                }
                AggregationKind::Median => {
                    column.sort_by(f64::total_cmp);
                    if n % 2 == 1 {
                        column[n / 2]
                    } else {
                        0.5 * (column[n / 2 - 1] + column[n / 2])
                    }
                }
            }
        })
        .collect();
    FeatureVector::new(first.kind(), values)
}

impl AsRef<FeatureVector> for FeatureVector {
    fn as_ref(&self) -> &FeatureVector {
        self
    }
}
