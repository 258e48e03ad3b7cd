use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureRecord};

/// Item-major side features (`items x d`) for one feature family.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    item_ids: Vec<u64>,
    data: DMatrix<f64>,
    family: FeatureKind,
}

impl FeatureMatrix {
    pub fn new(item_ids: Vec<u64>, data: DMatrix<f64>, family: FeatureKind) -> Result<Self> {
        if item_ids.len() != data.nrows() {
            return Err(Error::Alignment(format!(
                "{} item ids for {} feature rows",
                item_ids.len(),
                data.nrows()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("feature matrix has non-finite entries".into()));
        }
        Ok(Self {
            item_ids,
            data,
            family,
        })
    }

    /// Rows ordered as `item_ids`. Items without a record are an alignment
    /// error unless `fill_missing`, in which case they get zero rows.
    pub fn from_records(records: &[FeatureRecord], item_ids: &[u64], fill_missing: bool) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyInput("no feature records"))?;
        let family = first.vector.kind();
        let d = first.vector.len();
        let mut by_id: HashMap<u64, &[f64]> = HashMap::new();
        for r in records {
            if r.vector.kind() != family || r.vector.len() != d {
                return Err(Error::KindMismatch {
                    expected: format!("{family}[{d}]"),
                    found: format!("{}[{}]", r.vector.kind(), r.vector.len()),
                });
            }
            if by_id.insert(r.movie_id, r.vector.values()).is_some() {
                return Err(Error::Duplicate(format!("features for movie {}", r.movie_id)));
            }
        }
        let mut data = DMatrix::zeros(item_ids.len(), d);
        for (row, id) in item_ids.iter().enumerate() {
            match by_id.get(id) {
                Some(values) => data.row_mut(row).copy_from_slice(values),
                None if fill_missing => {}
                None => return Err(Error::Alignment(format!("no {family} features for movie {id}"))),
            }
        }
        Self::new(item_ids.to_vec(), data, family)
    }

    pub fn item_ids(&self) -> &[u64] {
        &self.item_ids
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn family(&self) -> FeatureKind {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// Columns shifted to zero mean and scaled to unit variance over items;
    /// constant columns become zero.
    pub fn standardized(&self) -> DMatrix<f64> {
        let n = self.data.nrows() as f64;
        let mut out = self.data.clone();
        for mut col in out.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
            let var = col.norm_squared() / n;
            if var > 1e-24 {
                col /= var.sqrt();
            } else {
                col.fill(0.0);
            }
        }
        out
    }
}
