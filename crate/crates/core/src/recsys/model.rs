use std::io::Write;

use nalgebra::DMatrix;

use super::{InteractionMatrix, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{ByteReader, FeatureKind};

const MAGIC: &[u8; 8] = b"VRSLIM01";

/// Learned item-item weights; entry `(l, t)` is how much a rating on item
/// `l` contributes to the score of item `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityModel {
    item_ids: Vec<u64>,
    s: DMatrix<f64>,
    config: TrainConfig,
    family: Option<FeatureKind>,
}

impl SimilarityModel {
    pub fn new(item_ids: Vec<u64>, s: DMatrix<f64>, config: TrainConfig, family: Option<FeatureKind>) -> Result<Self> {
        let n = item_ids.len();
        if s.shape() != (n, n) {
            return Err(Error::Dimension(format!("{n} items but similarity is {:?}", s.shape())));
        }
        Ok(Self {
            item_ids,
            s,
            config,
            family,
        })
    }

    pub fn item_ids(&self) -> &[u64] {
        &self.item_ids
    }

    pub fn similarity(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn family(&self) -> Option<FeatureKind> {
        self.family
    }

    /// Binary checkpoint; the matrix is stored column-sparse.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.config;
        out.write_all(MAGIC)?;
        out.write_all(&[self.family.map_or(0, FeatureKind::tag)])?;
        for v in [self.item_ids.len() as u64, c.epochs as u64, c.seed] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in [c.alpha, c.gamma, c.learning_rate, c.relevance_threshold] {
            out.write_all(&v.to_le_bytes())?;
        }
        for id in &self.item_ids {
            out.write_all(&id.to_le_bytes())?;
        }
        for col in self.s.column_iter() {
            let nz: Vec<(usize, f64)> = col.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
            out.write_all(&(nz.len() as u64).to_le_bytes())?;
            for (row, v) in nz {
                out.write_all(&(row as u32).to_le_bytes())?;
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(MAGIC)?;
        let tag_at = r.pos;
        let family = match r.u8()? {
            0 => None,
            t => Some(FeatureKind::from_tag(t).ok_or_else(|| Error::format(tag_at, format!("unknown family tag {t}")))?),
        };
        let n = r.u64()? as usize;
        let epochs = r.u64()? as usize;
        let seed = r.u64()?;
        let [alpha, gamma, learning_rate, relevance_threshold] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        if n > bytes.len() / 8 {
            return Err(Error::format(r.pos, format!("item count {n} exceeds file size")));
        }
        let item_ids = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let mut s = DMatrix::zeros(n, n);
        for t in 0..n {
            let nnz = r.u64()? as usize;
            for _ in 0..nnz {
                let at = r.pos;
                let row = r.u32()? as usize;
                if row >= n {
                    return Err(Error::format(at, format!("row {row} out of range for {n} items")));
                }
                s[(row, t)] = r.f64()?;
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::format(r.pos, "trailing bytes in similarity model"));
        }
        let config = TrainConfig {
            alpha,
            gamma,
            learning_rate,
            epochs,
            seed,
            relevance_threshold,
        };
        Self::new(item_ids, s, config, family)
    }
}

fn check_catalog(model: &SimilarityModel, r: &InteractionMatrix) -> Result<()> {
    if model.item_ids != r.items() {
        return Err(Error::Alignment(format!(
            "model covers {} items, interactions cover {}",
            model.item_ids.len(),
            r.n_items()
        )));
    }
    Ok(())
}

/// Scores of every catalog item for `user`: `Σ_l r_ul S_lt`.
pub fn score(model: &SimilarityModel, r: &InteractionMatrix, user: u64) -> Result<Vec<f64>> {
    check_catalog(model, r)?;
    let row = r.user_row(user)?;
    let mut out = vec![0.0; r.n_items()];
    for e in row {
        for (acc, &w) in out.iter_mut().zip(model.s.row(e.item).iter()) {
            *acc += e.rating * w;
        }
    }
    Ok(out)
}

/// Top `n` unrated items as `(item_id, score)`, best first; ties go to the
/// smaller item id.
pub fn recommend(model: &SimilarityModel, r: &InteractionMatrix, user: u64, n: usize) -> Result<Vec<(u64, f64)>> {
    let scores = score(model, r, user)?;
    let u = r.user_index(user).ok_or(Error::MissingUser(user))?;
    let mut candidates: Vec<(u64, f64)> = scores
        .into_iter()
        .enumerate()
        .filter(|&(t, _)| !r.has_rated(u, t))
        .map(|(t, v)| (r.items()[t], v))
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    candidates.truncate(n);
    Ok(candidates)
}
