//! Baseline item features: binary genre vectors and LSA tag factors.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dataset::{Movie, TagEvent};
use crate::error::{Error, Result};

pub const GENRES: [&str; 19] = [
    "action",
    "adventure",
    "animation",
    "children's",
    "comedy",
    "crime",
    "documentary",
    "drama",
    "fantasy",
    "film-noir",
    "horror",
    "musical",
    "mystery",
    "romance",
    "sci-fi",
    "thriller",
    "war",
    "western",
    "unknown",
];

pub const DEFAULT_LSA_RANK: usize = 100;

/// Column of a genre label; MovieLens spellings are accepted.
pub fn genre_index(label: &str) -> Result<usize> {
    let norm = label.trim().to_lowercase();
    let canonical = match norm.as_str() {
        "children" => "children's",
        "(no genres listed)" => "unknown",
        other => other,
    };
    GENRES
        .iter()
        .position(|g| *g == canonical)
        .ok_or_else(|| Error::Vocabulary(label.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenreMatrix {
    pub item_ids: Vec<u64>,
    pub rows: Vec<[u8; 19]>,
}

pub fn build_genre_matrix(catalog: &[Movie]) -> Result<GenreMatrix> {
    let mut item_ids = Vec::with_capacity(catalog.len());
    let mut rows = Vec::with_capacity(catalog.len());
    for movie in catalog {
        if movie.genres.is_empty() {
            return Err(Error::Parameter(format!("movie {} lists no genre", movie.id)));
        }
        let mut row = [0u8; 19];
        for g in &movie.genres {
            row[genre_index(g)?] = 1;
        }
        item_ids.push(movie.id);
        rows.push(row);
    }
    Ok(GenreMatrix { item_ids, rows })
}

/// `(movie, tag, count)` with tags lowercased and trimmed.
pub fn tag_counts(events: &[TagEvent]) -> Vec<(u64, String, f64)> {
    let mut counts: BTreeMap<(u64, String), f64> = BTreeMap::new();
    for e in events {
        let tag = e.tag.trim().to_lowercase();
        if !tag.is_empty() {
            *counts.entry((e.item, tag)).or_default() += 1.0;
        }
    }
    counts.into_iter().map(|((m, t), c)| (m, t, c)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TagLsaModel {
    pub tags: Vec<String>,
    pub item_ids: Vec<u64>,
    pub k: usize,
    /// `V Σ`, items x k.
    pub item_factors: DMatrix<f64>,
    /// `U`, tags x k.
    pub tag_factors: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    /// Set when the requested rank exceeded the matrix rank.
    pub rank_truncated: bool,
}

impl TagLsaModel {
    /// Rank-k approximation of the weighted tag x item matrix.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut v = self.item_factors.clone();
        for (j, mut col) in v.column_iter_mut().enumerate() {
            col /= self.singular_values[j];
        }
        let mut us = self.tag_factors.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.singular_values[j];
        }
        us * v.transpose()
    }

    /// Factor rows for `ids`; movies without tags get zeros.
    pub fn item_rows(&self, ids: &[u64]) -> DMatrix<f64> {
        let index: BTreeMap<u64, usize> =
            self.item_ids.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        DMatrix::from_fn(ids.len(), self.k, |r, c| {
            index.get(&ids[r]).map_or(0.0, |&i| self.item_factors[(i, c)])
        })
    }
}

/// Sparse TF-IDF tag x item matrix: per tag, `(item_index, weight)`.
/// `tf` is the raw count, `idf = ln((1 + N) / (1 + df)) + 1`.
pub fn tfidf(
    assignments: &[(u64, String, f64)],
) -> Result<(Vec<String>, Vec<u64>, Vec<Vec<(usize, f64)>>)> {
    if assignments.is_empty() {
        return Err(Error::EmptyInput("no tag assignments"));
    }
    let items: Vec<u64> = assignments.iter().map(|a| a.0).collect::<BTreeSet<_>>().into_iter().collect();
    let tags: Vec<String> = assignments
        .iter()
        .map(|a| a.1.trim().to_lowercase())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let item_idx: BTreeMap<u64, usize> = items.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let tag_idx: BTreeMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut counts: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); tags.len()];
    for (movie, tag, count) in assignments {
        if !(*count > 0.0) {
            return Err(Error::Parameter(format!("tag count {count} must be positive")));
        }
        let t = tag_idx[tag.trim().to_lowercase().as_str()];
        *counts[t].entry(item_idx[movie]).or_default() += count;
    }
    let n = items.len() as f64;
    let rows = counts
        .into_iter()
        .map(|row| {
            let idf = ((1.0 + n) / (1.0 + row.len() as f64)).ln() + 1.0;
            row.into_iter().map(|(i, c)| (i, c * idf)).collect()
        })
        .collect();
    Ok((tags, items, rows))
}

/// LSA: truncated SVD of the TF-IDF tag x item matrix, computed from the
/// eigendecomposition of the smaller Gram matrix.
pub fn fit_tag_lsa(assignments: &[(u64, String, f64)], k: usize) -> Result<TagLsaModel> {
    if k == 0 {
        return Err(Error::Parameter("LSA rank must be at least 1".into()));
    }
    let (tags, items, rows) = tfidf(assignments)?;
    let (nt, ni) = (tags.len(), items.len());

    let item_side = ni <= nt;
    let dim = if item_side { ni } else { nt };
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    if item_side {
        for row in &rows {
            for &(i, wi) in row {
                for &(j, wj) in row {
                    gram[(i, j)] += wi * wj;
                }
            }
        }
    } else {
        let mut dense = DMatrix::<f64>::zeros(nt, ni);
        for (t, row) in rows.iter().enumerate() {
            for &(i, w) in row {
                dense[(t, i)] = w;
            }
        }
        gram = &dense * dense.transpose();
    }

    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let tol = top * 1e-12 * dim as f64;
    let rank = order.iter().take_while(|&&i| eig.eigenvalues[i] > tol).count();
    let kept = k.min(rank);

    let singular_values: Vec<f64> = order[..kept].iter().map(|&i| eig.eigenvalues[i].sqrt()).collect();
    // the eigenvectors span one side; the other is A x / σ
    let mut item_factors = DMatrix::zeros(ni, kept);
    let mut tag_factors = DMatrix::zeros(nt, kept);
    for (c, &i) in order[..kept].iter().enumerate() {
        let vec = eig.eigenvectors.column(i);
        let sigma = singular_values[c];
        if item_side {
            for r in 0..ni {
                item_factors[(r, c)] = vec[r] * sigma;
            }
            for (t, row) in rows.iter().enumerate() {
                tag_factors[(t, c)] = row.iter().map(|&(j, w)| w * vec[j]).sum::<f64>() / sigma;
            }
        } else {
            for t in 0..nt {
                tag_factors[(t, c)] = vec[t];
            }
            for (t, row) in rows.iter().enumerate() {
                for &(j, w) in row {
                    item_factors[(j, c)] += w * vec[t];
                }
            }
        }
    }
    Ok(TagLsaModel {
        tags,
        item_ids: items,
        k: kept,
        item_factors,
        tag_factors,
        singular_values,
        rank_truncated: kept < k,
    })
}
