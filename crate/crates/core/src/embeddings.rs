//! Ingestion of externally computed 1024-dim keyframe activations.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{self, FeatureKind, FeatureVector};

pub type KeyframeKey = (u64, u64);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    entries: BTreeMap<KeyframeKey, FeatureVector>,
}

impl EmbeddingTable {
    pub fn from_records(records: Vec<features::FeatureRecord>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (row, r) in records.into_iter().enumerate() {
            if r.vector.kind() != FeatureKind::Dnn {
                return Err(Error::KindMismatch {
                    expected: FeatureKind::Dnn.to_string(),
                    found: r.vector.kind().to_string(),
                });
            }
            let keyframe = r.keyframe.ok_or_else(|| {
                Error::Dimension(format!("record {row} has no keyframe_index column"))
            })?;
            let key = (r.movie_id, keyframe);
            if entries.insert(key, r.vector).is_some() {
                return Err(Error::Duplicate(format!(
                    "movie {} keyframe {}",
                    key.0, key.1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, movie_id: u64, keyframe: u64) -> Option<&FeatureVector> {
        self.entries.get(&(movie_id, keyframe))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KeyframeKey, &FeatureVector)> {
        self.entries.iter()
    }

    pub fn movie_ids(&self) -> BTreeSet<u64> {
        self.entries.keys().map(|k| k.0).collect()
    }

    /// Vectors of one movie in keyframe order.
    pub fn for_movie(&self, movie_id: u64) -> Vec<&FeatureVector> {
        self.entries
            .range((movie_id, 0)..=(movie_id, u64::MAX))
            .map(|(_, v)| v)
            .collect()
    }

    /// Exact coverage check against a keyframe manifest.
    pub fn check_coverage(&self, manifest: &BTreeSet<KeyframeKey>) -> Result<()> {
        let have: BTreeSet<KeyframeKey> = self.entries.keys().copied().collect();
        let missing: Vec<_> = manifest.difference(&have).copied().collect();
        let extra: Vec<_> = have.difference(manifest).copied().collect();
        if missing.is_empty() && extra.is_empty() {
            Ok(())
        } else {
            Err(Error::Coverage { missing, extra })
        }
    }
}

/// Reads a `movie_id,keyframe_index` manifest.
pub fn read_manifest<R: Read>(input: R) -> Result<BTreeSet<KeyframeKey>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut keys = BTreeSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let parse = |idx: usize| {
            row.get(idx)
                .and_then(|v| v.trim().parse::<u64>().ok())
                .ok_or_else(|| Error::Parameter(format!("manifest row {}: bad value", i + 2)))
        };
        if !keys.insert((parse(0)?, parse(1)?)) {
            return Err(Error::Duplicate(format!("manifest row {}", i + 2)));
        }
    }
    Ok(keys)
}

pub fn write_manifest<W: std::io::Write>(keys: &BTreeSet<KeyframeKey>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["movie_id", "keyframe_index"])?;
    for (m, k) in keys {
        w.write_record([m.to_string(), k.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads embeddings (CSV or binary, kind DNN) and, when a manifest is
/// given, requires exact keyframe coverage.
pub fn load_embeddings(
    path: &Path,
    expected: Option<&BTreeSet<KeyframeKey>>,
) -> Result<EmbeddingTable> {
    let table = EmbeddingTable::from_records(features::read_path(path)?)?;
    if let Some(manifest) = expected {
        table.check_coverage(manifest)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn csv_text(rows: &[(u64, u64, usize, f64)]) -> String {
        let width = rows.iter().map(|r| r.2).max().unwrap_or(1024);
        let mut s = String::from("movie_id,keyframe_index,kind");
        for i in 0..width {
            s.push_str(&format!(",v{i}"));
        }
        s.push('\n');
        for &(m, k, len, fill) in rows {
            s.push_str(&format!("{m},{k},DNN"));
            for _ in 0..len {
                s.push_str(&format!(",{fill}"));
            }
            s.push('\n');
        }
        s
    }

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = write_tmp(&csv_text(&[(1, 0, 1024, 0.5), (1, 4, 1024, 1.5), (2, 0, 1024, 2.5)]));
        let t = load_embeddings(f.path(), None).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(1, 4).unwrap().values()[1023], 1.5);
        assert_eq!(t.for_movie(1).len(), 2);
    }

    #[test]
    fn short_row_is_dimension_error() {
        let f = write_tmp(&csv_text(&[(1, 0, 1024, 0.0), (1, 4, 1000, 0.0)]));
        match load_embeddings(f.path(), None) {
            Err(Error::Dimension(msg)) => assert!(msg.contains("row 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_keyframe_is_named() {
        let f = write_tmp(&csv_text(&[(5, 0, 1024, 0.0), (5, 4, 1024, 0.0)]));
        let manifest: BTreeSet<_> = [(5, 0), (5, 4), (5, 9)].into();
        match load_embeddings(f.path(), Some(&manifest)) {
            Err(Error::Coverage { missing, extra }) => {
                assert_eq!(missing, vec![(5, 9)]);
                assert!(extra.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_rejected_and_order_irrelevant() {
        let dup = write_tmp(&csv_text(&[(1, 0, 1024, 0.0), (1, 0, 1024, 1.0)]));
        assert!(matches!(load_embeddings(dup.path(), None), Err(Error::Duplicate(_))));

        let a = write_tmp(&csv_text(&[(1, 0, 1024, 0.1), (2, 3, 1024, 0.2), (1, 7, 1024, 0.3)]));
        let b = write_tmp(&csv_text(&[(1, 7, 1024, 0.3), (1, 0, 1024, 0.1), (2, 3, 1024, 0.2)]));
        assert_eq!(
            load_embeddings(a.path(), None).unwrap(),
            load_embeddings(b.path(), None).unwrap()
        );
    }

    #[test]
    fn manifest_round_trip() {
        let keys: BTreeSet<_> = [(3, 1), (3, 12), (8, 0)].into();
        let mut buf = Vec::new();
        write_manifest(&keys, &mut buf).unwrap();
        assert_eq!(read_manifest(buf.as_slice()).unwrap(), keys);
    }
}
