//! Feature vectors and the on-disk descriptor formats.
//!
//! CSV: header `movie_id,kind,v0,...,v{L-1}` for movie-level vectors, or
//! `movie_id,keyframe_index,kind,v0,...` for per-keyframe vectors.
//!
//! Binary (little endian): magic `VRFEAT01`, kind tag `u8`, length `u32`,
//! record count `u64`, then per record `movie_id: u64`,
//! `keyframe: u64` (`u64::MAX` for movie-level) and `length` × `f64`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"VRFEAT01";
const NO_KEYFRAME: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Scd,
    Csd,
    Cld,
    Ehd,
    Htd,
    Mpeg7All,
    Dnn,
    Fused,
    Genre,
    TagLsa,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 10] = [
        FeatureKind::Scd,
        FeatureKind::Csd,
        FeatureKind::Cld,
        FeatureKind::Ehd,
        FeatureKind::Htd,
        FeatureKind::Mpeg7All,
        FeatureKind::Dnn,
        FeatureKind::Fused,
        FeatureKind::Genre,
        FeatureKind::TagLsa,
    ];

    /// Fixed length for the kind, `None` when it depends on a model rank.
    pub fn expected_len(self) -> Option<usize> {
        match self {
            FeatureKind::Scd | FeatureKind::Csd => Some(256),
            FeatureKind::Cld => Some(120),
            FeatureKind::Ehd => Some(80),
            FeatureKind::Htd => Some(62),
            FeatureKind::Mpeg7All => Some(774),
            FeatureKind::Dnn => Some(1024),
            FeatureKind::Genre => Some(19),
            FeatureKind::Fused | FeatureKind::TagLsa => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Scd => "SCD",
            FeatureKind::Csd => "CSD",
            FeatureKind::Cld => "CLD",
            FeatureKind::Ehd => "EHD",
            FeatureKind::Htd => "HTD",
            FeatureKind::Mpeg7All => "MPEG7_ALL",
            FeatureKind::Dnn => "DNN",
            FeatureKind::Fused => "FUSED",
            FeatureKind::Genre => "GENRE",
            FeatureKind::TagLsa => "TAG_LSA",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        Self::ALL.iter().position(|&k| k == self).unwrap() as u8 + 1
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get((tag as usize).checked_sub(1)?).copied()
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown feature kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    kind: FeatureKind,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(kind: FeatureKind, values: Vec<f64>) -> Result<Self> {
        if let Some(len) = kind.expected_len() {
            if values.len() != len {
                return Err(Error::Dimension(format!(
                    "{kind} vector must have {len} values, got {}",
                    values.len()
                )));
            }
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A vector keyed by movie and, for per-keyframe data, keyframe index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub movie_id: u64,
    pub keyframe: Option<u64>,
    pub vector: FeatureVector,
}

fn common_shape(records: &[FeatureRecord]) -> Result<(FeatureKind, usize, bool)> {
    let first = records
        .first()
        .ok_or(Error::EmptyInput("no feature records"))?;
    let kind = first.vector.kind();
    let len = first.vector.len();
    let keyed = first.keyframe.is_some();
    for r in records {
        if r.vector.kind() != kind {
            return Err(Error::KindMismatch {
                expected: kind.to_string(),
                found: r.vector.kind().to_string(),
            });
        }
        if r.vector.len() != len || r.keyframe.is_some() != keyed {
            return Err(Error::Dimension(format!(
                "record for movie {} does not match the file layout",
                r.movie_id
            )));
        }
    }
    Ok((kind, len, keyed))
}

pub fn write_csv<W: Write>(records: &[FeatureRecord], out: W) -> Result<()> {
    let (_, len, keyed) = common_shape(records)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["movie_id".to_string()];
    if keyed {
        header.push("keyframe_index".into());
    }
    header.push("kind".into());
    header.extend((0..len).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.movie_id.to_string()];
        if let Some(k) = r.keyframe {
            row.push(k.to_string());
        }
        row.push(r.vector.kind().name().to_string());
        row.extend(r.vector.values().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<FeatureRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("movie_id") {
        return Err(Error::format(0, "feature CSV must start with a movie_id column"));
    }
    let keyed = header.get(1) == Some("keyframe_index");
    let lead = if keyed { 3 } else { 2 };
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |idx: usize| -> Result<&str> {
            row.get(idx)
                .ok_or_else(|| Error::Dimension(format!("row {line}: missing column {idx}")))
        };
        let parse_u64 = |s: &str| -> Result<u64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("row {line}: bad integer {s:?}")))
        };
        let movie_id = parse_u64(field(0)?)?;
        let keyframe = if keyed { Some(parse_u64(field(1)?)?) } else { None };
        let kind: FeatureKind = field(lead - 1)?.parse()?;
        let values = row
            .iter()
            .skip(lead)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("row {line}: bad value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let vector = FeatureVector::new(kind, values)
            .map_err(|e| Error::Dimension(format!("row {line}: {e}")))?;
        records.push(FeatureRecord {
            movie_id,
            keyframe,
            vector,
        });
    }
    Ok(records)
}

pub fn write_binary<W: Write>(records: &[FeatureRecord], mut out: W) -> Result<()> {
    let (kind, len, _) = common_shape(records)?;
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&[kind.tag()])?;
    out.write_all(&(len as u32).to_le_bytes())?;
    out.write_all(&(records.len() as u64).to_le_bytes())?;
    for r in records {
        out.write_all(&r.movie_id.to_le_bytes())?;
        out.write_all(&r.keyframe.unwrap_or(NO_KEYFRAME).to_le_bytes())?;
        for v in r.vector.values() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub(crate) struct ByteReader<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let slice = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::format(self.pos, "unexpected end of data"))?;
        self.pos += n;
        Ok(slice)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn expect_magic(&mut self, magic: &[u8]) -> Result<()> {
        if self.take(magic.len())? != magic {
            return Err(Error::format(0, "bad magic"));
        }
        Ok(())
    }
}

pub fn read_binary(bytes: &[u8]) -> Result<Vec<FeatureRecord>> {
    let mut r = ByteReader::new(bytes);
    r.expect_magic(BINARY_MAGIC)?;
    let tag_pos = r.pos;
    let kind = FeatureKind::from_tag(r.u8()?)
        .ok_or_else(|| Error::format(tag_pos, "unknown kind tag"))?;
    let len = r.u32()? as usize;
    let count = r.u64()?;
    let mut records = Vec::with_capacity(count.min(1 << 20) as usize);
    for i in 0..count {
        let movie_id = r.u64()?;
        let keyframe = Some(r.u64()?).filter(|&k| k != NO_KEYFRAME);
        let values = r.f64s(len)?;
        let vector = FeatureVector::new(kind, values)
            .map_err(|e| Error::Dimension(format!("record {i}: {e}")))?;
        records.push(FeatureRecord {
            movie_id,
            keyframe,
            vector,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::format(r.pos, "trailing bytes after last record"));
    }
    Ok(records)
}

/// Reads either format, detected by the binary magic.
pub fn read_any(bytes: &[u8]) -> Result<Vec<FeatureRecord>> {
    if bytes.starts_with(BINARY_MAGIC) {
        read_binary(bytes)
    } else {
        read_csv(bytes)
    }
}

pub fn read_path(path: &std::path::Path) -> Result<Vec<FeatureRecord>> {
    read_any(&std::fs::read(path)?)
}
