//! Shot segmentation by thresholded histogram intersection of consecutive
//! frames, with the middle frame of each shot as its keyframe.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::histogram::{frame_histogram, histogram_intersection, Histogram};
use crate::media::FrameStream;

pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shot {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub keyframe: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBoundaryList {
    frame_count: usize,
    /// A boundary at `t` separates frames `t` and `t + 1`.
    boundaries: Vec<usize>,
}

impl ShotBoundaryList {
    pub fn new(frame_count: usize, boundaries: Vec<usize>) -> Result<Self> {
        if frame_count == 0 {
            return Err(Error::EmptyInput("shot list over zero frames"));
        }
        let increasing = boundaries.windows(2).all(|w| w[0] < w[1]);
        if !increasing || boundaries.last().is_some_and(|&b| b + 1 >= frame_count) {
            return Err(Error::Parameter(
                "boundaries must be strictly increasing and inside the stream".into(),
            ));
        }
        Ok(Self {
            frame_count,
            boundaries,
        })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn shot_count(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn shots(&self) -> Vec<Shot> {
        let mut start = 0;
        let mut shots = Vec::with_capacity(self.shot_count());
        for end in self
            .boundaries
            .iter()
            .copied()
            .chain(std::iter::once(self.frame_count - 1))
        {
            shots.push(Shot {
                start,
                end,
                keyframe: (start + end) / 2,
            });
            start = end + 1;
        }
        shots
    }

    pub fn keyframes(&self) -> Vec<usize> {
        self.shots().iter().map(|s| s.keyframe).collect()
    }

    /// `shot_id,start_frame,end_frame,keyframe`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["shot_id", "start_frame", "end_frame", "keyframe"])?;
        for (id, s) in self.shots().iter().enumerate() {
            w.write_record([id, s.start, s.end, s.keyframe].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut shots = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let nums = (0..4)
                .map(|i| {
                    row.get(i)
                        .and_then(|v| v.trim().parse::<usize>().ok())
                        .ok_or_else(|| Error::Parameter(format!("bad shot row {row:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            shots.push(Shot {
                start: nums[1],
                end: nums[2],
                keyframe: nums[3],
            });
        }
        let last = shots.last().ok_or(Error::EmptyInput("shot list CSV"))?;
        let list = Self::new(
            last.end + 1,
            shots[..shots.len() - 1].iter().map(|s| s.end).collect(),
        )?;
        if list.shots() != shots {
            return Err(Error::Parameter("shot rows are not contiguous".into()));
        }
        Ok(list)
    }
}

/// Similarity of each adjacent frame pair.
pub fn adjacent_similarities(histograms: &[Histogram]) -> Result<Vec<f64>> {
    histograms
        .windows(2)
        .map(|w| histogram_intersection(&w[0], &w[1]))
        .collect()
}

/// Boundaries wherever adjacent similarity drops below `threshold`.
pub fn boundaries_from_similarities(similarities: &[f64], threshold: f64) -> Vec<usize> {
    similarities
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < threshold)
        .map(|(t, _)| t)
        .collect()
}

pub fn detect_shots(stream: &FrameStream, threshold: f64) -> Result<ShotBoundaryList> {
    if stream.is_empty() {
        return Err(Error::EmptyInput("frame stream has no frames"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Parameter(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    let histograms = stream
        .frames()
        .iter()
        .map(frame_histogram)
        .collect::<Result<Vec<_>>>()?;
    let sims = adjacent_similarities(&histograms)?;
    ShotBoundaryList::new(stream.len(), boundaries_from_similarities(&sims, threshold))
}
