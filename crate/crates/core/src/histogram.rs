//! The 256-cell HSV quantizer shared by segmentation, SCD and CSD.

use crate::error::{Error, Result};
use crate::media::{rgb_to_hsv, FrameBuffer};

pub const HUE_LEVELS: usize = 16;
pub const SAT_LEVELS: usize = 4;
pub const VAL_LEVELS: usize = 4;
pub const HSV_BINS: usize = HUE_LEVELS * SAT_LEVELS * VAL_LEVELS;

/// Cell index `h * 16 + s * 4 + v` under uniform (16, 4, 4) quantization.
#[inline]
pub fn hsv_bin(rgb: [u8; 3]) -> usize {
    let hsv = rgb_to_hsv(rgb);
    let h = ((hsv.h / 360.0 * HUE_LEVELS as f64) as usize).min(HUE_LEVELS - 1);
    let s = ((hsv.s * SAT_LEVELS as f64) as usize).min(SAT_LEVELS - 1);
    let v = ((hsv.v * VAL_LEVELS as f64) as usize).min(VAL_LEVELS - 1);
    h * SAT_LEVELS * VAL_LEVELS + s * VAL_LEVELS + v
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
    normalized: bool,
}

impl Histogram {
    pub fn new(bins: Vec<f64>) -> Result<Self> {
        if let Some(b) = bins.iter().find(|b| !(**b >= 0.0)) {
            return Err(Error::Parameter(format!("histogram bin {b} is negative")));
        }
        Ok(Self {
            bins,
            normalized: false,
        })
    }

    /// Scales to unit mass. An all-zero histogram is left unchanged.
    pub fn normalize(mut self) -> Self {
        let total: f64 = self.bins.iter().sum();
        if total > 0.0 {
            self.bins.iter_mut().for_each(|b| *b /= total);
            self.normalized = true;
        }
        self
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.bins
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.bins.iter().sum()
    }
}

/// Normalized 256-bin HSV histogram of a frame.
pub fn frame_histogram(frame: &FrameBuffer) -> Result<Histogram> {
    if frame.pixel_count() == 0 {
        return Err(Error::EmptyInput("frame has no pixels"));
    }
    let mut counts = vec![0u64; HSV_BINS];
    for px in frame.iter_rgb() {
        counts[hsv_bin(px)] += 1;
    }
    let bins = counts.into_iter().map(|c| c as f64).collect();
    Ok(Histogram::new(bins)?.normalize())
}

/// `Σ_b min(h1[b], h2[b])`.
pub fn histogram_intersection(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(Error::Dimension(format!(
            "histograms have {} and {} bins",
            h1.len(),
            h2.len()
        )));
    }
    Ok(h1
        .bins
        .iter()
        .zip(&h2.bins)
        .map(|(a, b)| a.min(*b))
        .sum())
}
