use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::media::FrameBuffer;

/// Minimum filter response for a block to count as an edge.
pub const EDGE_THRESHOLD: f64 = 11.0;
const DESIRED_BLOCKS: f64 = 1100.0;
const SUBIMAGES: usize = 4;
const EDGE_TYPES: usize = 5;

/// Even block side giving roughly 1100 blocks per frame (minimum 2).
pub fn ehd_block_size(width: usize, height: usize) -> usize {
    let a = ((width * height) as f64 / DESIRED_BLOCKS).sqrt() as usize;
    ((a / 2) * 2).max(2)
}

/// Responses of the vertical, horizontal, 45°, 135° and non-directional
/// filters on the four sub-block means (top-left, top-right, bottom-left,
/// bottom-right).
fn filter_responses(a: [f64; 4]) -> [f64; EDGE_TYPES] {
    [
        (a[0] - a[1] + a[2] - a[3]).abs(),
        (a[0] + a[1] - a[2] - a[3]).abs(),
        (SQRT_2 * a[0] - SQRT_2 * a[3]).abs(),
        (SQRT_2 * a[1] - SQRT_2 * a[2]).abs(),
        (2.0 * a[0] - 2.0 * a[1] - 2.0 * a[2] + 2.0 * a[3]).abs(),
    ]
}

/// Edge histogram: 4x4 subimages x 5 edge types, each subimage normalized
/// by its block count.
pub fn ehd(frame: &FrameBuffer) -> Result<FeatureVector> {
    let (w, h) = (frame.width(), frame.height());
    if w < 8 || h < 8 {
        return Err(Error::Size(format!("EHD needs at least 8x8, got {w}x{h}")));
    }
    let luma = frame.luma_plane();
    let bs = ehd_block_size(w, h);
    let half = bs / 2;
    let mut bins = [0.0; SUBIMAGES * SUBIMAGES * EDGE_TYPES];
    let mut counts = [0usize; SUBIMAGES * SUBIMAGES];

    let mean = |x0: usize, y0: usize| -> f64 {
        let mut s = 0.0;
        for y in y0..y0 + half {
            s += luma[y * w + x0..y * w + x0 + half].iter().sum::<f64>();
        }
        s / (half * half) as f64
    };

    let mut by = 0;
    while by + bs <= h {
        let mut bx = 0;
        while bx + bs <= w {
            let sub = (bx * SUBIMAGES / w) + (by * SUBIMAGES / h) * SUBIMAGES;
            counts[sub] += 1;
            let resp = filter_responses([
                mean(bx, by),
                mean(bx + half, by),
                mean(bx, by + half),
                mean(bx + half, by + half),
            ]);
            let (best, &max) = resp
                .iter()
                .enumerate()
                .fold((0, &f64::MIN), |acc, (i, r)| if *r > *acc.1 { (i, r) } else { acc });
            if max >= EDGE_THRESHOLD {
                bins[sub * EDGE_TYPES + best] += 1.0;
            }
            bx += bs;
        }
        by += bs;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Size(format!("subimage {empty} holds no {bs}x{bs} block")));
    }
    for (sub, &n) in counts.iter().enumerate() {
        for b in &mut bins[sub * EDGE_TYPES..(sub + 1) * EDGE_TYPES] {
            *b /= n as f64;
        }
    }
    FeatureVector::new(FeatureKind::Ehd, bins.to_vec())
}
