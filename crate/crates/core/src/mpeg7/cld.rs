use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::Result;
use crate::features::{FeatureKind, FeatureVector};
use crate::media::{rgb_to_ycbcr, FrameBuffer};

const GRID: usize = 8;
pub const CLD_COEFFS_PER_CHANNEL: usize = 40;

/// JPEG zigzag scan of an 8x8 block as `(row, col)` pairs.
pub fn zigzag_order() -> &'static [(usize, usize); 64] {
    static ORDER: OnceLock<[(usize, usize); 64]> = OnceLock::new();
    ORDER.get_or_init(|| {
        let mut order = [(0, 0); 64];
        let mut i = 0;
        for s in 0..(2 * GRID - 1) {
            let lo = s.saturating_sub(GRID - 1);
            let hi = s.min(GRID - 1);
            let rows: Vec<usize> = if s % 2 == 0 {
                (lo..=hi).rev().collect()
            } else {
                (lo..=hi).collect()
            };
            for r in rows {
                order[i] = (r, s - r);
                i += 1;
            }
        }
        order
    })
}

fn dct_basis() -> &'static [[f64; GRID]; GRID] {
    static BASIS: OnceLock<[[f64; GRID]; GRID]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; GRID]; GRID];
        for (u, row) in m.iter_mut().enumerate() {
            let scale = if u == 0 { (1.0 / GRID as f64).sqrt() } else { (2.0 / GRID as f64).sqrt() };
            for (x, v) in row.iter_mut().enumerate() {
                *v = scale * ((2 * x + 1) as f64 * u as f64 * PI / (2 * GRID) as f64).cos();
            }
        }
        m
    })
}

/// Orthonormal separable type-II DCT; `block[row][col]`.
pub fn dct2_8x8(block: &[[f64; GRID]; GRID]) -> [[f64; GRID]; GRID] {
    let c = dct_basis();
    let mut rows = [[0.0; GRID]; GRID];
    for y in 0..GRID {
        for v in 0..GRID {
            rows[y][v] = (0..GRID).map(|x| c[v][x] * block[y][x]).sum();
        }
    }
    let mut out = [[0.0; GRID]; GRID];
    for u in 0..GRID {
        for v in 0..GRID {
            out[u][v] = (0..GRID).map(|y| c[u][y] * rows[y][v]).sum();
        }
    }
    out
}

fn cell_range(i: usize, extent: usize) -> std::ops::Range<usize> {
    let start = i * extent / GRID;
    let end = ((i + 1) * extent / GRID).max(start + 1).min(extent);
    start.min(extent - 1)..end
}

/// Color layout: 8x8 grid of mean colors in YCbCr, DCT per channel, first
/// 40 zigzag coefficients of Y, Cb and Cr.
pub fn cld(frame: &FrameBuffer) -> Result<FeatureVector> {
    let mut planes = [[[0.0; GRID]; GRID]; 3];
    for gy in 0..GRID {
        let ys = cell_range(gy, frame.height());
        for gx in 0..GRID {
            let xs = cell_range(gx, frame.width());
            let mut sum = [0.0; 3];
            let mut n = 0.0;
            for y in ys.clone() {
                for x in xs.clone() {
                    let c = rgb_to_ycbcr(frame.get(x, y));
                    sum[0] += c.y;
                    sum[1] += c.cb;
                    sum[2] += c.cr;
                    n += 1.0;
                }
            }
            for ch in 0..3 {
                planes[ch][gy][gx] = sum[ch] / n;
            }
        }
    }
    let zz = zigzag_order();
    let mut values = Vec::with_capacity(3 * CLD_COEFFS_PER_CHANNEL);
    for plane in &planes {
        let coeffs = dct2_8x8(plane);
        values.extend(zz[..CLD_COEFFS_PER_CHANNEL].iter().map(|&(u, v)| coeffs[u][v]));
    }
    FeatureVector::new(FeatureKind::Cld, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct quadruple-loop DCT-II with orthonormal scaling.
    fn dct_oracle(block: &[[f64; 8]; 8]) -> [[f64; 8]; 8] {
        let alpha = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        let mut out = [[0.0; 8]; 8];
        for u in 0..8 {
            for v in 0..8 {
                let mut s = 0.0;
                for y in 0..8 {
                    for x in 0..8 {
                        s += block[y][x]
                            * (((2 * y + 1) * u) as f64 * PI / 16.0).cos()
                            * (((2 * x + 1) * v) as f64 * PI / 16.0).cos();
                    }
                }
                out[u][v] = alpha(u) * alpha(v) * s;
            }
        }
        out
    }

    #[test]
    fn zigzag_prefix() {
        let zz = zigzag_order();
        assert_eq!(&zz[..6], &[(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(zz[63], (7, 7));
        let mut seen = [[false; 8]; 8];
        for &(r, c) in zz.iter() {
            assert!(!seen[r][c]);
            seen[r][c] = true;
        }
    }

    #[test]
    fn gray_frame_has_only_dc() {
        let v = cld(&FrameBuffer::solid(24, 16, [128, 128, 128]).unwrap()).unwrap();
        assert_eq!(v.len(), 120);
        for (i, x) in v.values().iter().enumerate() {
            if i % CLD_COEFFS_PER_CHANNEL != 0 {
                assert!(x.abs() < 1e-9, "coefficient {i} = {x}");
            }
        }
        assert!((v.values()[0] - 8.0 * 128.0).abs() < 1e-9);
    }

    #[test]
    fn luma_shift_only_moves_y_dc() {
        let base = |d: u8| {
            FrameBuffer::from_fn(32, 32, move |x, y| {
                let r = (x * 5) as u8 + d;
                let g = (y * 4) as u8 + d;
                [r, g, 60 + d]
            })
            .unwrap()
        };
        let a = cld(&base(0)).unwrap();
        let b = cld(&base(20)).unwrap();
        for i in 0..120 {
            let delta = b.values()[i] - a.values()[i];
            if i == 0 {
                assert!((delta - 8.0 * 20.0).abs() < 1e-6);
            } else {
                assert!(delta.abs() < 1e-6, "coefficient {i} moved by {delta}");
            }
        }
    }

    #[test]
    fn matches_direct_dct_oracle() {
        // 8x8 frame: one pixel per cell, so cell means are the pixels
        let f = FrameBuffer::from_fn(8, 8, |x, y| {
            [(x * 31 + y * 7) as u8, (y * 29) as u8, ((x * y * 3) % 256) as u8]
        })
        .unwrap();
        let v = cld(&f).unwrap();
        let zz = zigzag_order();
        for ch in 0..3 {
            let mut block = [[0.0; 8]; 8];
            for y in 0..8 {
                for x in 0..8 {
                    let c = rgb_to_ycbcr(f.get(x, y));
                    block[y][x] = [c.y, c.cb, c.cr][ch];
                }
            }
            let oracle = dct_oracle(&block);
            for k in 0..CLD_COEFFS_PER_CHANNEL {
                let (u, w) = zz[k];
                let got = v.values()[ch * CLD_COEFFS_PER_CHANNEL + k];
                assert!((got - oracle[u][w]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn invariant_under_nearest_neighbour_upsampling() {
        let small = FrameBuffer::from_fn(16, 24, |x, y| [(x * 13) as u8, (y * 9) as u8, ((x + y) * 5) as u8])
            .unwrap();
        let big = FrameBuffer::from_fn(32, 48, |x, y| small.get(x / 2, y / 2)).unwrap();
        for (a, b) in cld(&small).unwrap().values().iter().zip(cld(&big).unwrap().values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn tiny_frames_still_produce_120_values() {
        let v = cld(&FrameBuffer::solid(3, 2, [9, 9, 9]).unwrap()).unwrap();
        assert_eq!(v.len(), 120);
    }
}
