use crate::error::Result;
use crate::features::{FeatureKind, FeatureVector};
use crate::histogram::{hsv_bin, HSV_BINS};
use crate::media::FrameBuffer;

const WINDOW: usize = 8;

/// Sub-sampling factor `K = 2^p`, `p = max(0, round(log2(W*H)/2 - 8))`.
pub fn csd_subsample_factor(width: usize, height: usize) -> usize {
    let p = (0.5 * ((width * height) as f64).log2() - 8.0).round().max(0.0);
    1 << (p as u32)
}

/// Color structure histogram: for every placement of an 8x8-sample window
/// on the K-subsampled image, each HSV cell present in the window counts
/// once. Normalized by the number of placements.
pub fn csd(frame: &FrameBuffer) -> Result<FeatureVector> {
    let mut hist = vec![0.0; HSV_BINS];
    let k = csd_subsample_factor(frame.width(), frame.height());
    let (sw, sh) = (frame.width() / k, frame.height() / k);

    if sw < WINDOW || sh < WINDOW {
        let mut present = [false; HSV_BINS];
        for px in frame.iter_rgb() {
            present[hsv_bin(px)] = true;
        }
        for (h, p) in hist.iter_mut().zip(present) {
            *h = if p { 1.0 } else { 0.0 };
        }
        return FeatureVector::new(FeatureKind::Csd, hist);
    }

    let cells: Vec<u8> = (0..sh)
        .flat_map(|y| (0..sw).map(move |x| (x, y)))
        .map(|(x, y)| hsv_bin(frame.get(x * k, y * k)) as u8)
        .collect();

    let mut counts = vec![0u64; HSV_BINS];
    let mut stamp = vec![u32::MAX; HSV_BINS];
    let mut placement = 0u32;
    for y0 in 0..=sh - WINDOW {
        for x0 in 0..=sw - WINDOW {
            for dy in 0..WINDOW {
                let start = (y0 + dy) * sw + x0;
                for &c in &cells[start..start + WINDOW] {
                    let c = c as usize;
                    if stamp[c] != placement {
                        stamp[c] = placement;
                        counts[c] += 1;
                    }
                }
            }
            placement += 1;
        }
    }
    let n = f64::from(placement);
    for (h, c) in hist.iter_mut().zip(counts) {
        *h = c as f64 / n;
    }
    FeatureVector::new(FeatureKind::Csd, hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpeg7::scd;

    const RED: [u8; 3] = [255, 0, 0];
    const BLUE: [u8; 3] = [0, 0, 255];

    #[test]
    fn subsample_factor() {
        assert_eq!(csd_subsample_factor(16, 16), 1);
        assert_eq!(csd_subsample_factor(320, 240), 1); // 0.5*16.2 - 8 = 0.1
        assert_eq!(csd_subsample_factor(640, 480), 2); // 0.5*18.2 - 8 = 1.1
        assert_eq!(csd_subsample_factor(1920, 1080), 4);
    }

    #[test]
    fn solid_frame() {
        let v = csd(&FrameBuffer::solid(20, 12, [10, 200, 30]).unwrap()).unwrap();
        let cell = hsv_bin([10, 200, 30]);
        assert_eq!(v.values()[cell], 1.0);
        assert_eq!(v.values().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn half_and_half_counts_both_at_the_seam() {
        let f = FrameBuffer::from_fn(64, 64, |x, _| if x < 32 { RED } else { BLUE }).unwrap();
        let v = csd(&f).unwrap();
        let (r, b) = (v.values()[hsv_bin(RED)], v.values()[hsv_bin(BLUE)]);
        assert!(r > 0.0 && r <= 1.0 && b > 0.0 && b <= 1.0);
        assert!(r + b > 1.0);
        let others: f64 = v.values().iter().sum::<f64>() - r - b;
        assert_eq!(others, 0.0);
    }

    #[test]
    fn single_pixel_matches_window_enumeration() {
        const GREEN: [u8; 3] = [0, 255, 0];
        let (px, py) = (3usize, 11usize);
        let f = FrameBuffer::from_fn(16, 16, |x, y| if (x, y) == (px, py) { GREEN } else { [0, 0, 0] })
            .unwrap();
        let v = csd(&f).unwrap();
        let (mut covering, mut total) = (0, 0);
        for y0 in 0..=8 {
            for x0 in 0..=8 {
                total += 1;
                if (x0..x0 + 8).contains(&px) && (y0..y0 + 8).contains(&py) {
                    covering += 1;
                }
            }
        }
        assert_eq!(total, 81);
        assert_eq!(covering, 4 * 5);
        assert!((v.values()[hsv_bin(GREEN)] - covering as f64 / total as f64).abs() < 1e-12);
        assert_eq!(v.values()[hsv_bin([0, 0, 0])], 1.0);
    }

    #[test]
    fn tiny_frame_falls_back_to_one_window() {
        let f = FrameBuffer::from_fn(5, 5, |x, _| if x == 0 { RED } else { BLUE }).unwrap();
        let v = csd(&f).unwrap();
        assert_eq!(v.values()[hsv_bin(RED)], 1.0);
        assert_eq!(v.values()[hsv_bin(BLUE)], 1.0);
    }

    #[test]
    fn scrambling_changes_csd_but_not_scd() {
        let ordered = FrameBuffer::from_fn(32, 32, |x, _| if x < 16 { RED } else { BLUE }).unwrap();
        let scrambled =
            FrameBuffer::from_fn(32, 32, |x, y| if (x * 7 + y * 13) % 2 == 0 { RED } else { BLUE })
                .unwrap();
        assert_eq!(scd(&ordered).unwrap(), scd(&scrambled).unwrap());
        assert_ne!(csd(&ordered).unwrap(), csd(&scrambled).unwrap());
    }
}
