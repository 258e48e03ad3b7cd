//! The five MPEG-7 color and texture descriptors computed per keyframe.
//!
//! | descriptor | length |
//! |------------|--------|
//! | SCD        | 256    |
//! | CSD        | 256    |
//! | CLD        | 120    |
//! | EHD        | 80     |
//! | HTD        | 62     |
//!
//! [`mpeg7_all`] concatenates them in that order (774 values).

mod cld;
mod csd;
mod ehd;
mod htd;
mod scd;

pub use cld::{cld, dct2_8x8, zigzag_order, CLD_COEFFS_PER_CHANNEL};
pub use csd::{csd, csd_subsample_factor};
pub use ehd::{ehd, ehd_block_size, EDGE_THRESHOLD};
pub use htd::{htd, GaborBank, HTD_MIN_SIZE, ORIENTATIONS, SCALES};
pub use scd::scd;

use crate::error::Result;
use crate::features::{FeatureKind, FeatureVector};
use crate::media::FrameBuffer;

pub fn mpeg7_all(frame: &FrameBuffer) -> Result<FeatureVector> {
    let parts = [scd(frame)?, csd(frame)?, cld(frame)?, ehd(frame)?, htd(frame)?];
    let values = parts.into_iter().flat_map(FeatureVector::into_values).collect();
    FeatureVector::new(FeatureKind::Mpeg7All, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_frame_composition() {
        let f = FrameBuffer::solid(40, 36, [128, 128, 128]).unwrap();
        let v = mpeg7_all(&f).unwrap();
        assert_eq!(v.len(), 774);
        let s = v.values();
        assert!((s[..256].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((s[256..512].iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(s[632..712].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn distinct_frames_differ_and_repeat_exactly() {
        let a = FrameBuffer::solid(32, 32, [200, 20, 20]).unwrap();
        let b = FrameBuffer::solid(32, 32, [20, 20, 200]).unwrap();
        let va = mpeg7_all(&a).unwrap();
        assert_ne!(va, mpeg7_all(&b).unwrap());
        assert_eq!(va, mpeg7_all(&a).unwrap());
    }
}
