use crate::error::Result;
use crate::features::{FeatureKind, FeatureVector};
use crate::histogram::frame_histogram;
use crate::media::FrameBuffer;

/// Scalable color: the normalized (16, 4, 4) HSV histogram, hue-major.
pub fn scd(frame: &FrameBuffer) -> Result<FeatureVector> {
    FeatureVector::new(FeatureKind::Scd, frame_histogram(frame)?.into_bins())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::hsv_bin;

    #[test]
    fn black_and_blue() {
        let black = scd(&FrameBuffer::solid(3, 3, [0, 0, 0]).unwrap()).unwrap();
        assert_eq!(black.values()[0], 1.0);
        let blue = scd(&FrameBuffer::solid(3, 3, [0, 0, 255]).unwrap()).unwrap();
        assert_eq!(blue.values()[10 * 16 + 3 * 4 + 3], 1.0);
    }

    #[test]
    fn checkerboard_splits_mass() {
        let (a, b) = ([250, 200, 10], [30, 60, 90]);
        let f = FrameBuffer::from_fn(6, 6, |x, y| if (x + y) % 2 == 0 { a } else { b }).unwrap();
        let v = scd(&f).unwrap();
        // a: H = 60*(190/240) = 47.5 -> 2, S = .96 -> 3, V = .98 -> 3
        // b: H = 60*((30-60)/60 + 4) = 210 -> 9, S = .667 -> 2, V = .353 -> 1
        assert_eq!(hsv_bin(a), 2 * 16 + 3 * 4 + 3);
        assert_eq!(hsv_bin(b), 9 * 16 + 2 * 4 + 1);
        assert_eq!(v.values()[hsv_bin(a)], 0.5);
        assert_eq!(v.values()[hsv_bin(b)], 0.5);
    }
}
