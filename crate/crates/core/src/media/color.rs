//! Hexcone HSV and BT.601 full-range YCbCr.

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCbCr {
    pub y: f64,
    pub cb: f64,
    pub cr: f64,
}

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;

/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> Hsv {
    let [r, g, b] = rgb.map(f64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max / 255.0;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return Hsv { h: 0.0, s, v };
    }
    let sector = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsv { h, s, v }
}

/// Inverse hexcone map, rounded to the nearest 8-bit value.
pub fn hsv_to_rgb(hsv: Hsv) -> [u8; 3] {
    let c = hsv.v * hsv.s;
    let hp = (hsv.h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = hsv.v - c;
    [r1, g1, b1].map(|ch| to_u8((ch + m) * 255.0))
}

pub fn luma(rgb: [u8; 3]) -> f64 {
    let [r, g, b] = rgb.map(f64::from);
    KR * r + KG * g + KB * b
}

/// Real-valued BT.601 full-range conversion (no rounding).
pub fn rgb_to_ycbcr(rgb: [u8; 3]) -> YCbCr {
    let [r, g, b] = rgb.map(f64::from);
    let y = KR * r + KG * g + KB * b;
    YCbCr {
        y,
        cb: 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b,
        cr: 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b,
    }
}

pub fn ycbcr_to_rgb(c: YCbCr) -> [u8; 3] {
    let cb = c.cb - 128.0;
    let cr = c.cr - 128.0;
    [
        to_u8(c.y + 1.402 * cr),
        to_u8(c.y - 0.344136 * cb - 0.714136 * cr),
        to_u8(c.y + 1.772 * cb),
    ]
}

#[inline]
fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hsv_reference_points() {
        assert_eq!(rgb_to_hsv([0, 0, 0]), Hsv { h: 0.0, s: 0.0, v: 0.0 });
        assert_eq!(rgb_to_hsv([255, 0, 0]), Hsv { h: 0.0, s: 1.0, v: 1.0 });
        // max=128 (red), min=32, delta=96: H = 60 * 32/96, S = 96/128, V = 128/255
        let hsv = rgb_to_hsv([128, 64, 32]);
        assert!(close(hsv.h, 20.0, 1e-6));
        assert!(close(hsv.s, 0.75, 1e-6));
        assert!(close(hsv.v, 128.0 / 255.0, 1e-6));
    }

    #[test]
    fn ycbcr_reference_points() {
        let black = rgb_to_ycbcr([0, 0, 0]);
        assert_eq!((black.y, black.cb, black.cr), (0.0, 128.0, 128.0));
        let white = rgb_to_ycbcr([255, 255, 255]);
        assert!(close(white.y, 255.0, 1e-9));
        assert!(close(white.cb, 128.0, 1e-9));
        assert!(close(white.cr, 128.0, 1e-9));
        // Y = .299*255, Cb = 128 - .168736*255, Cr = 128 + .5*255
        let red = rgb_to_ycbcr([255, 0, 0]);
        assert!(close(red.y, 76.245, 1e-3));
        assert!(close(red.cb, 84.97232, 1e-3));
        assert!(close(red.cr, 255.5, 1e-3));
    }

    #[test]
    fn mid_gray_decodes_to_mid_gray() {
        let rgb = ycbcr_to_rgb(YCbCr {
            y: 128.0,
            cb: 128.0,
            cr: 128.0,
        });
        assert_eq!(rgb, [128, 128, 128]);
    }

    #[test]
    fn hsv_round_trip_on_lattice() {
        let steps: Vec<u8> = (0..17).map(|i| (i * 255 / 16) as u8).collect();
        for &r in &steps {
            for &g in &steps {
                for &b in &steps {
                    let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                    for (x, y) in back.iter().zip([r, g, b]) {
                        assert!((*x as i32 - y as i32).abs() <= 1, "{r},{g},{b} -> {back:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn gray_is_achromatic() {
        for v in 0..=255u8 {
            let hsv = rgb_to_hsv([v, v, v]);
            assert_eq!(hsv.s, 0.0);
            assert_eq!(hsv.h, 0.0);
            let c = rgb_to_ycbcr([v, v, v]);
            assert!(close(c.cb, 128.0, 1e-9) && close(c.cr, 128.0, 1e-9));
        }
    }
}
