//! Homogeneous texture: energies of a 6-orientation x 5-scale Gabor bank
//! applied in the frequency domain.
//!
//! Channel `k = scale * 6 + orientation`. Scale `s` is centred at
//! `0.375 / 2^s` cycles/pixel with an octave-wide half-peak radial band,
//! orientation `r` at `30° * r` with a 30° half-peak angular band. The DC
//! term of every filter is zero.

use std::f64::consts::LN_2;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::media::FrameBuffer;

pub const ORIENTATIONS: usize = 6;
pub const SCALES: usize = 5;
pub const HTD_MIN_SIZE: usize = 32;

const CENTER_FREQ: f64 = 0.375;
const RADIAL_BANDWIDTH: f64 = 0.25;
const ORIENTATION_STEP_DEG: f64 = 180.0 / ORIENTATIONS as f64;

/// Gabor transfer functions sampled on a `width x height` DFT grid.
pub struct GaborBank {
    width: usize,
    height: usize,
    filters: Vec<Vec<f64>>,
}

impl GaborBank {
    pub fn new(width: usize, height: usize) -> Self {
        let half_peak = 2.0 * (2.0 * LN_2).sqrt();
        let sigma_theta = ORIENTATION_STEP_DEG / half_peak;
        let mut filters = Vec::with_capacity(SCALES * ORIENTATIONS);
        for s in 0..SCALES {
            let center = CENTER_FREQ / f64::from(1u32 << s);
            let sigma_rho = RADIAL_BANDWIDTH / f64::from(1u32 << s) / half_peak;
            for r in 0..ORIENTATIONS {
                let theta_r = ORIENTATION_STEP_DEG * r as f64;
                let mut g = vec![0.0; width * height];
                for ky in 0..height {
                    let fy = signed_freq(ky, height);
                    for kx in 0..width {
                        if kx == 0 && ky == 0 {
                            continue;
                        }
                        let fx = signed_freq(kx, width);
                        let rho = fx.hypot(fy);
                        let theta = fy.atan2(fx).to_degrees().rem_euclid(180.0);
                        let mut dt = (theta - theta_r).abs();
                        dt = dt.min(180.0 - dt);
                        g[ky * width + kx] = (-(rho - center).powi(2) / (2.0 * sigma_rho * sigma_rho)
                            - dt * dt / (2.0 * sigma_theta * sigma_theta))
                            .exp();
                    }
                }
                filters.push(g);
            }
        }
        Self {
            width,
            height,
            filters,
        }
    }

    pub fn filter(&self, scale: usize, orientation: usize) -> &[f64] {
        &self.filters[scale * ORIENTATIONS + orientation]
    }

    /// Per-channel mean and standard deviation of `|response|^2`.
    pub fn channel_stats(&self, luma: &[f64]) -> Vec<(f64, f64)> {
        let (w, h) = (self.width, self.height);
        let mut planner = FftPlanner::<f64>::new();
        let mean = luma.iter().sum::<f64>() / luma.len() as f64;
        let mut spectrum: Vec<Complex64> =
            luma.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect();
        fft2(&mut planner, &mut spectrum, w, h, false);

        let norm = (w * h) as f64;
        self.filters
            .iter()
            .map(|g| {
                let mut resp: Vec<Complex64> =
                    spectrum.iter().zip(g).map(|(x, &gv)| x * gv).collect();
                fft2(&mut planner, &mut resp, w, h, true);
                let energy: Vec<f64> = resp.iter().map(|c| c.norm_sqr() / (norm * norm)).collect();
                mean_std(&energy)
            })
            .collect()
    }
}

fn signed_freq(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64 / n as f64
    } else {
        (k as f64 - n as f64) / n as f64
    }
}

fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex64], w: usize, h: usize, inverse: bool) {
    let row_fft = if inverse { planner.plan_fft_inverse(w) } else { planner.plan_fft_forward(w) };
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = if inverse { planner.plan_fft_inverse(h) } else { planner.plan_fft_forward(h) };
    let mut column = vec![Complex64::default(); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `[mean(luma), std(luma), e_1..e_30, d_1..d_30]` with
/// `e = ln(1 + mean |r|^2)` and `d = ln(1 + std |r|^2)`.
pub fn htd(frame: &FrameBuffer) -> Result<FeatureVector> {
    let (w, h) = (frame.width(), frame.height());
    if w < HTD_MIN_SIZE || h < HTD_MIN_SIZE {
        return Err(Error::Size(format!(
            "HTD needs at least {HTD_MIN_SIZE}x{HTD_MIN_SIZE}, got {w}x{h}"
        )));
    }
    let luma = frame.luma_plane();
    let (mean, std) = mean_std(&luma);
    let stats = GaborBank::new(w, h).channel_stats(&luma);
    let mut values = Vec::with_capacity(62);
    values.push(mean);
    values.push(std);
    values.extend(stats.iter().map(|(m, _)| m.ln_1p()));
    values.extend(stats.iter().map(|(_, s)| s.ln_1p()));
    FeatureVector::new(FeatureKind::Htd, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grating(n: usize, kx: f64, ky: f64, amplitude: f64) -> FrameBuffer {
        FrameBuffer::from_fn(n, n, |x, y| {
            let phase = 2.0 * PI * (kx * x as f64 + ky * y as f64) / n as f64;
            let v = (128.0 + amplitude * phase.cos()).round() as u8;
            [v, v, v]
        })
        .unwrap()
    }

    fn energies(v: &FeatureVector) -> &[f64] {
        &v.values()[2..32]
    }

    #[test]
    fn gray_frame_has_zero_texture_energy() {
        let v = htd(&FrameBuffer::solid(40, 33, [128, 128, 128]).unwrap()).unwrap();
        assert_eq!(v.len(), 62);
        assert!((v.values()[0] - 128.0).abs() < 1e-9);
        assert!(v.values()[1].abs() < 1e-9);
        assert!(v.values()[2..].iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn tuned_grating_peaks_in_its_channel() {
        // wave vector along x at 0.375 cycles/pixel: scale 0, orientation 0
        let v = htd(&grating(64, 24.0, 0.0, 60.0)).unwrap();
        let e = energies(&v);
        let best = (0..30).max_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap();
        assert_eq!(best, 0, "{e:?}");
    }

    #[test]
    fn rotation_by_one_step_shifts_orientation_axis() {
        // (24, 0) and (21, 12) on a 128 grid: |k| = 24 vs 24.2, angles 0° vs 29.7°
        let a = htd(&grating(128, 24.0, 0.0, 60.0)).unwrap();
        let b = htd(&grating(128, 21.0, 12.0, 60.0)).unwrap();
        let (ea, eb) = (energies(&a), energies(&b));
        let mut diff = 0.0;
        let mut norm = 0.0;
        for s in 0..SCALES {
            for r in 0..ORIENTATIONS {
                let shifted = eb[s * ORIENTATIONS + (r + 1) % ORIENTATIONS];
                diff += (ea[s * ORIENTATIONS + r] - shifted).powi(2);
                norm += ea[s * ORIENTATIONS + r].powi(2);
            }
        }
        assert!((diff / norm).sqrt() < 0.10, "relative deviation {}", (diff / norm).sqrt());
    }

    #[test]
    fn too_small_is_size_error() {
        assert!(matches!(htd(&FrameBuffer::solid(31, 64, [1, 2, 3]).unwrap()), Err(Error::Size(_))));
    }

    #[test]
    fn bank_has_zero_dc_and_unit_peak() {
        let bank = GaborBank::new(64, 64);
        for s in 0..SCALES {
            for r in 0..ORIENTATIONS {
                let g = bank.filter(s, r);
                assert_eq!(g[0], 0.0);
                assert!(g.iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }
    }
}
