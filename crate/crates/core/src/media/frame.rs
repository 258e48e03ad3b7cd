use crate::error::{Error, Result};

/// One decoded frame: row-major interleaved 8-bit RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl FrameBuffer {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyInput("frame has zero width or height"));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::Dimension(format!(
                "{}x{} frame needs {} bytes, got {}",
                width,
                height,
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Frame filled with a single color.
    pub fn solid(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let pixels = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, pixels)
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn iter_rgb(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.pixels.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// BT.601 luma plane, row-major.
    pub fn luma_plane(&self) -> Vec<f64> {
        self.iter_rgb().map(super::luma).collect()
    }
}

/// Ordered frames sharing one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStream {
    frames: Vec<FrameBuffer>,
    frame_rate: f64,
}

impl FrameStream {
    pub fn new(frames: Vec<FrameBuffer>, frame_rate: f64) -> Result<Self> {
        if let Some(first) = frames.first() {
            let dims = (first.width, first.height);
            if let Some((i, f)) = frames
                .iter()
                .enumerate()
                .find(|(_, f)| (f.width, f.height) != dims)
            {
                return Err(Error::Dimension(format!(
                    "frame {i} is {}x{}, stream is {}x{}",
                    f.width, f.height, dims.0, dims.1
                )));
            }
        }
        Ok(Self { frames, frame_rate })
    }

    pub fn frames(&self) -> &[FrameBuffer] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<FrameBuffer> {
        self.frames
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}
