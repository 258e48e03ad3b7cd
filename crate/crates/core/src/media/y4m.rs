//! YUV4MPEG2 reader and writer (8-bit, 4:2:0 / 4:2:2 / 4:4:4).

use super::color::{rgb_to_ycbcr, ycbcr_to_rgb, YCbCr};
use super::frame::{FrameBuffer, FrameStream};
use crate::error::{Error, Result};

const SIGNATURE: &[u8] = b"YUV4MPEG2";
const FRAME_MARKER: &[u8] = b"FRAME";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chroma {
    C420,
    C422,
    C444,
}

impl Chroma {
    fn parse(tag: &str) -> Option<Self> {
        match tag {
            "420" | "420jpeg" | "420paldv" | "420mpeg2" => Some(Chroma::C420),
            "422" => Some(Chroma::C422),
            "444" => Some(Chroma::C444),
            _ => None,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Chroma::C420 => "420jpeg",
            Chroma::C422 => "422",
            Chroma::C444 => "444",
        }
    }

    /// Subsampling shift in (x, y).
    fn shift(self) -> (u32, u32) {
        match self {
            Chroma::C420 => (1, 1),
            Chroma::C422 => (1, 0),
            Chroma::C444 => (0, 0),
        }
    }

    fn plane_dims(self, width: usize, height: usize) -> (usize, usize) {
        let (sx, sy) = self.shift();
        (
            (width + (1 << sx) - 1) >> sx,
            (height + (1 << sy) - 1) >> sy,
        )
    }
}

struct Header {
    width: usize,
    height: usize,
    frame_rate: f64,
    chroma: Chroma,
}

fn read_line(bytes: &[u8], start: usize) -> Option<(&[u8], usize)> {
    let rel = bytes[start..].iter().position(|&b| b == b'\n')?;
    Some((&bytes[start..start + rel], start + rel + 1))
}

fn parse_header(bytes: &[u8]) -> Result<(Header, usize)> {
    if !bytes.starts_with(SIGNATURE) {
        let offset = bytes
            .iter()
            .zip(SIGNATURE)
            .position(|(a, b)| a != b)
            .unwrap_or(bytes.len());
        return Err(Error::format(offset, "missing YUV4MPEG2 signature"));
    }
    let (line, next) = read_line(bytes, 0)
        .ok_or_else(|| Error::format(bytes.len(), "header line not terminated"))?;
    let mut width = None;
    let mut height = None;
    let mut frame_rate = 0.0;
    let mut chroma = Chroma::C420;

    let mut offset = SIGNATURE.len();
    let rest = &line[SIGNATURE.len()..];
    if !rest.is_empty() && rest[0] != b' ' {
        return Err(Error::format(offset, "signature must be followed by a space"));
    }
    for token in rest.split(|&b| b == b' ') {
        let tok_offset = offset;
        offset += token.len() + 1;
        if token.is_empty() {
            continue;
        }
        let text = std::str::from_utf8(token)
            .map_err(|_| Error::format(tok_offset, "non-ASCII header tag"))?;
        let (key, value) = text.split_at(1);
        let bad = |what: &str| Error::format(tok_offset, format!("invalid {what} tag {text:?}"));
        match key {
            "W" => width = Some(value.parse::<usize>().map_err(|_| bad("width"))?),
            "H" => height = Some(value.parse::<usize>().map_err(|_| bad("height"))?),
            "F" => {
                let (n, d) = value.split_once(':').ok_or_else(|| bad("frame rate"))?;
                let n: f64 = n.parse().map_err(|_| bad("frame rate"))?;
                let d: f64 = d.parse().map_err(|_| bad("frame rate"))?;
                frame_rate = if d > 0.0 { n / d } else { 0.0 };
            }
            "C" => chroma = Chroma::parse(value).ok_or_else(|| bad("colorspace"))?,
            "I" | "A" | "X" => {}
            _ => return Err(bad("unknown")),
        }
    }
    let width = width.filter(|&w| w > 0).ok_or_else(|| Error::format(next - 1, "missing W tag"))?;
    let height = height.filter(|&h| h > 0).ok_or_else(|| Error::format(next - 1, "missing H tag"))?;
    Ok((
        Header {
            width,
            height,
            frame_rate,
            chroma,
        },
        next,
    ))
}

/// Decodes a YUV4MPEG2 stream to RGB frames (BT.601 full range, nearest
/// chroma upsampling).
pub fn parse_y4m(bytes: &[u8]) -> Result<FrameStream> {
    let (header, mut pos) = parse_header(bytes)?;
    let (w, h) = (header.width, header.height);
    let (cw, ch) = header.chroma.plane_dims(w, h);
    let (sx, sy) = header.chroma.shift();
    let payload = w * h + 2 * cw * ch;

    let mut frames = Vec::new();
    while pos < bytes.len() {
        let index = frames.len();
        if !bytes[pos..].starts_with(FRAME_MARKER) {
            if FRAME_MARKER.starts_with(&bytes[pos..]) {
                return Err(Error::Truncated { frame: index });
            }
            return Err(Error::format(pos, "expected FRAME marker"));
        }
        let (_, data_start) =
            read_line(bytes, pos).ok_or(Error::Truncated { frame: index })?;
        let data = bytes
            .get(data_start..data_start + payload)
            .ok_or(Error::Truncated { frame: index })?;
        let (y_plane, chroma) = data.split_at(w * h);
        let (cb_plane, cr_plane) = chroma.split_at(cw * ch);

        let mut pixels = Vec::with_capacity(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                let c = (y >> sy) * cw + (x >> sx);
                let rgb = ycbcr_to_rgb(YCbCr {
                    y: f64::from(y_plane[y * w + x]),
                    cb: f64::from(cb_plane[c]),
                    cr: f64::from(cr_plane[c]),
                });
                pixels.extend_from_slice(&rgb);
            }
        }
        frames.push(FrameBuffer::new(w, h, pixels)?);
        pos = data_start + payload;
    }
    FrameStream::new(frames, header.frame_rate)
}

/// Encodes frames as YUV4MPEG2. Chroma is box-averaged when subsampled.
pub fn write_y4m(frames: &[FrameBuffer], fps: u32, chroma: Chroma) -> Result<Vec<u8>> {
    let first = frames
        .first()
        .ok_or(Error::EmptyInput("no frames to encode"))?;
    let (w, h) = (first.width(), first.height());
    let (cw, ch) = chroma.plane_dims(w, h);
    let (sx, sy) = chroma.shift();

    let mut out = format!(
        "YUV4MPEG2 W{w} H{h} F{fps}:1 Ip A1:1 C{}\n",
        chroma.tag()
    )
    .into_bytes();
    for frame in frames {
        if (frame.width(), frame.height()) != (w, h) {
            return Err(Error::Dimension("frames differ in size".into()));
        }
        let conv: Vec<YCbCr> = frame.iter_rgb().map(rgb_to_ycbcr).collect();
        out.extend_from_slice(b"FRAME\n");
        out.extend(conv.iter().map(|c| quantize(c.y)));
        for pick in [|c: &YCbCr| c.cb, |c: &YCbCr| c.cr] {
            for cy in 0..ch {
                for cx in 0..cw {
                    let mut sum = 0.0;
                    let mut n = 0.0;
                    for y in (cy << sy)..((cy + 1) << sy).min(h) {
                        for x in (cx << sx)..((cx + 1) << sx).min(w) {
                            sum += pick(&conv[y * w + x]);
                            n += 1.0;
                        }
                    }
                    out.push(quantize(sum / n));
                }
            }
        }
    }
    Ok(out)
}

fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
