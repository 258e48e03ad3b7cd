//! Frame containers, still/stream parsers and the color-space conversions
//! used by the descriptors.

mod color;
mod frame;
mod ppm;
mod y4m;

pub use color::{hsv_to_rgb, luma, rgb_to_hsv, rgb_to_ycbcr, ycbcr_to_rgb, Hsv, YCbCr};
pub use frame::{FrameBuffer, FrameStream};
pub use ppm::{parse_ppm, write_ppm};
pub use y4m::{parse_y4m, write_y4m, Chroma};
