//! 8-bit grayscale PNG decoding (feature `png`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Decodes a PNG, converting color inputs to 8-bit luma.
pub fn read_png(path: impl AsRef<Path>) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::Format(e.to_string()))?;
    let luma = img.to_luma8();
    GrayImage::from_u8(luma.height() as usize, luma.width() as usize, luma.as_raw())
}
