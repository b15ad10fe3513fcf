//! Grayscale images, noise models, metrics and file formats.

pub mod metrics;
pub mod noise;
pub mod pgm;
#[cfg(feature = "png")]
pub mod png;

use crate::error::{Error, Result};

/// `height x width` intensities in `[0, 1]`, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!("empty image {height}x{width}")));
        }
        if pixels.len() != height * width {
            return Err(Error::dim(format!(
                "{} pixels for a {height}x{width} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!(
                "pixel {i} = {} is outside [0, 1]",
                pixels[i]
            )));
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    /// 8-bit samples `k` become `k / 255`.
    pub fn from_u8(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        Self::new(height, width, data.iter().map(|&k| k as f64 / 255.0).collect())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// Row-major pixel slice.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    /// Column-major vectorisation.
    pub fn vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for c in 0..self.width {
            for r in 0..self.height {
                out.push(self.get(r, c));
            }
        }
        out
    }

    /// Inverse of [`vec`](Self::vec).
    pub fn mat(v: &[f64], height: usize, width: usize) -> Result<Self> {
        if height * width != v.len() {
            return Err(Error::dim(format!(
                "vector of length {} cannot be reshaped to {height}x{width}",
                v.len()
            )));
        }
        let mut pixels = vec![0.0; v.len()];
        for c in 0..width {
            for r in 0..height {
                pixels[r * width + c] = v[c * height + r];
            }
        }
        Self::new(height, width, pixels)
    }

    /// 8-bit samples, rounding to nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        quantize(&self.pixels)
    }

    /// Sub-image starting at (`top`, `left`).
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if top + height > self.height || left + width > self.width || height == 0 || width == 0 {
            return Err(Error::dim(format!(
                "crop {height}x{width}+{top}+{left} outside a {}x{} image",
                self.height, self.width
            )));
        }
        let mut pixels = Vec::with_capacity(height * width);
        for r in top..top + height {
            pixels.extend_from_slice(&self.pixels[r * self.width + left..r * self.width + left + width]);
        }
        Self::new(height, width, pixels)
    }

    /// Box-filter downscale by an integer factor; trailing rows/columns that
    /// do not fill a block are dropped.
    pub fn downscale(&self, factor: usize) -> Result<Self> {
        if factor == 0 || factor > self.height || factor > self.width {
            return Err(Error::invalid(format!(
                "cannot downscale a {}x{} image by {factor}",
                self.height, self.width
            )));
        }
        let (h, w) = (self.height / factor, self.width / factor);
        let area = (factor * factor) as f64;
        let mut pixels = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                let mut s = 0.0;
                for dr in 0..factor {
                    for dc in 0..factor {
                        s += self.get(r * factor + dr, c * factor + dc);
                    }
                }
                pixels.push((s / area).clamp(0.0, 1.0));
            }
        }
        Self::new(h, w, pixels)
    }

    /// Smallest integer downscale making both sides at most `max_dim`.
    pub fn limit_size(&self, max_dim: usize) -> Result<Self> {
        if max_dim == 0 {
            return Err(Error::invalid("max dimension must be positive"));
        }
        let factor = self.height.max(self.width).div_ceil(max_dim);
        if factor <= 1 {
            Ok(self.clone())
        } else {
            self.downscale(factor)
        }
    }
}

/// Clamps to `[0, 1]` and rounds to 8 bits.
pub fn quantize(values: &[f64]) -> Vec<u8> {
    values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

pub fn clamp_unit(values: &mut [f64]) {
    values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_is_column_major() {
        let img = GrayImage::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(img.vec(), vec![0.1, 0.3, 0.2, 0.4]);
        assert_eq!(GrayImage::mat(&img.vec(), 2, 2).unwrap(), img);
        let one = GrayImage::new(1, 1, vec![0.5]).unwrap();
        assert_eq!(one.vec(), vec![0.5]);
        assert!(GrayImage::mat(&[0.5; 3], 2, 2).is_err());
    }

    #[test]
    fn validation() {
        assert!(GrayImage::new(1, 2, vec![0.0, 1.5]).is_err());
        assert!(GrayImage::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        let img = GrayImage::from_u8(1, 3, &[0, 51, 255]).unwrap();
        assert_eq!(img.pixels(), &[0.0, 0.2, 1.0]);
        assert_eq!(img.to_u8(), vec![0, 51, 255]);
    }

    #[test]
    fn crop_and_downscale() {
        let img = GrayImage::from_u8(4, 4, &(0..16).map(|k| k * 10).collect::<Vec<u8>>()).unwrap();
        let c = img.crop(1, 2, 2, 2).unwrap();
        assert_eq!(c.to_u8(), vec![60, 70, 100, 110]);
        assert!(img.crop(3, 3, 2, 2).is_err());
        let d = img.downscale(2).unwrap();
        assert_eq!((d.height(), d.width()), (2, 2));
        assert_eq!(d.to_u8(), vec![25, 45, 105, 125]);
        assert_eq!(img.limit_size(4).unwrap(), img);
        assert_eq!(img.limit_size(3).unwrap(), d);
    }
}
