//! Reconstruction quality metrics.

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::scalar::Scalar;

/// PSNR written to CSV when the images are identical (infinite PSNR).
pub const PSNR_CAP_DB: f64 = 300.0;

/// Mean squared difference.
pub fn mse<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::dim(format!(
            "cannot compare signals of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.widen() - y.widen();
            d * d
        })
        .sum();
    Ok(s / a.len() as f64)
}

/// `10 log10(peak² / mse)`; `+inf` when `mse == 0`.
pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

pub fn image_mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.height(), a.width()) != (b.height(), b.width()) {
        return Err(Error::dim(format!(
            "images are {}x{} and {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    mse(a.pixels(), b.pixels())
}

/// PSNR in dB between two images.
pub fn psnr(a: &GrayImage, b: &GrayImage, peak: f64) -> Result<f64> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::invalid(format!("peak value must be positive, got {peak}")));
    }
    Ok(psnr_from_mse(image_mse(a, b)?, peak))
}

/// Replaces `+inf` by [`PSNR_CAP_DB`].
pub fn capped(psnr: f64) -> f64 {
    psnr.min(PSNR_CAP_DB)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = GrayImage::filled(4, 4, 0.3).unwrap();
        assert_eq!(image_mse(&a, &a).unwrap(), 0.0);
        assert!(psnr(&a, &a, 1.0).unwrap().is_infinite());
        assert_eq!(capped(psnr(&a, &a, 1.0).unwrap()), PSNR_CAP_DB);

        let b = GrayImage::filled(4, 4, 0.4).unwrap();
        assert!((image_mse(&a, &b).unwrap() - 0.01).abs() < 1e-15);
        assert!((psnr(&a, &b, 1.0).unwrap() - 20.0).abs() < 1e-12);

        let zero = GrayImage::filled(2, 3, 0.0).unwrap();
        let one = GrayImage::filled(2, 3, 1.0).unwrap();
        assert_eq!(image_mse(&zero, &one).unwrap(), 1.0);
        assert_eq!(psnr(&zero, &one, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = GrayImage::filled(2, 2, 0.0).unwrap();
        let b = GrayImage::filled(2, 3, 0.0).unwrap();
        assert!(psnr(&a, &b, 1.0).is_err());
        assert!(psnr(&a, &a, 0.0).is_err());
        assert!(mse::<f64>(&[], &[]).is_err());
    }
}
