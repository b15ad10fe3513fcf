//! Seeded corruption models: tile occlusion and salt-and-pepper noise.
//!
//! All randomness comes from ChaCha8 ([`NoiseRng`]) seeded with
//! `seed_from_u64`, and is turned into samples by the helpers below, whose
//! algorithms are fixed so the streams can be reproduced elsewhere:
//!
//! * [`uniform_open01`]: top 52 bits `k` of a `u64`, mapped to `(k + 0.5) / 2^52`,
//!   which never yields 0 or 1;
//! * [`below`]: Lemire's widening-multiply method with rejection (unbiased);
//! * [`sample_without_replacement`]: partial Fisher-Yates over `0..n`,
//!   drawing positions `i = 0..k` as `i + below(n - i)`;
//! * fair coin: the top bit of a `u64`.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

pub type NoiseRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> NoiseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample in the open interval `(0, 1)`.
pub fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}

/// Uniform integer in `0..n` (`n > 0`).
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "empty range");
    let mut m = rng.next_u64() as u128 * n as u128;
    if (m as u64) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * n as u128;
        }
    }
    (m >> 64) as u64
}

/// `k` distinct indices from `0..n`, in draw order.
pub fn sample_without_replacement(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot draw {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    /// Replace whole tiles by uniform noise patches.
    TileOcclusion,
    /// Force a fraction of pixels to 0 or 1.
    SaltPepper,
}

impl NoiseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseModel::TileOcclusion => "occlusion",
            NoiseModel::SaltPepper => "saltpepper",
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occlusion" => Ok(NoiseModel::TileOcclusion),
            "saltpepper" | "salt-pepper" | "sp" => Ok(NoiseModel::SaltPepper),
            _ => Err(Error::invalid(format!(
                "unknown noise model '{s}' (expected occlusion or saltpepper)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    /// Tiles in the grid; must equal `(H / tile_size) * (W / tile_size)`.
    pub tiles_total: usize,
    pub tiles_corrupted: usize,
    pub tile_size: usize,
    /// Fraction of pixels hit by salt-and-pepper noise.
    pub density: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            model: NoiseModel::TileOcclusion,
            tiles_total: 16,
            tiles_corrupted: 3,
            tile_size: 32,
            density: 0.1,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn occlusion() -> Self {
        Self::default()
    }

    pub fn salt_pepper(density: f64) -> Self {
        Self {
            model: NoiseModel::SaltPepper,
            density,
            ..Self::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn rng(&self) -> NoiseRng {
        rng_from_seed(self.seed)
    }

    /// Applies the configured model.
    pub fn apply(&self, image: &GrayImage, rng: &mut impl RngCore) -> Result<GrayImage> {
        match self.model {
            NoiseModel::TileOcclusion => occlude_tiles(image, self, rng),
            NoiseModel::SaltPepper => salt_pepper(image, self, rng),
        }
    }

    /// Checks the tile grid against an image size.
    pub fn validate_for(&self, height: usize, width: usize) -> Result<()> {
        match self.model {
            NoiseModel::TileOcclusion => {
                let ts = self.tile_size;
                if ts == 0 || !height.is_multiple_of(ts) || !width.is_multiple_of(ts) {
                    return Err(Error::precondition(format!(
                        "a {height}x{width} image is not divisible into {ts}x{ts} tiles"
                    )));
                }
                let grid = (height / ts) * (width / ts);
                if grid != self.tiles_total {
                    return Err(Error::precondition(format!(
                        "{ts}x{ts} tiles give a grid of {grid} tiles, expected {}",
                        self.tiles_total
                    )));
                }
                if self.tiles_corrupted > self.tiles_total {
                    return Err(Error::precondition(format!(
                        "cannot corrupt {} of {} tiles",
                        self.tiles_corrupted, self.tiles_total
                    )));
                }
                Ok(())
            }
            NoiseModel::SaltPepper => {
                if !(0.0..=1.0).contains(&self.density) {
                    return Err(Error::precondition(format!(
                        "density {} outside [0, 1]",
                        self.density
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Replaces `tiles_corrupted` distinct tiles (row-major tile numbering) by
/// independent uniform `(0, 1)` pixels, filled row by row.
pub fn occlude_tiles(image: &GrayImage, spec: &NoiseSpec, rng: &mut impl RngCore) -> Result<GrayImage> {
    let spec = NoiseSpec {
        model: NoiseModel::TileOcclusion,
        ..*spec
    };
    spec.validate_for(image.height(), image.width())?;
    let ts = spec.tile_size;
    let tiles_per_row = image.width() / ts;
    let mut out = image.clone();
    for tile in sample_without_replacement(rng, spec.tiles_total, spec.tiles_corrupted) {
        let (tr, tc) = (tile / tiles_per_row, tile % tiles_per_row);
        for r in tr * ts..(tr + 1) * ts {
            for c in tc * ts..(tc + 1) * ts {
                out.set(r, c, uniform_open01(rng));
            }
        }
    }
    Ok(out)
}

/// Number of pixels salt-and-pepper noise touches.
pub fn salt_pepper_count(density: f64, pixels: usize) -> usize {
    (density * pixels as f64).round() as usize
}

/// Sets exactly `round(density * H * W)` distinct pixels to 0 or 1 with a
/// fair coin each.
pub fn salt_pepper(image: &GrayImage, spec: &NoiseSpec, rng: &mut impl RngCore) -> Result<GrayImage> {
    let spec = NoiseSpec {
        model: NoiseModel::SaltPepper,
        ..*spec
    };
    spec.validate_for(image.height(), image.width())?;
    let count = salt_pepper_count(spec.density, image.len());
    let mut out = image.clone();
    for idx in sample_without_replacement(rng, image.len(), count) {
        let value = if rng.next_u64() >> 63 == 1 { 1.0 } else { 0.0 };
        out.set(idx / image.width(), idx % image.width(), value);
    }
    Ok(out)
}
