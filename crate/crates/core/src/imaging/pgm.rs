//! Portable GrayMap (PGM) reading and writing.
//!
//! Reads binary (`P5`) and ASCII (`P2`) files with `maxval` 255; writes
//! binary `P5`. Sample `k` maps to intensity `k / 255`.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a str> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("unexpected end of PGM data".into()));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .map_err(|_| Error::Format("non-ASCII PGM header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::Format(format!("bad {what} '{tok}' in PGM header")))
    }
}

/// Parses a PGM file held in memory.
pub fn decode(data: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { data, pos: 0 };
    let magic = cur.token()?;
    let binary = match magic {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::Format(format!("unsupported magic '{other}'"))),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!(
            "only 8-bit PGM (maxval 255) is supported, got maxval {maxval}"
        )));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("image too large".into()))?;
    let samples: Vec<u8> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let raster = data
            .get(start..start + count)
            .ok_or_else(|| Error::Format(format!("truncated P5 raster, expected {count} bytes")))?;
        raster.to_vec()
    } else {
        (0..count)
            .map(|_| {
                let v = cur.number("sample")?;
                u8::try_from(v).map_err(|_| Error::Format(format!("sample {v} exceeds 255")))
            })
            .collect::<Result<_>>()?
    };
    GrayImage::from_u8(height, width, &samples)
}

/// Serializes as binary `P5`, quantizing to 8 bits.
pub fn encode(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_u8());
    out
}

/// Writes quantized `P5` data for an arbitrary row-major buffer; values are
/// clamped to `[0, 1]` first.
pub fn encode_raw(height: usize, width: usize, row_major: &[f64]) -> Result<Vec<u8>> {
    if row_major.len() != height * width {
        return Err(Error::dim(format!(
            "{} values for a {height}x{width} image",
            row_major.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(super::quantize(row_major));
    Ok(out)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode(&std::fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode(image))?;
    f.flush()?;
    Ok(())
}
