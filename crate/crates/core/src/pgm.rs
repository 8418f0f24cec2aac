//! 8-bit greyscale PGM (P5) export and import.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Encodes unit-range values as binary PGM, quantized with round(255·p).
pub fn encode_pgm(width: usize, height: usize, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            actual: values.len(),
        });
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&p| quantize(p)));
    Ok(out)
}

#[inline]
pub fn quantize(p: f64) -> u8 {
    (255.0 * p.clamp(0.0, 1.0)).round() as u8
}

pub fn write_pgm(path: &Path, width: usize, height: usize, values: &[f64]) -> Result<()> {
    let bytes = encode_pgm(width, height, values)?;
    fs::write(path, bytes).map_err(|e| Error::file(path, e))
}

/// A decoded greyscale image with values rescaled to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

/// Parses binary (P5) or ASCII (P2) PGM with a maximum value of at most 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Pgm("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let mut number = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| Error::Pgm(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    let n = width * height;
    let scale = maxval as f64;
    let pixels: Vec<f64> = match magic.as_str() {
        "P5" => {
            // Exactly one whitespace byte separates the header from the raster.
            let start = pos + 1;
            let raster = bytes.get(start..start + n).ok_or_else(|| {
                Error::Pgm(format!(
                    "raster holds {} of {n} bytes",
                    bytes.len().saturating_sub(start)
                ))
            })?;
            raster.iter().map(|&b| f64::from(b) / scale).collect()
        }
        "P2" => (0..n)
            .map(|_| number("pixel").map(|v| v as f64 / scale))
            .collect::<Result<_>>()?,
        other => return Err(Error::Pgm(format!("unsupported magic {other:?}"))),
    };
    if pixels.iter().any(|&p| p > 1.0) {
        return Err(Error::Pgm("pixel exceeds maxval".into()));
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
    decode_pgm(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_layout() {
        let bytes = encode_pgm(2, 1, &[0.0, 1.0]).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff");
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(-3.0), 0);
        assert!(encode_pgm(2, 2, &[0.0]).is_err());
    }

    #[test]
    fn decode_round_trip_and_ascii() {
        let vals = [0.0, 51.0 / 255.0, 1.0, 0.2];
        let img = decode_pgm(&encode_pgm(2, 2, &vals).unwrap()).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        assert_eq!(img.pixels, vals);

        let img = decode_pgm(b"P2\n# comment\n3 1\n10\n0 5 10\n").unwrap();
        assert_eq!(img.pixels, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn decode_errors() {
        assert!(decode_pgm(b"P6\n1 1\n255\n\x00\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }
}
