//! PGM (P2/P5, 8-bit) and 8-bit palettised BMP readers, plus a P5 writer.

use std::fs;
use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

/// Loads an 8-bit grayscale PGM or BMP, dispatching on the file magic.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = fs::read(path)?;
    match bytes.get(..2) {
        Some(b"P2") | Some(b"P5") => decode_pgm(&bytes),
        Some(b"BM") => decode_bmp(&bytes),
        _ => Err(Error::UnsupportedFormat(format!(
            "{}: unrecognised magic",
            path.display()
        ))),
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| Error::CorruptImage(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::CorruptImage(format!("bad {what}")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut r = HeaderReader { bytes, pos: 0 };
    let magic = r.token().unwrap_or_default();
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(Error::UnsupportedFormat("not a P2/P5 PGM".into())),
    };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::CorruptImage(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!("maxval {maxval} is not 8-bit")));
    }
    let scale = 255.0 / maxval as f64;
    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        let start = r.pos + 1;
        let payload = bytes.get(start..).unwrap_or_default();
        if payload.len() < n {
            return Err(Error::CorruptImage(format!(
                "payload has {} bytes, expected {n}",
                payload.len()
            )));
        }
        data.extend(payload[..n].iter().map(|&b| (b as usize).min(maxval) as f64 * scale));
    } else {
        for _ in 0..n {
            let v = r.number("pixel")?;
            if v > maxval {
                return Err(Error::CorruptImage(format!("pixel {v} exceeds maxval {maxval}")));
            }
            data.push(v as f64 * scale);
        }
    }
    GrayImage::new(width, height, data)
}

fn u16_le(b: &[u8], at: usize) -> Result<u16> {
    b.get(at..at + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or_else(|| Error::CorruptImage("truncated BMP header".into()))
}

fn u32_le(b: &[u8], at: usize) -> Result<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or_else(|| Error::CorruptImage("truncated BMP header".into()))
}

/// 8-bit uncompressed BMP; palette entries are mapped to luminance.
pub fn decode_bmp(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.get(..2) != Some(b"BM") {
        return Err(Error::UnsupportedFormat("not a BMP".into()));
    }
    let offset = u32_le(bytes, 10)? as usize;
    let dib = u32_le(bytes, 14)? as usize;
    if dib < 40 {
        return Err(Error::UnsupportedFormat(format!("BMP header size {dib}")));
    }
    let width = u32_le(bytes, 18)? as i32;
    let height = u32_le(bytes, 22)? as i32;
    let bpp = u16_le(bytes, 28)?;
    let compression = u32_le(bytes, 30)?;
    let colors_used = u32_le(bytes, 46)? as usize;
    if bpp != 8 {
        return Err(Error::UnsupportedFormat(format!("{bpp}-bit BMP")));
    }
    if compression != 0 {
        return Err(Error::UnsupportedFormat("compressed BMP".into()));
    }
    if width <= 0 || height == 0 {
        return Err(Error::CorruptImage(format!("bad BMP dimensions {width}x{height}")));
    }
    let top_down = height < 0;
    let (w, h) = (width as usize, height.unsigned_abs() as usize);
    let ncolors = if colors_used == 0 { 256 } else { colors_used.min(256) };
    let pal_start = 14 + dib;
    let palette = bytes
        .get(pal_start..pal_start + 4 * ncolors)
        .ok_or_else(|| Error::CorruptImage("truncated BMP palette".into()))?;
    let lut: Vec<f64> = palette
        .chunks_exact(4)
        .map(|e| {
            let (b, g, r) = (e[0] as f64, e[1] as f64, e[2] as f64);
            if e[0] == e[1] && e[1] == e[2] {
                r
            } else {
                0.299 * r + 0.587 * g + 0.114 * b
            }
        })
        .collect();
    let stride = (w + 3) & !3;
    let raster = bytes
        .get(offset..offset + stride * h)
        .ok_or_else(|| Error::CorruptImage("BMP raster shorter than header implies".into()))?;
    let mut data = vec![0.0; w * h];
    for row in 0..h {
        let y = if top_down { row } else { h - 1 - row };
        let src = &raster[row * stride..row * stride + w];
        for (x, &idx) in src.iter().enumerate() {
            data[y * w + x] = *lut
                .get(idx as usize)
                .ok_or_else(|| Error::CorruptImage(format!("palette index {idx} out of range")))?;
        }
    }
    GrayImage::new(w, h, data)
}

/// P5 encoding; values are rounded and clamped to [0, 255].
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pgm_roundtrip_values() {
        let img = decode_pgm(b"P2\n# tiny\n2 2\n255\n0 85\n170 255\n").unwrap();
        assert_eq!(img.pixels(), &[0.0, 85.0, 170.0, 255.0]);
    }

    #[test]
    fn short_p5_payload_is_corrupt() {
        let err = decode_pgm(b"P5\n4 4\n255\n\x01\x02\x03").unwrap_err();
        assert!(matches!(err, Error::CorruptImage(_)));
    }

    #[test]
    fn sixteen_bit_unsupported() {
        let err = decode_pgm(b"P5\n1 1\n65535\n\x00\x00").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn p5_encode_decode() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 40 + y * 7) as f64);
        assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
    }

    #[test]
    fn missing_file_is_distinct() {
        let err = load_gray("/nonexistent/eye.pgm").unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }
}
