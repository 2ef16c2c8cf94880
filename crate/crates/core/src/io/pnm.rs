//! Binary portable graymap / pixmap (P5 / P6) plus tissue and ground-truth
//! masks stored as P5 with a `<name>.mask.json` sidecar.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::meta::{read_json, sidecar_path, write_json};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} image needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &v in &self.data {
            h[v as usize] += 1;
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn put(&mut self, y: usize, x: usize, rgb: [u8; 3]) {
        let o = 3 * (y * self.width + x);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }
}

fn header(magic: &str, width: usize, height: usize) -> Vec<u8> {
    format!("{magic}\n{width} {height}\n255\n").into_bytes()
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = header("P5", img.width, img.height);
    out.extend_from_slice(&img.data);
    out
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = header("P6", img.width, img.height);
    out.extend_from_slice(&img.data);
    out
}

/// Splits a binary PNM into (magic, width, height, maxval, payload).
fn parse_pnm<'a>(bytes: &'a [u8], path: &Path) -> Result<(&'a [u8], usize, usize, usize, &'a [u8])> {
    let bad = |message: &str| Error::Image {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    let mut pos = 0;
    let mut tokens: Vec<&[u8]> = Vec::with_capacity(4);
    while tokens.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        tokens.push(&bytes[start..pos]);
    }
    // exactly one whitespace byte separates maxval from the raster
    if pos < bytes.len() {
        pos += 1;
    }
    let num = |t: &[u8]| -> Result<usize> {
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("non-numeric header field"))
    };
    let (w, h, maxval) = (num(tokens[1])?, num(tokens[2])?, num(tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit images are supported"));
    }
    Ok((tokens[0], w, h, maxval, &bytes[pos.min(bytes.len())..]))
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let (magic, w, h, _, payload) = parse_pnm(bytes, path)?;
    if magic != b"P5" {
        return Err(Error::Image {
            path: path.to_path_buf(),
            message: "expected binary graymap (P5)".into(),
        });
    }
    if payload.len() < w * h {
        return Err(Error::Image {
            path: path.to_path_buf(),
            message: format!("raster truncated: need {} bytes, found {}", w * h, payload.len()),
        });
    }
    GrayImage::new(w, h, payload[..w * h].to_vec())
}

pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<RgbImage> {
    let (magic, w, h, _, payload) = parse_pnm(bytes, path)?;
    if magic != b"P6" || payload.len() < 3 * w * h {
        return Err(Error::Image {
            path: path.to_path_buf(),
            message: "expected complete binary pixmap (P6)".into(),
        });
    }
    Ok(RgbImage {
        width: w,
        height: h,
        data: payload[..3 * w * h].to_vec(),
    })
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

/// Boolean raster with its level-0 scale (level-0 pixels per mask cell).
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    pub height: usize,
    pub width: usize,
    pub bits: Vec<bool>,
    pub scale_to_level0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskSidecar {
    scale_to_level0: f64,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>, scale_to_level0: f64) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::Shape(format!(
                "{height}x{width} mask needs {} bits, got {}",
                height * width,
                bits.len()
            )));
        }
        if !(scale_to_level0 > 0.0 && scale_to_level0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mask scale_to_level0 must be positive, got {scale_to_level0}"
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
            scale_to_level0,
        })
    }

    pub fn filled(height: usize, width: usize, value: bool, scale_to_level0: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width], scale_to_level0)
    }

    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Mask cells touched by the level-0 rectangle, rounded outward and
    /// clipped to the mask: `(y0, x0, y1, x1)` half-open.
    pub fn cell_span(&self, x_px: u64, y_px: u64, w_px: u64, h_px: u64) -> (usize, usize, usize, usize) {
        let s = self.scale_to_level0;
        let lo = |v: u64, n: usize| ((v as f64 / s).floor() as usize).min(n);
        let hi = |v: u64, n: usize| ((v as f64 / s).ceil() as usize).min(n);
        (
            lo(y_px, self.height),
            lo(x_px, self.width),
            hi(y_px + h_px, self.height),
            hi(x_px + w_px, self.width),
        )
    }

    /// Fraction of set cells under a level-0 rectangle (outward rounding).
    pub fn fraction_in(&self, x_px: u64, y_px: u64, w_px: u64, h_px: u64) -> f64 {
        let (y0, x0, y1, x1) = self.cell_span(x_px, y_px, w_px, h_px);
        let total = (y1 - y0) * (x1 - x0);
        if total == 0 {
            return 0.0;
        }
        let set = (y0..y1)
            .flat_map(|y| (x0..x1).map(move |x| (y, x)))
            .filter(|&(y, x)| self.get(y, x))
            .count();
        set as f64 / total as f64
    }

    /// Whether the mask cell covering a level-0 point is set; points off the
    /// mask read as unset.
    pub fn at_level0(&self, x_px: f64, y_px: f64) -> bool {
        let (x, y) = (x_px / self.scale_to_level0, y_px / self.scale_to_level0);
        if x < 0.0 || y < 0.0 {
            return false;
        }
        let (x, y) = (x as usize, y as usize);
        x < self.width && y < self.height && self.get(y, x)
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    /// Any non-zero pixel is set.
    pub fn from_gray(img: &GrayImage, scale_to_level0: f64) -> Result<Self> {
        Self::new(
            img.height,
            img.width,
            img.data.iter().map(|&v| v != 0).collect(),
            scale_to_level0,
        )
    }
}

pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_pgm(&mask.to_gray(), path)?;
    write_json(
        &MaskSidecar {
            scale_to_level0: mask.scale_to_level0,
        },
        sidecar_path(path, ".mask.json"),
    )
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let img = read_pgm(path)?;
    let sidecar: MaskSidecar = read_json(sidecar_path(path, ".mask.json"))?;
    BinaryMask::from_gray(&img, sidecar.scale_to_level0)
}
