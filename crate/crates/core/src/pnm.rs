//! Binary PGM (P5) and PPM (P6) readers/writers, maxval 255.
//!
//! Masks use pixel 0 = background and 255 = foreground; any other value is
//! a format error. Gray frames accept the full 8-bit range, and PPM input
//! is converted to luminance on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

pub struct RawImage {
    pub width: usize,
    pub height: usize,
    /// 1 (grayscale) or 3 (rgb) bytes per pixel, row-major.
    pub channels: usize,
    pub data: Vec<u8>,
}

fn parse_header_token(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<usize> {
    // Skip whitespace and '#' comments.
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format(format!(
            "{}: malformed pnm header",
            path.display()
        )));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(format!("{}: malformed pnm header", path.display())))
}

pub fn read_raw(path: &Path) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 2 {
        return Err(Error::format(format!("{}: truncated pnm", path.display())));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => {
            return Err(Error::format(format!(
                "{}: not a binary PGM/PPM (bad magic)",
                path.display()
            )))
        }
    };
    let mut pos = 2;
    let width = parse_header_token(&bytes, &mut pos, path)?;
    let height = parse_header_token(&bytes, &mut pos, path)?;
    let maxval = parse_header_token(&bytes, &mut pos, path)?;
    if width == 0 || height == 0 {
        return Err(Error::format(format!(
            "{}: zero pnm dimension",
            path.display()
        )));
    }
    if maxval != 255 {
        return Err(Error::format(format!(
            "{}: maxval {} unsupported (expected 255)",
            path.display(),
            maxval
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(format!(
            "{}: malformed pnm header",
            path.display()
        )));
    }
    pos += 1;
    let expected = width * height * channels;
    let data = &bytes[pos..];
    if data.len() != expected {
        return Err(Error::format(format!(
            "{}: raster has {} bytes, expected {}",
            path.display(),
            data.len(),
            expected
        )));
    }
    Ok(RawImage {
        width,
        height,
        channels,
        data: data.to_vec(),
    })
}

pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<()> {
    assert_eq!(data.len(), width * height);
    let mut out = Vec::with_capacity(data.len() + 32);
    write!(out, "P5\n{width} {height}\n255\n").expect("vec write");
    out.extend_from_slice(data);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = Vec::with_capacity(rgb.len() + 32);
    write!(out, "P6\n{width} {height}\n255\n").expect("vec write");
    out.extend_from_slice(rgb);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a binary mask from a P5 file; pixels must be exactly 0 or 255.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let img = read_raw(path)?;
    if img.channels != 1 {
        return Err(Error::format(format!(
            "{}: masks must be single-channel PGM",
            path.display()
        )));
    }
    let mut bits = Vec::with_capacity(img.data.len());
    for &b in &img.data {
        match b {
            0 => bits.push(false),
            255 => bits.push(true),
            other => {
                return Err(Error::format(format!(
                    "{}: mask pixel value {} (expected 0 or 255)",
                    path.display(),
                    other
                )))
            }
        }
    }
    BinaryMask::from_bits(img.width, img.height, bits)
}

pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let data: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_pgm(path, mask.width(), mask.height(), &data)
}
