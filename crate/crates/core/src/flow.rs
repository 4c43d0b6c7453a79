//! Optical-flow ingestion and the deterministic flow-saliency
//! transformation that produces the binary motion mask.
//!
//! Saliency pipeline: per-pixel flow magnitude, median subtraction (camera
//! motion compensation), clamp at zero, normalization by the maximum
//! residual, then Otsu binarization over a 256-bin histogram. A mask whose
//! foreground area falls below `min_area_ratio` of the frame is discarded.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Middlebury .flo magic number ("PIEH" as a little-endian float).
const FLO_MAGIC: f32 = 202021.25;

/// Per-pixel 2-vector motion field, row-major (u, v) pairs in pixels/frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    vectors: Vec<(f32, f32)>,
}

impl FlowField {
    pub fn from_vectors(width: usize, height: usize, vectors: Vec<(f32, f32)>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::format("flow dimensions must be >= 1"));
        }
        if vectors.len() != width * height {
            return Err(Error::format(format!(
                "flow vector count {} does not match {}x{}",
                vectors.len(),
                width,
                height
            )));
        }
        if vectors.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
            return Err(Error::format("flow contains non-finite components"));
        }
        Ok(FlowField {
            width,
            height,
            vectors,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f32, f32) {
        self.vectors[y * self.width + x]
    }

    pub fn vectors(&self) -> &[(f32, f32)] {
        &self.vectors
    }
}

/// Binary motion mask with the provenance of its binarization.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionMask {
    pub mask: BinaryMask,
    /// Normalized-residual cutoff actually applied; 0 for empty masks that
    /// never reached binarization.
    pub threshold_used: f64,
    pub frame_index: usize,
}

impl MotionMask {
    fn empty(width: usize, height: usize, frame_index: usize) -> Self {
        MotionMask {
            mask: BinaryMask::new(width, height),
            threshold_used: 0.0,
            frame_index,
        }
    }
}

/// Parses a Middlebury .flo file: float32 magic 202021.25, int32 width,
/// int32 height, then row-major interleaved float32 (u, v).
pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 {
        return Err(Error::format(format!(
            "{}: truncated flo header",
            path.display()
        )));
    }
    let magic = f32::from_le_bytes(bytes[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        return Err(Error::format(format!(
            "{}: bad flo magic {magic}",
            path.display()
        )));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width < 1 || height < 1 {
        return Err(Error::format(format!(
            "{}: bad flo dimensions {width}x{height}",
            path.display()
        )));
    }
    let (width, height) = (width as usize, height as usize);
    let expected = 12 + width * height * 8;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "{}: flo payload has {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected
        )));
    }
    let mut vectors = Vec::with_capacity(width * height);
    for chunk in bytes[12..].chunks_exact(8) {
        let u = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let v = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::format(format!(
                "{}: non-finite flow component",
                path.display()
            )));
        }
        vectors.push((u, v));
    }
    FlowField::from_vectors(width, height, vectors)
}

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    let mut out = Vec::with_capacity(12 + flow.vectors.len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for &(u, v) in &flow.vectors {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Otsu's threshold over a 256-bin histogram: the split maximizing
/// between-class variance, ties broken by the smallest qualifying bin.
/// Returns the last background bin; bins above it are foreground.
fn otsu_threshold(histogram: &[u64; 256]) -> usize {
    let total: u64 = histogram.iter().sum();
    let total_sum: f64 = histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let mut best_t = 0usize;
    let mut best_variance = f64::NEG_INFINITY;
    let mut below_count = 0u64;
    let mut below_sum = 0.0f64;

    for (t, &count) in histogram.iter().enumerate() {
        below_count += count;
        below_sum += t as f64 * count as f64;
        let above_count = total - below_count;
        if below_count == 0 || above_count == 0 {
            continue;
        }
        let mean_below = below_sum / below_count as f64;
        let mean_above = (total_sum - below_sum) / above_count as f64;
        let diff = mean_below - mean_above;
        let variance = below_count as f64 * above_count as f64 * diff * diff;
        if variance > best_variance {
            best_variance = variance;
            best_t = t;
        }
    }
    best_t
}

/// Derives the binary motion mask from a flow field.
///
/// An all-zero residual (uniform flow, e.g. a pure camera pan) or a
/// foreground area below `min_area_ratio` of the frame yields an empty mask.
pub fn flow_saliency(flow: &FlowField, min_area_ratio: f64, frame_index: usize) -> MotionMask {
    assert!(
        (0.0..1.0).contains(&min_area_ratio),
        "min_area_ratio must be in [0, 1)"
    );
    let (w, h) = flow.dims();
    let magnitudes: Vec<f64> = flow
        .vectors
        .iter()
        .map(|&(u, v)| (u as f64).hypot(v as f64))
        .collect();

    let mut sorted = magnitudes.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Lower median: an object covering exactly half the frame still survives
    // the subtraction.
    let median = sorted[(sorted.len() - 1) / 2];

    let residuals: Vec<f64> = magnitudes.iter().map(|&m| (m - median).max(0.0)).collect();
    let max_residual = residuals.iter().cloned().fold(0.0f64, f64::max);
    if max_residual == 0.0 {
        return MotionMask::empty(w, h, frame_index);
    }

    let mut histogram = [0u64; 256];
    let bins: Vec<usize> = residuals
        .iter()
        .map(|&r| (((r / max_residual) * 256.0) as usize).min(255))
        .collect();
    for &b in &bins {
        histogram[b] += 1;
    }

    let t = otsu_threshold(&histogram);
    let bits: Vec<bool> = bins.iter().map(|&b| b > t).collect();
    let mask = BinaryMask::from_bits(w, h, bits).expect("bins align with flow dims");

    if (mask.area() as f64) < min_area_ratio * (w * h) as f64 {
        return MotionMask::empty(w, h, frame_index);
    }
    MotionMask {
        mask,
        threshold_used: (t + 1) as f64 / 256.0,
        frame_index,
    }
}
