//! Region similarity J (intersection-over-union) and contour similarity F
//! (boundary F-measure under a pixel tolerance), per frame and as
//! sequence means.

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::mask::{dilate, iou, BinaryMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameScore {
    pub index: usize,
    pub j: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub sequence: String,
    pub j_mean: f64,
    pub f_mean: f64,
    pub frames: Vec<FrameScore>,
}

/// Region similarity: |P ∩ G| / |P ∪ G|. Two empty masks agree vacuously.
pub fn jaccard(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_dims(pred.dims(), gt.dims())?;
    if pred.is_empty() && gt.is_empty() {
        return Ok(1.0);
    }
    iou(pred, gt)
}

/// Foreground pixels with at least one 4-neighbor (or frame edge) that is
/// background.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    BinaryMask::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        x == 0
            || y == 0
            || x == w - 1
            || y == h - 1
            || !mask.get(x - 1, y)
            || !mask.get(x + 1, y)
            || !mask.get(x, y - 1)
            || !mask.get(x, y + 1)
    })
}

/// Default contour-match tolerance for a frame: 0.8% of the diagonal,
/// at least one pixel.
pub fn default_boundary_tolerance(width: usize, height: usize) -> u32 {
    let diagonal = ((width * width + height * height) as f64).sqrt();
    ((0.008 * diagonal).round() as u32).max(1)
}

/// Boundary F-measure: precision and recall of contour points under a
/// dilation of radius `tolerance`, combined as 2PR / (P + R).
///
/// Both boundaries empty scores 1; P + R = 0 scores 0.
pub fn f_measure(pred: &BinaryMask, gt: &BinaryMask, tolerance: u32) -> Result<f64> {
    check_dims(pred.dims(), gt.dims())?;
    let bp = boundary(pred);
    let bg = boundary(gt);
    match (bp.is_empty(), bg.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let bg_reach = dilate(&bg, tolerance);
    let bp_reach = dilate(&bp, tolerance);
    let precision = bp.intersect(&bg_reach)?.area() as f64 / bp.area() as f64;
    let recall = bg.intersect(&bp_reach)?.area() as f64 / bg.area() as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Scores aligned prediction/ground-truth lists.
///
/// With `exclude_endpoints` (the benchmark convention) the means skip the
/// first and last frame, which requires at least three frames; every frame
/// still receives a score. `indices` names the frames in the report.
pub fn sequence_report(
    sequence: &str,
    preds: &[BinaryMask],
    gts: &[BinaryMask],
    indices: &[usize],
    tolerance: u32,
    exclude_endpoints: bool,
) -> Result<SequenceReport> {
    if preds.len() != gts.len() || preds.len() != indices.len() {
        return Err(Error::format(format!(
            "prediction/ground-truth length mismatch: {} vs {}",
            preds.len(),
            gts.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput("sequence_report frames"));
    }
    if exclude_endpoints && preds.len() < 3 {
        return Err(Error::format(
            "endpoint exclusion requires at least 3 evaluated frames",
        ));
    }
    let mut frames = Vec::with_capacity(preds.len());
    for ((pred, gt), &index) in preds.iter().zip(gts).zip(indices) {
        frames.push(FrameScore {
            index,
            j: jaccard(pred, gt)?,
            f: f_measure(pred, gt, tolerance)?,
        });
    }
    let evaluated: &[FrameScore] = if exclude_endpoints {
        &frames[1..frames.len() - 1]
    } else {
        &frames
    };
    let n = evaluated.len() as f64;
    let j_mean = evaluated.iter().map(|s| s.j).sum::<f64>() / n;
    let f_mean = evaluated.iter().map(|s| s.f).sum::<f64>() / n;
    Ok(SequenceReport {
        sequence: sequence.to_string(),
        j_mean,
        f_mean,
        frames,
    })
}
