//! Block matching of detection boxes into preceding frames and the
//! consistent-object test that gates hard-negative selection.

use std::path::Path;

use crate::error::{check_dims, Error, Result};
use crate::mask::BBox;
use crate::pnm;
use crate::proposals::FrameProposals;

/// 8-bit luminance frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    intensity: Vec<u8>,
}

impl GrayFrame {
    pub fn from_intensity(width: usize, height: usize, intensity: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::format("frame dimensions must be >= 1"));
        }
        if intensity.len() != width * height {
            return Err(Error::format(format!(
                "intensity length {} does not match {}x{}",
                intensity.len(),
                width,
                height
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            intensity,
        })
    }

    /// Loads a P5 frame directly, or a P6 frame converted to luminance via
    /// Y = round(0.299 R + 0.587 G + 0.114 B).
    pub fn read_pnm(path: &Path) -> Result<Self> {
        let img = pnm::read_raw(path)?;
        let intensity = match img.channels {
            1 => img.data,
            3 => img
                .data
                .chunks_exact(3)
                .map(|px| {
                    let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
                    y.round().min(255.0) as u8
                })
                .collect(),
            _ => unreachable!("read_raw only yields 1 or 3 channels"),
        };
        GrayFrame::from_intensity(img.width, img.height, intensity)
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        pnm::write_pgm(path, self.width, self.height, &self.intensity)
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
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.intensity[y * self.width + x]
    }

    pub fn intensity(&self) -> &[u8] {
        &self.intensity
    }
}

/// Best placement found by [`block_match`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched_box: BBox,
    /// Displacement of the matched box relative to the query box.
    pub displacement: (i64, i64),
    /// Mean absolute intensity difference at the best placement.
    pub cost: f64,
}

/// Outcome of the consistent-object test across the previous k frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyVerdict {
    pub consistent: bool,
    /// Best proposal-box IoU per previous frame, most recent first.
    pub per_frame_iou: Vec<f64>,
}

/// Grows a box by 20*k_back pixels on all four sides, clamped to the frame.
pub fn enlarge_box(b: &BBox, k_back: usize, frame_width: usize, frame_height: usize) -> BBox {
    assert!(k_back >= 1, "k_back must be >= 1");
    let grow = 20 * k_back;
    let x0 = b.x.saturating_sub(grow);
    let y0 = b.y.saturating_sub(grow);
    let x1 = (b.right() + grow).min(frame_width);
    let y1 = (b.bottom() + grow).min(frame_height);
    BBox::new(x0, y0, x1 - x0, y1 - y0)
}

/// Exhaustive integer-displacement search of a query-box-sized block over
/// every placement inside `search_window` on the target frame.
///
/// Cost is the mean absolute intensity difference. Ties resolve to the
/// smaller squared displacement, then to row-major scan order, so the
/// result is a deterministic function of its inputs.
pub fn block_match(
    query_box: &BBox,
    query_frame: &GrayFrame,
    target_frame: &GrayFrame,
    search_window: &BBox,
) -> Result<MatchResult> {
    if !query_box.fits_in(query_frame.width(), query_frame.height()) {
        return Err(Error::format("query box outside query frame"));
    }
    if !search_window.fits_in(target_frame.width(), target_frame.height()) {
        return Err(Error::format("search window outside target frame"));
    }
    if search_window.w < query_box.w || search_window.h < query_box.h {
        return Err(Error::WindowTooSmall {
            window_w: search_window.w,
            window_h: search_window.h,
            block_w: query_box.w,
            block_h: query_box.h,
        });
    }

    let area = query_box.area() as u64;
    let mut best_sad = u64::MAX;
    let mut best_pos = (search_window.x, search_window.y);
    let mut best_disp_sq = i64::MAX;

    for by in search_window.y..=search_window.bottom() - query_box.h {
        for bx in search_window.x..=search_window.right() - query_box.w {
            // Early exit once this placement is provably worse than the best.
            let mut sad = 0u64;
            'scan: for row in 0..query_box.h {
                for col in 0..query_box.w {
                    let q = query_frame.get(query_box.x + col, query_box.y + row) as i64;
                    let t = target_frame.get(bx + col, by + row) as i64;
                    sad += (q - t).unsigned_abs();
                    if sad > best_sad {
                        break 'scan;
                    }
                }
            }
            if sad > best_sad {
                continue;
            }
            let dx = bx as i64 - query_box.x as i64;
            let dy = by as i64 - query_box.y as i64;
            let disp_sq = dx * dx + dy * dy;
            // Strict improvement, or an equal-cost placement that wins the
            // tie-break (smaller displacement; scan order settles the rest
            // because earlier placements are kept on full ties).
            if sad < best_sad || (sad == best_sad && disp_sq < best_disp_sq) {
                best_sad = sad;
                best_pos = (bx, by);
                best_disp_sq = disp_sq;
            }
        }
    }

    let matched_box = BBox::new(best_pos.0, best_pos.1, query_box.w, query_box.h);
    Ok(MatchResult {
        matched_box,
        displacement: (
            best_pos.0 as i64 - query_box.x as i64,
            best_pos.1 as i64 - query_box.y as i64,
        ),
        cost: best_sad as f64 / area as f64,
    })
}

/// Tracks a detection box into the previous `k` frames and scores how well
/// each matched placement lines up with that frame's proposals.
///
/// `history` holds the previous frames most recent first; entry `j` is
/// frame `t-1-j`. A frame with no proposals contributes IoU 0 (an object
/// never seen there is not consistent). Consistent iff the minimum IoU over
/// the k frames is at least `consistency_min`.
pub fn check_consistency(
    detection_box: &BBox,
    history: &[(&GrayFrame, &FrameProposals)],
    current: &GrayFrame,
    k: usize,
    consistency_min: f64,
) -> Result<ConsistencyVerdict> {
    if history.is_empty() {
        return Err(Error::EmptyInput("consistency check history"));
    }
    assert!(k >= 1 && k <= history.len(), "k must be in 1..=history.len()");
    assert!(
        consistency_min > 0.0 && consistency_min <= 1.0,
        "consistency_min must be in (0, 1]"
    );

    let mut per_frame_iou = Vec::with_capacity(k);
    for (j, (frame, proposals)) in history.iter().take(k).enumerate() {
        check_dims(current.dims(), frame.dims())?;
        let window = enlarge_box(detection_box, j + 1, frame.width(), frame.height());
        let matched = block_match(detection_box, current, frame, &window)?;
        let best = proposals
            .proposals
            .iter()
            .map(|p| matched.matched_box.iou(&p.bbox))
            .fold(0.0f64, f64::max);
        per_frame_iou.push(best);
    }
    let min = per_frame_iou.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ConsistencyVerdict {
        consistent: min >= consistency_min,
        per_frame_iou,
    })
}
