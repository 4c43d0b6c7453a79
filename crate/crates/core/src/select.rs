//! Per-frame training-example selection: hard negatives from consistent
//! low-motion proposals, easy negatives from the distance transform,
//! motion-gated positives, and their assembly into a label map.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distance::distance_transform;
use crate::error::{check_dims, Error, Result};
use crate::flow::MotionMask;
use crate::mask::{erode, overlap_ratio, union_all, BinaryMask};
use crate::pnm;
use crate::proposals::FrameProposals;
use crate::tracklet::ConsistencyVerdict;

/// Per-pixel training label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Unlabeled,
    Positive,
    Negative,
    HardNegative,
}

impl Label {
    /// PGM code for persisted label maps.
    pub fn code(self) -> u8 {
        match self {
            Label::Unlabeled => 0,
            Label::Negative => 64,
            Label::HardNegative => 128,
            Label::Positive => 255,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Label::Unlabeled),
            64 => Some(Label::Negative),
            128 => Some(Label::HardNegative),
            255 => Some(Label::Positive),
            _ => None,
        }
    }
}

/// Whether a frame trains with the full selection or falls back to
/// first-frame-only finetuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameMode {
    Adapt,
    OneShot,
}

/// Per-pixel training labels for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<Label>,
    pub mode: FrameMode,
}

impl LabelMap {
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
    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Foreground mask of one label class.
    pub fn class_mask(&self, label: Label) -> BinaryMask {
        BinaryMask::from_bits(
            self.width,
            self.height,
            self.labels.iter().map(|&l| l == label).collect(),
        )
        .expect("label raster matches dims")
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let data: Vec<u8> = self.labels.iter().map(|l| l.code()).collect();
        pnm::write_pgm(path, self.width, self.height, &data)
    }

    pub fn read_pgm(path: &Path, mode: FrameMode) -> Result<Self> {
        let img = pnm::read_raw(path)?;
        if img.channels != 1 {
            return Err(Error::format(format!(
                "{}: label maps must be single-channel PGM",
                path.display()
            )));
        }
        let labels = img
            .data
            .iter()
            .map(|&b| {
                Label::from_code(b).ok_or_else(|| {
                    Error::format(format!(
                        "{}: invalid label code {b} (expected 0/64/128/255)",
                        path.display()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabelMap {
            width: img.width,
            height: img.height,
            labels,
            mode,
        })
    }
}

/// Thresholds and sizes driving the per-frame selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    /// Motion-overlap ceiling for hard negatives (strict `<`).
    pub t1: f64,
    /// Tracklet-IoU floor for the consistency test.
    pub t2: f64,
    /// How many previous frames the consistency test inspects.
    pub k: usize,
    /// Confidence floor for hard-negative candidates.
    pub score_min: f64,
    /// Erosion radius applied to the previous prediction, in pixels.
    pub erosion_radius: u32,
    /// Easy negatives lie strictly farther than this from any positive.
    pub neg_distance: f64,
    /// Motion-overlap floor for pseudo-ground-truth selection (strict `>`).
    pub pgt_threshold: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            t1: 0.2,
            t2: 0.7,
            k: 3,
            score_min: 0.8,
            erosion_radius: 5,
            // Resolved per sequence as round(0.15 * frame diagonal) when
            // left unset; see the pipeline config.
            neg_distance: 0.0,
            pgt_threshold: 0.5,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t1", self.t1),
            ("t2", self.t2),
            ("score_min", self.score_min),
            ("pgt_threshold", self.pgt_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::format(format!("{name} = {v} out of [0, 1]")));
            }
        }
        if self.k < 1 {
            return Err(Error::format("k must be >= 1"));
        }
        if self.neg_distance <= 0.0 {
            return Err(Error::format("neg_distance must be > 0"));
        }
        Ok(())
    }
}

/// Ordinals (into `fp.proposals`) of hard negatives: proposals judged
/// consistent by their verdict whose motion-overlap ratio is strictly
/// below `t1`.
pub fn hard_negative_indices(
    fp: &FrameProposals,
    motion: &MotionMask,
    verdicts: &[ConsistencyVerdict],
    cfg: &SelectionConfig,
) -> Result<Vec<usize>> {
    if verdicts.len() != fp.proposals.len() {
        return Err(Error::format(format!(
            "verdicts length {} does not match {} proposals",
            verdicts.len(),
            fp.proposals.len()
        )));
    }
    let mut indices = Vec::new();
    for (i, (p, v)) in fp.proposals.iter().zip(verdicts).enumerate() {
        if !v.consistent {
            continue;
        }
        let ratio = overlap_ratio(&p.mask, &motion.mask)?;
        if ratio < cfg.t1 {
            indices.push(i);
        }
    }
    Ok(indices)
}

/// Union mask of the hard-negative proposals; empty when none qualify.
pub fn select_hard_negatives(
    fp: &FrameProposals,
    motion: &MotionMask,
    verdicts: &[ConsistencyVerdict],
    cfg: &SelectionConfig,
) -> Result<BinaryMask> {
    let indices = hard_negative_indices(fp, motion, verdicts, cfg)?;
    let masks: Vec<BinaryMask> = indices
        .iter()
        .map(|&i| fp.proposals[i].mask.clone())
        .collect();
    if masks.is_empty() {
        Ok(BinaryMask::new(motion.mask.width(), motion.mask.height()))
    } else {
        union_all(&masks)
    }
}

/// Pixels strictly farther than `distance` from every positive pixel.
/// An empty positive mask anchors nothing, so it yields no negatives.
pub fn select_negatives(pos: &BinaryMask, distance: f64) -> BinaryMask {
    assert!(distance > 0.0, "negative distance must be > 0");
    if pos.is_empty() {
        return BinaryMask::new(pos.width(), pos.height());
    }
    let dt = distance_transform(pos);
    BinaryMask::from_fn(pos.width(), pos.height(), |x, y| dt.get(x, y) > distance)
}

/// Intersection of the motion mask with the eroded previous prediction.
/// An empty intersection reverts the frame to one-shot finetuning so motion
/// errors cannot propagate.
pub fn select_positives(
    prev_pred: &BinaryMask,
    motion: &MotionMask,
    erosion_radius: u32,
) -> Result<(BinaryMask, FrameMode)> {
    check_dims(prev_pred.dims(), motion.mask.dims())?;
    let eroded = erode(prev_pred, erosion_radius);
    let positives = eroded.intersect(&motion.mask)?;
    if positives.is_empty() {
        Ok((
            BinaryMask::new(prev_pred.width(), prev_pred.height()),
            FrameMode::OneShot,
        ))
    } else {
        Ok((positives, FrameMode::Adapt))
    }
}

/// Combines the three selections into one label map.
///
/// Overlaps resolve by priority positive > hard negative > negative. In
/// one-shot mode every pixel is unlabeled: the frame trains purely on the
/// first-frame pseudo ground truth.
pub fn assemble_labels(
    pos: &BinaryMask,
    neg: &BinaryMask,
    hard_neg: &BinaryMask,
    mode: FrameMode,
) -> Result<LabelMap> {
    check_dims(pos.dims(), neg.dims())?;
    check_dims(pos.dims(), hard_neg.dims())?;
    let (w, h) = pos.dims();
    let labels = if mode == FrameMode::OneShot {
        vec![Label::Unlabeled; w * h]
    } else {
        (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                if pos.get(x, y) {
                    Label::Positive
                } else if hard_neg.get(x, y) {
                    Label::HardNegative
                } else if neg.get(x, y) {
                    Label::Negative
                } else {
                    Label::Unlabeled
                }
            })
            .collect()
    };
    Ok(LabelMap {
        width: w,
        height: h,
        labels,
        mode,
    })
}
