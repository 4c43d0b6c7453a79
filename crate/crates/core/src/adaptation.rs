//! Loss arithmetic over probability maps and label maps, analytic
//! gradients for an external trainer, and per-frame adaptation-plan
//! emission.
//!
//! Losses are per-class mean binary cross-entropy. The current-frame loss
//! blends hard negatives against easy negatives with weight `lambda` and
//! adds the positive term unweighted; the total loss blends the first-frame
//! loss against the current frame with weight `alpha`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::mask::BinaryMask;
use crate::select::{FrameMode, Label, LabelMap};

/// Probability clamp applied on construction; keeps the logs finite.
pub const PROB_EPSILON: f64 = 1e-7;

/// Per-pixel foreground probabilities, row-major, clamped away from 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    p: Vec<f64>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, p: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::format("probability map dimensions must be >= 1"));
        }
        if p.len() != width * height {
            return Err(Error::format(format!(
                "probability count {} does not match {}x{}",
                p.len(),
                width,
                height
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::format("probability map contains non-finite values"));
        }
        let p = p
            .into_iter()
            .map(|v| v.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON))
            .collect();
        Ok(ProbMap {
            width,
            height,
            p,
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
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[y * self.width + x]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }
}

/// Mean loss over one label class, with the pixel count that produced it.
/// A zero count marks an empty class whose loss is defined as 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassLoss {
    pub loss: f64,
    pub pixels: usize,
}

impl ClassLoss {
    pub fn is_empty(&self) -> bool {
        self.pixels == 0
    }
}

/// Mean binary cross-entropy over the region: -[y ln p + (1-y) ln(1-p)]
/// with y = 1 for positive-target regions and 0 otherwise. An empty region
/// yields loss 0 with `pixels == 0` as the warning flag.
pub fn pixel_loss(p: &ProbMap, region: &BinaryMask, target_foreground: bool) -> Result<ClassLoss> {
    check_dims(p.dims(), region.dims())?;
    let mut sum = 0.0;
    let mut pixels = 0usize;
    for (i, &in_region) in region.bits().iter().enumerate() {
        if !in_region {
            continue;
        }
        let v = p.p[i];
        sum += if target_foreground { -v.ln() } else { -(1.0 - v).ln() };
        pixels += 1;
    }
    if pixels == 0 {
        return Ok(ClassLoss { loss: 0.0, pixels: 0 });
    }
    Ok(ClassLoss {
        loss: sum / pixels as f64,
        pixels,
    })
}

/// Loss terms of one frame. `l_first_frame` and `l_total` are zero until
/// [`LossBreakdown::with_first_frame`] folds in the first-frame term.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub hard_negative: ClassLoss,
    pub negative: ClassLoss,
    pub positive: ClassLoss,
    pub lambda: f64,
    pub l_current: f64,
    pub l_first_frame: f64,
    pub l_total: f64,
}

impl LossBreakdown {
    pub fn with_first_frame(mut self, ff_loss: f64, alpha: f64) -> Self {
        self.l_first_frame = ff_loss;
        self.l_total = total_loss(&self, ff_loss, alpha);
        self
    }
}

/// Current-frame loss: lambda * L_hn + (1 - lambda) * L_n + L_pos.
/// Rejects one-shot label maps; those frames train on the first frame only.
pub fn current_frame_loss(p: &ProbMap, labels: &LabelMap, lambda: f64) -> Result<LossBreakdown> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::format(format!("lambda = {lambda} out of [0, 1]")));
    }
    if labels.mode == FrameMode::OneShot {
        return Err(Error::format(
            "current_frame_loss is undefined for one-shot label maps",
        ));
    }
    check_dims(p.dims(), labels.dims())?;
    let hard_negative = pixel_loss(p, &labels.class_mask(Label::HardNegative), false)?;
    let negative = pixel_loss(p, &labels.class_mask(Label::Negative), false)?;
    let positive = pixel_loss(p, &labels.class_mask(Label::Positive), true)?;
    let l_current = lambda * hard_negative.loss + (1.0 - lambda) * negative.loss + positive.loss;
    Ok(LossBreakdown {
        hard_negative,
        negative,
        positive,
        lambda,
        l_current,
        l_first_frame: 0.0,
        l_total: 0.0,
    })
}

/// Total loss: alpha * L_ff + (1 - alpha) * L_curr.
pub fn total_loss(curr: &LossBreakdown, ff_loss: f64, alpha: f64) -> f64 {
    assert!((0.0..=1.0).contains(&alpha), "alpha must be in [0, 1]");
    alpha * ff_loss + (1.0 - alpha) * curr.l_current
}

/// First-frame supervision against the pseudo ground truth: per-class mean
/// cross-entropy on the foreground plus the background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstFrameLoss {
    pub loss: f64,
    pub foreground: ClassLoss,
    pub background: ClassLoss,
}

pub fn first_frame_loss(p: &ProbMap, pseudo_gt: &BinaryMask) -> Result<FirstFrameLoss> {
    check_dims(p.dims(), pseudo_gt.dims())?;
    let background_mask = BinaryMask::from_bits(
        pseudo_gt.width(),
        pseudo_gt.height(),
        pseudo_gt.bits().iter().map(|&b| !b).collect(),
    )?;
    let foreground = pixel_loss(p, pseudo_gt, true)?;
    let background = pixel_loss(p, &background_mask, false)?;
    Ok(FirstFrameLoss {
        loss: foreground.loss + background.loss,
        foreground,
        background,
    })
}

/// First-frame inputs for the composite gradient.
pub struct FirstFrameInputs<'a> {
    pub prob: &'a ProbMap,
    pub target: &'a BinaryMask,
}

/// Analytic gradients of the composite loss, one entry per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    /// d L_total / d p for the current frame; unlabeled pixels get 0.
    pub current: Vec<f64>,
    /// d L_total / d p for the first frame, when its inputs were supplied.
    pub first_frame: Option<Vec<f64>>,
}

/// Gradient of `alpha * L_ff + (1 - alpha) * (lambda * L_hn +
/// (1 - lambda) * L_n + L_pos)` with respect to each probability.
pub fn loss_gradient(
    p: &ProbMap,
    labels: &LabelMap,
    lambda: f64,
    alpha: f64,
    ff: Option<FirstFrameInputs<'_>>,
) -> Result<LossGradient> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::format(format!("alpha = {alpha} out of [0, 1]")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::format(format!("lambda = {lambda} out of [0, 1]")));
    }
    if labels.mode == FrameMode::OneShot {
        return Err(Error::format(
            "loss_gradient is undefined for one-shot label maps",
        ));
    }
    check_dims(p.dims(), labels.dims())?;

    let n_hn = labels.count(Label::HardNegative);
    let n_neg = labels.count(Label::Negative);
    let n_pos = labels.count(Label::Positive);
    let current_weight = 1.0 - alpha;

    let current = labels
        .labels()
        .iter()
        .zip(p.values())
        .map(|(&label, &v)| match label {
            Label::Unlabeled => 0.0,
            Label::Positive => current_weight * (-1.0 / (n_pos as f64 * v)),
            Label::HardNegative => current_weight * lambda / (n_hn as f64 * (1.0 - v)),
            Label::Negative => current_weight * (1.0 - lambda) / (n_neg as f64 * (1.0 - v)),
        })
        .collect();

    let first_frame = match ff {
        None => None,
        Some(inputs) => {
            check_dims(inputs.prob.dims(), inputs.target.dims())?;
            let n_fg = inputs.target.area();
            let n_bg = inputs.target.width() * inputs.target.height() - n_fg;
            Some(
                inputs
                    .target
                    .bits()
                    .iter()
                    .zip(inputs.prob.values())
                    .map(|(&fg, &v)| {
                        if fg {
                            alpha * (-1.0 / (n_fg as f64 * v))
                        } else {
                            alpha / (n_bg as f64 * (1.0 - v))
                        }
                    })
                    .collect(),
            )
        }
    };

    Ok(LossGradient {
        current,
        first_frame,
    })
}

/// Defaults for plan emission.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationConfig {
    /// Hard-negative attention weight when hard negatives exist.
    pub lambda: f64,
    /// First-frame loss weight.
    pub alpha: f64,
    /// Finetuning iterations per frame.
    pub iterations: u32,
    /// Probability that a training sample draws the first frame.
    pub first_frame_sample_prob: f64,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig {
            lambda: 0.8,
            alpha: 0.95,
            iterations: 15,
            first_frame_sample_prob: 0.95,
        }
    }
}

/// One frame's training directive for the external trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub frame_index: usize,
    pub mode: FrameMode,
    pub lambda: f64,
    pub alpha: f64,
    pub iterations: u32,
    pub first_frame_sample_prob: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label_map_path: Option<String>,
    pub pseudo_gt_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub records: Vec<PlanRecord>,
}

impl AdaptationPlan {
    /// Pretty-printed JSON with struct-order keys; the trainer contract.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format(format!("plan: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<Self> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))?;
        Ok(self.clone())
    }
}

/// Per-frame selection outcome handed to [`build_plan`].
pub struct PlanFrame<'a> {
    pub frame_index: usize,
    pub labels: &'a LabelMap,
    /// Path of the persisted label map, relative to the output root.
    pub label_map_path: String,
}

/// Emits one record per frame. Lambda drops to 0 whenever the frame's
/// hard-negative mask is empty; one-shot frames omit the label-map path.
pub fn build_plan(
    frames: &[PlanFrame<'_>],
    pseudo_gt_path: &str,
    cfg: &AdaptationConfig,
) -> AdaptationPlan {
    let records = frames
        .iter()
        .map(|f| {
            let has_hard_negatives = f.labels.count(Label::HardNegative) > 0;
            PlanRecord {
                frame_index: f.frame_index,
                mode: f.labels.mode,
                lambda: if has_hard_negatives { cfg.lambda } else { 0.0 },
                alpha: cfg.alpha,
                iterations: cfg.iterations,
                first_frame_sample_prob: cfg.first_frame_sample_prob,
                label_map_path: match f.labels.mode {
                    FrameMode::OneShot => None,
                    FrameMode::Adapt => Some(f.label_map_path.clone()),
                },
                pseudo_gt_path: pseudo_gt_path.to_string(),
            }
        })
        .collect();
    AdaptationPlan { records }
}
