//! End-to-end orchestration over a sequence directory: pseudo ground
//! truth, per-frame selection, adaptation-plan emission, overlays, and
//! optional evaluation.
//!
//! Layout under the sequence root: `frames/` (PGM/PPM), `flow/`
//! (Middlebury .flo, one per consecutive pair), `proposals/` (.jsonl),
//! optional `semantic/`, `gt/`, `predictions/`. Frame indices are
//! contiguous, zero-padded to five digits.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adaptation::{build_plan, AdaptationConfig, PlanFrame};
use crate::error::{check_dims, Error, Result};
use crate::flow::{flow_saliency, read_flo, MotionMask};
use crate::mask::{overlap_ratio, union_all, BinaryMask};
use crate::metrics::{boundary, default_boundary_tolerance, sequence_report, SequenceReport};
use crate::pnm;
use crate::proposals::{
    filter_by_score, parse_proposals, select_source, to_class_agnostic, FrameProposals,
    ProposalSource,
};
use crate::pseudo_gt::generate_pseudo_gt;
use crate::select::{
    assemble_labels, hard_negative_indices, select_negatives, select_positives, FrameMode,
    SelectionConfig,
};
use crate::tracklet::{check_consistency, ConsistencyVerdict, GrayFrame};

/// All pipeline knobs with their published-method defaults. `neg_distance`
/// and `eval_tolerance` left at 0 resolve per sequence from the frame diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Motion-overlap ceiling for hard negatives.
    pub t1: f64,
    /// Tracklet-IoU floor for the consistency test.
    pub t2: f64,
    /// Tracklet depth in frames.
    pub k: usize,
    /// Confidence floor for hard-negative candidates.
    pub score_min: f64,
    /// Confidence floor for pseudo-ground-truth candidates; kept separate
    /// from `score_min` so the two filters can be tuned independently.
    pub pgt_score_min: f64,
    /// Motion-overlap floor for pseudo-ground-truth selection.
    pub pgt_threshold: f64,
    pub erosion_radius: u32,
    /// Easy-negative distance in pixels; 0 = round(0.15 * diagonal).
    pub neg_distance: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub iterations: u32,
    pub first_frame_sample_prob: f64,
    /// Minimum motion-mask area as a fraction of the frame.
    pub min_area_ratio: f64,
    pub eval_enabled: bool,
    /// Boundary tolerance in pixels; 0 = max(1, round(0.008 * diagonal)).
    pub eval_tolerance: u32,
    pub eval_exclude_endpoints: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            t1: 0.2,
            t2: 0.7,
            k: 3,
            score_min: 0.8,
            pgt_score_min: 0.8,
            pgt_threshold: 0.5,
            erosion_radius: 5,
            neg_distance: 0.0,
            lambda: 0.8,
            alpha: 0.95,
            iterations: 15,
            first_frame_sample_prob: 0.95,
            min_area_ratio: 0.001,
            eval_enabled: true,
            eval_tolerance: 0,
            eval_exclude_endpoints: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t1", self.t1),
            ("t2", self.t2),
            ("score_min", self.score_min),
            ("pgt_score_min", self.pgt_score_min),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("first_frame_sample_prob", self.first_frame_sample_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::format(format!("{name} = {v} out of [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.pgt_threshold) {
            return Err(Error::format(format!(
                "pgt_threshold = {} out of [0, 1)",
                self.pgt_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.min_area_ratio) {
            return Err(Error::format(format!(
                "min_area_ratio = {} out of [0, 1)",
                self.min_area_ratio
            )));
        }
        if self.t2 == 0.0 {
            return Err(Error::format("t2 must be > 0"));
        }
        if self.k < 1 {
            return Err(Error::format("k must be >= 1"));
        }
        if self.iterations < 1 {
            return Err(Error::format("iterations must be >= 1"));
        }
        if self.neg_distance < 0.0 {
            return Err(Error::format("neg_distance must be >= 0 (0 = auto)"));
        }
        Ok(())
    }

    /// Selection thresholds with size-derived defaults resolved.
    pub fn selection_for(&self, width: usize, height: usize) -> SelectionConfig {
        let neg_distance = if self.neg_distance > 0.0 {
            self.neg_distance
        } else {
            (0.15 * ((width * width + height * height) as f64).sqrt()).round()
        };
        SelectionConfig {
            t1: self.t1,
            t2: self.t2,
            k: self.k,
            score_min: self.score_min,
            erosion_radius: self.erosion_radius,
            neg_distance,
            pgt_threshold: self.pgt_threshold,
        }
    }

    pub fn adaptation(&self) -> AdaptationConfig {
        AdaptationConfig {
            lambda: self.lambda,
            alpha: self.alpha,
            iterations: self.iterations,
            first_frame_sample_prob: self.first_frame_sample_prob,
        }
    }

    pub fn boundary_tolerance_for(&self, width: usize, height: usize) -> u32 {
        if self.eval_tolerance > 0 {
            self.eval_tolerance
        } else {
            default_boundary_tolerance(width, height)
        }
    }
}

/// Parses the flat key=value TOML config. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::format(format!("config: {e}")))?;
    let mut cfg = PipelineConfig::default();
    for (key, value) in &table {
        match key.as_str() {
            "t1" => cfg.t1 = float_value(key, value)?,
            "t2" => cfg.t2 = float_value(key, value)?,
            "k" => cfg.k = int_value(key, value)? as usize,
            "score_min" => cfg.score_min = float_value(key, value)?,
            "pgt_score_min" => cfg.pgt_score_min = float_value(key, value)?,
            "pgt_threshold" => cfg.pgt_threshold = float_value(key, value)?,
            "erosion_radius" => cfg.erosion_radius = int_value(key, value)? as u32,
            "neg_distance" => cfg.neg_distance = float_value(key, value)?,
            "lambda" => cfg.lambda = float_value(key, value)?,
            "alpha" => cfg.alpha = float_value(key, value)?,
            "iterations" => cfg.iterations = int_value(key, value)? as u32,
            "first_frame_sample_prob" => cfg.first_frame_sample_prob = float_value(key, value)?,
            "min_area_ratio" => cfg.min_area_ratio = float_value(key, value)?,
            "eval_enabled" => cfg.eval_enabled = bool_value(key, value)?,
            "eval_tolerance" => cfg.eval_tolerance = int_value(key, value)? as u32,
            "eval_exclude_endpoints" => cfg.eval_exclude_endpoints = bool_value(key, value)?,
            other => return Err(Error::format(format!("unknown config key `{other}`"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn float_value(key: &str, value: &toml::Value) -> Result<f64> {
    match value {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::format(format!("config key `{key}` must be a number"))),
    }
}

fn int_value(key: &str, value: &toml::Value) -> Result<i64> {
    match value {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i),
        _ => Err(Error::format(format!(
            "config key `{key}` must be a non-negative integer"
        ))),
    }
}

fn bool_value(key: &str, value: &toml::Value) -> Result<bool> {
    match value {
        toml::Value::Boolean(b) => Ok(*b),
        _ => Err(Error::format(format!("config key `{key}` must be a boolean"))),
    }
}

/// Resolved input files of one sequence directory.
#[derive(Debug, Clone)]
pub struct SequenceLayout {
    pub root: PathBuf,
    pub n_frames: usize,
    pub frames: Vec<PathBuf>,
    pub flow: Vec<PathBuf>,
    pub proposals: Vec<PathBuf>,
    pub semantic: Option<PathBuf>,
    /// Annotated frames; sparse annotation is allowed.
    pub gt: Option<Vec<(usize, PathBuf)>>,
    pub predictions: Option<Vec<PathBuf>>,
}

fn indexed_files(dir: &Path, ext: &[&str]) -> Result<Vec<(usize, PathBuf)>> {
    let mut found = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let (Some(stem), Some(extension)) = (
            path.file_stem().and_then(|s| s.to_str()),
            path.extension().and_then(|s| s.to_str()),
        ) else {
            continue;
        };
        if stem.len() == 5 && stem.chars().all(|c| c.is_ascii_digit()) && ext.contains(&extension)
        {
            found.push((stem.parse().unwrap(), path));
        }
    }
    found.sort();
    Ok(found)
}

fn contiguous(dir: &Path, files: Vec<(usize, PathBuf)>, expected: Option<usize>) -> Result<Vec<PathBuf>> {
    if files.is_empty() {
        return Err(Error::format(format!("{}: no indexed files", dir.display())));
    }
    for (i, (index, _)) in files.iter().enumerate() {
        if *index != i {
            return Err(Error::format(format!(
                "{}: frame indices not contiguous from 0 (missing {i:05})",
                dir.display()
            )));
        }
    }
    if let Some(n) = expected {
        if files.len() != n {
            return Err(Error::format(format!(
                "{}: found {} files, expected {n}",
                dir.display(),
                files.len()
            )));
        }
    }
    Ok(files.into_iter().map(|(_, p)| p).collect())
}

impl SequenceLayout {
    pub fn discover(root: &Path) -> Result<Self> {
        for required in ["frames", "flow", "proposals"] {
            if !root.join(required).is_dir() {
                return Err(Error::format(format!(
                    "{}: missing required input directory `{required}/`",
                    root.display()
                )));
            }
        }
        let frames = contiguous(
            &root.join("frames"),
            indexed_files(&root.join("frames"), &["pgm", "ppm"])?,
            None,
        )?;
        let n_frames = frames.len();
        if n_frames < 2 {
            return Err(Error::format(format!(
                "{}: a sequence needs at least 2 frames",
                root.display()
            )));
        }
        let flow = contiguous(
            &root.join("flow"),
            indexed_files(&root.join("flow"), &["flo"])?,
            Some(n_frames - 1),
        )?;
        let proposals = contiguous(
            &root.join("proposals"),
            indexed_files(&root.join("proposals"), &["jsonl"])?,
            Some(n_frames),
        )?;
        let semantic_dir = root.join("semantic");
        let semantic = if semantic_dir.is_dir() {
            let first = semantic_dir.join("00000.jsonl");
            if !first.is_file() {
                return Err(Error::format(format!(
                    "{}: semantic/ present but 00000.jsonl missing",
                    root.display()
                )));
            }
            Some(first)
        } else {
            None
        };
        let gt_dir = root.join("gt");
        let gt = if gt_dir.is_dir() {
            Some(indexed_files(&gt_dir, &["pgm"])?)
        } else {
            None
        };
        let predictions_dir = root.join("predictions");
        let predictions = if predictions_dir.is_dir() {
            Some(contiguous(
                &predictions_dir,
                indexed_files(&predictions_dir, &["pgm"])?,
                Some(n_frames),
            )?)
        } else {
            None
        };
        Ok(SequenceLayout {
            root: root.to_path_buf(),
            n_frames,
            frames,
            flow,
            proposals,
            semantic,
            gt,
            predictions,
        })
    }

    pub fn sequence_name(&self) -> String {
        self.root
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("sequence")
            .to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PseudoGtSidecar {
    selected_indices: Vec<usize>,
    source_indices: Vec<usize>,
    t: f64,
    source: ProposalSource,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelSidecar {
    pub mode: FrameMode,
    /// Source record indices of proposals selected as hard negatives; kept
    /// even for one-shot frames, where the label map drops them.
    pub hard_negative_indices: Vec<usize>,
}

/// What one run produced, echoed by the service and CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub sequence: String,
    pub frames: usize,
    pub plan_records: usize,
    pub one_shot_frames: usize,
    /// Hard-negative source indices per frame.
    pub hard_negatives: BTreeMap<usize, Vec<usize>>,
    pub metrics: Option<SequenceReport>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(
        path,
        serde_json::to_string_pretty(value).expect("artifact serializes"),
    )
    .map_err(|e| Error::io(path, e))
}

/// Runs the full per-sequence pipeline and writes every artifact under
/// `out_dir`: `pseudo_gt.pgm` (+ .json), `labels/<i>.pgm` (+ .json),
/// `overlays/<i>.ppm`, `plan.json`, and `metrics.json` when evaluation
/// inputs exist. Rerunning over the same inputs rewrites identical bytes.
pub fn run_sequence(
    layout: &SequenceLayout,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<RunSummary> {
    config.validate()?;
    let n = layout.n_frames;

    let grays: Vec<GrayFrame> = layout
        .frames
        .iter()
        .map(|p| GrayFrame::read_pnm(p))
        .collect::<Result<_>>()?;
    let dims = grays[0].dims();
    for g in &grays[1..] {
        check_dims(dims, g.dims())?;
    }
    let selection = config.selection_for(dims.0, dims.1);
    selection.validate()?;

    let raw_proposals: Vec<FrameProposals> = layout
        .proposals
        .iter()
        .enumerate()
        .map(|(i, p)| parse_proposals(p, i))
        .collect::<Result<_>>()?;
    for fp in &raw_proposals {
        if let Some(p) = fp.proposals.first() {
            check_dims(dims, p.mask.dims())?;
        }
    }
    let filtered: Vec<FrameProposals> = raw_proposals
        .iter()
        .map(|fp| filter_by_score(fp, config.score_min))
        .collect();

    // Motion mask per consecutive pair; the final frame reuses the last
    // pair's mask because no forward flow exists for it.
    let mut motion: Vec<MotionMask> = Vec::with_capacity(n - 1);
    for (t, path) in layout.flow.iter().enumerate() {
        let field = read_flo(path)?;
        check_dims(dims, field.dims())?;
        motion.push(flow_saliency(&field, config.min_area_ratio, t));
    }
    let motion_for = |t: usize| -> &MotionMask { &motion[t.min(n - 2)] };

    // First-frame pseudo ground truth, optionally from the semantic source.
    let pgt_candidates = filter_by_score(&raw_proposals[0], config.pgt_score_min);
    let source = select_source(&pgt_candidates, layout.semantic.is_some());
    let fused = match source {
        ProposalSource::Instance => to_class_agnostic(&pgt_candidates),
        ProposalSource::Semantic => {
            let path = layout.semantic.as_ref().expect("semantic source selected");
            let mut sem = parse_proposals(path, 0)?;
            sem.source = ProposalSource::Semantic;
            if let Some(p) = sem.proposals.first() {
                check_dims(dims, p.mask.dims())?;
            }
            to_class_agnostic(&filter_by_score(&sem, config.pgt_score_min))
        }
    };
    let pgt = generate_pseudo_gt(&fused, motion_for(0), config.pgt_threshold)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    fs::create_dir_all(out_dir.join("labels")).map_err(|e| Error::io(out_dir.join("labels"), e))?;
    fs::create_dir_all(out_dir.join("overlays"))
        .map_err(|e| Error::io(out_dir.join("overlays"), e))?;

    pnm::write_mask(&out_dir.join("pseudo_gt.pgm"), &pgt.mask)?;
    write_json(
        &out_dir.join("pseudo_gt.json"),
        &PseudoGtSidecar {
            selected_indices: pgt.selected_indices.clone(),
            source_indices: pgt
                .selected_indices
                .iter()
                .map(|&i| fused.proposals[i].source_index)
                .collect(),
            t: pgt.threshold_used,
            source,
        },
    )?;

    let mut label_maps = Vec::with_capacity(n - 1);
    let mut hard_negatives = BTreeMap::new();
    let mut one_shot_frames = 0usize;

    for t in 1..n {
        let m = motion_for(t);
        let fp = &filtered[t];

        // The motion gate runs first; block matching only pays for
        // candidates that could still qualify.
        let mut verdicts: Vec<ConsistencyVerdict> = Vec::with_capacity(fp.proposals.len());
        let k_eff = config.k.min(t);
        for p in &fp.proposals {
            let gated = overlap_ratio(&p.mask, &m.mask)? < selection.t1;
            if !gated {
                verdicts.push(ConsistencyVerdict {
                    consistent: false,
                    per_frame_iou: Vec::new(),
                });
                continue;
            }
            let history: Vec<(&GrayFrame, &FrameProposals)> = (1..=k_eff)
                .map(|j| (&grays[t - j], &filtered[t - j]))
                .collect();
            verdicts.push(check_consistency(
                &p.bbox,
                &history,
                &grays[t],
                k_eff,
                selection.t2,
            )?);
        }

        let hn_ordinals = hard_negative_indices(fp, m, &verdicts, &selection)?;
        let hn_mask = if hn_ordinals.is_empty() {
            BinaryMask::new(dims.0, dims.1)
        } else {
            union_all(
                &hn_ordinals
                    .iter()
                    .map(|&i| fp.proposals[i].mask.clone())
                    .collect::<Vec<_>>(),
            )?
        };
        let hn_source_indices: Vec<usize> = hn_ordinals
            .iter()
            .map(|&i| fp.proposals[i].source_index)
            .collect();

        let prev_pred = match &layout.predictions {
            Some(paths) => pnm::read_mask(&paths[t - 1])?,
            None => pgt.mask.clone(),
        };
        check_dims(dims, prev_pred.dims())?;

        let (positives, mode) = select_positives(&prev_pred, m, selection.erosion_radius)?;
        let negatives = select_negatives(&positives, selection.neg_distance);
        let labels = assemble_labels(&positives, &negatives, &hn_mask, mode)?;
        if mode == FrameMode::OneShot {
            one_shot_frames += 1;
        }

        labels.write_pgm(&out_dir.join("labels").join(format!("{t:05}.pgm")))?;
        write_json(
            &out_dir.join("labels").join(format!("{t:05}.json")),
            &LabelSidecar {
                mode,
                hard_negative_indices: hn_source_indices.clone(),
            },
        )?;
        write_overlay(
            &out_dir.join("overlays").join(format!("{t:05}.ppm")),
            &grays[t],
            &positives,
            &negatives,
            &hn_mask,
        )?;

        hard_negatives.insert(t, hn_source_indices);
        label_maps.push(labels);
    }

    let plan_inputs: Vec<PlanFrame<'_>> = label_maps
        .iter()
        .enumerate()
        .map(|(i, labels)| PlanFrame {
            frame_index: i + 1,
            labels,
            label_map_path: format!("labels/{:05}.pgm", i + 1),
        })
        .collect();
    let plan = build_plan(&plan_inputs, "pseudo_gt.pgm", &config.adaptation());
    plan.write(&out_dir.join("plan.json"))?;

    let metrics = if config.eval_enabled {
        match (&layout.gt, &layout.predictions) {
            (Some(gt_files), Some(pred_files)) if !gt_files.is_empty() => {
                let mut preds = Vec::new();
                let mut gts = Vec::new();
                let mut indices = Vec::new();
                for (index, gt_path) in gt_files {
                    preds.push(pnm::read_mask(&pred_files[*index])?);
                    gts.push(pnm::read_mask(gt_path)?);
                    indices.push(*index);
                }
                let tolerance = config.boundary_tolerance_for(dims.0, dims.1);
                let report = sequence_report(
                    &layout.sequence_name(),
                    &preds,
                    &gts,
                    &indices,
                    tolerance,
                    config.eval_exclude_endpoints,
                )?;
                write_json(&out_dir.join("metrics.json"), &report)?;
                Some(report)
            }
            _ => None,
        }
    } else {
        None
    };

    Ok(RunSummary {
        sequence: layout.sequence_name(),
        frames: n,
        plan_records: plan.records.len(),
        one_shot_frames,
        hard_negatives,
        metrics,
    })
}

/// Overlay: luminance base with positives tinted green, hard negatives
/// outlined red, negatives stippled blue.
fn write_overlay(
    path: &Path,
    frame: &GrayFrame,
    positives: &BinaryMask,
    negatives: &BinaryMask,
    hard_negatives: &BinaryMask,
) -> Result<()> {
    let (w, h) = frame.dims();
    let hn_outline = boundary(hard_negatives);
    let mut rgb = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let g = frame.get(x, y);
            let px: [u8; 3] = if hn_outline.get(x, y) {
                [255, 40, 40]
            } else if positives.get(x, y) {
                [g / 2, 128u8.saturating_add(g / 2), g / 2]
            } else if negatives.get(x, y) && (x + y) % 4 == 0 {
                [60, 60, 255]
            } else {
                [g, g, g]
            };
            rgb.extend_from_slice(&px);
        }
    }
    pnm::write_ppm(path, w, h, &rgb)
}

/// Standalone evaluation of aligned prediction/ground-truth directories,
/// written to `out_path` as metrics.json.
pub fn evaluate_directories(
    pred_dir: &Path,
    gt_dir: &Path,
    out_path: &Path,
    tolerance: Option<u32>,
    exclude_endpoints: bool,
) -> Result<SequenceReport> {
    if !gt_dir.is_dir() {
        return Err(Error::format(format!(
            "{}: not a directory",
            gt_dir.display()
        )));
    }
    if !pred_dir.is_dir() {
        return Err(Error::format(format!(
            "{}: not a directory",
            pred_dir.display()
        )));
    }
    let gt_files = indexed_files(gt_dir, &["pgm"])?;
    if gt_files.is_empty() {
        return Err(Error::format(format!(
            "{}: no ground-truth masks",
            gt_dir.display()
        )));
    }
    let mut preds = Vec::new();
    let mut gts = Vec::new();
    let mut indices = Vec::new();
    for (index, gt_path) in &gt_files {
        let pred_path = pred_dir.join(format!("{index:05}.pgm"));
        if !pred_path.is_file() {
            return Err(Error::format(format!(
                "{}: missing prediction for annotated frame {index:05}",
                pred_dir.display()
            )));
        }
        preds.push(pnm::read_mask(&pred_path)?);
        gts.push(pnm::read_mask(gt_path)?);
        indices.push(*index);
    }
    let (w, h) = gts[0].dims();
    let tolerance = tolerance.unwrap_or_else(|| default_boundary_tolerance(w, h));
    let sequence = pred_dir
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string();
    let report = sequence_report(&sequence, &preds, &gts, &indices, tolerance, exclude_endpoints)?;
    write_json(out_path, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_published_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.t1, 0.2);
        assert_eq!(cfg.t2, 0.7);
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.lambda, 0.8);
        assert_eq!(cfg.alpha, 0.95);
        assert_eq!(cfg.score_min, 0.8);
    }

    #[test]
    fn out_of_range_value_rejected() {
        assert!(parse_config("t1 = 1.5\n").is_err());
        assert!(parse_config("alpha = -0.1\n").is_err());
        assert!(parse_config("k = 0\n").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config("t3 = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("t3"));
    }

    #[test]
    fn explicit_default_equals_default() {
        let cfg = parse_config("k = 3\n").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
    }

    #[test]
    fn integers_coerce_to_floats() {
        let cfg = parse_config("t1 = 0\nneg_distance = 12\n").unwrap();
        assert_eq!(cfg.t1, 0.0);
        assert_eq!(cfg.neg_distance, 12.0);
    }

    #[test]
    fn neg_distance_resolves_from_diagonal() {
        let cfg = PipelineConfig::default();
        let sel = cfg.selection_for(854, 480);
        // 0.15 * sqrt(854^2 + 480^2) = 0.15 * 979.65... -> 147
        assert_eq!(sel.neg_distance, 147.0);
        let explicit = PipelineConfig {
            neg_distance: 9.5,
            ..PipelineConfig::default()
        };
        assert_eq!(explicit.selection_for(854, 480).neg_distance, 9.5);
    }
}
