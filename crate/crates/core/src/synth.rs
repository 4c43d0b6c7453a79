//! Deterministic synthetic-sequence generator: frames, analytic flow,
//! jittered detector proposals, ground-truth masks, and a manifest naming
//! the planted static distractors so selection quality can be scored
//! against known truth.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{write_flo, FlowField};
use crate::mask::BinaryMask;
use crate::pnm;
use crate::proposals::{serialize_proposals, FrameProposals, InstanceProposal, ProposalSource};
use crate::mask::bbox_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rect,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub shape: Shape,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    /// Integer pixels per frame; integer velocities keep flow/warp checks
    /// and block-matching recovery exact.
    pub vx: i64,
    pub vy: i64,
    pub texture_seed: u64,
    #[serde(default = "default_target_category")]
    pub category: u32,
}

fn default_target_category() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistractorSpec {
    pub shape: Shape,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
    #[serde(rename = "static", default = "default_true")]
    pub is_static: bool,
    #[serde(default)]
    pub vx: i64,
    #[serde(default)]
    pub vy: i64,
    pub category: u32,
    #[serde(default)]
    pub similar_appearance: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorNoise {
    /// Maximum per-axis displacement of a reported mask, in pixels.
    pub boundary_jitter_px: i64,
    pub score_min: f64,
    pub score_max: f64,
    /// Per-frame probability of one spurious detection.
    pub false_positive_rate: f64,
}

impl Default for DetectorNoise {
    fn default() -> Self {
        DetectorNoise {
            boundary_jitter_px: 1,
            score_min: 0.85,
            score_max: 0.99,
            false_positive_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub seed: u64,
    pub target: TargetSpec,
    #[serde(default)]
    pub distractors: Vec<DistractorSpec>,
    #[serde(default)]
    pub noise: DetectorNoise,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SceneSpec =
            serde_json::from_str(text).map_err(|e| Error::format(format!("scene spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::format("scene dimensions must be >= 1"));
        }
        if self.n_frames < 2 {
            return Err(Error::format("a scene needs at least 2 frames"));
        }
        if !(0.0..=1.0).contains(&self.noise.false_positive_rate) {
            return Err(Error::format("false_positive_rate out of [0, 1]"));
        }
        if self.noise.boundary_jitter_px < 0 {
            return Err(Error::format("boundary_jitter_px must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.noise.score_min)
            || !(0.0..=1.0).contains(&self.noise.score_max)
            || self.noise.score_min > self.noise.score_max
        {
            return Err(Error::format("score range must satisfy 0 <= min <= max <= 1"));
        }
        let check_path = |name: &str, x: usize, y: usize, w: usize, h: usize, vx: i64, vy: i64| {
            if w == 0 || h == 0 {
                return Err(Error::format(format!("{name}: zero-sized object")));
            }
            for t in 0..self.n_frames as i64 {
                let px = x as i64 + t * vx;
                let py = y as i64 + t * vy;
                if px < 0
                    || py < 0
                    || px + w as i64 > self.width as i64
                    || py + h as i64 > self.height as i64
                {
                    return Err(Error::format(format!(
                        "{name} leaves the frame at frame {t}"
                    )));
                }
            }
            Ok(())
        };
        check_path(
            "target",
            self.target.x,
            self.target.y,
            self.target.w,
            self.target.h,
            self.target.vx,
            self.target.vy,
        )?;
        for (i, d) in self.distractors.iter().enumerate() {
            if d.is_static && (d.vx != 0 || d.vy != 0) {
                return Err(Error::format(format!(
                    "distractor_{i}: static objects cannot carry a velocity"
                )));
            }
            check_path(&format!("distractor_{i}"), d.x, d.y, d.w, d.h, d.vx, d.vy)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Target,
    StaticDistractor,
    MovingDistractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestObject {
    pub id: String,
    pub kind: ObjectKind,
    pub category: u32,
}

/// Identity of one proposal record in a frame's `.jsonl` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordIdentity {
    /// Zero-based record index within the frame's proposal file.
    pub index: usize,
    /// Object id, or "false_positive".
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFrame {
    pub frame_index: usize,
    pub records: Vec<RecordIdentity>,
    /// Record indices of planted static distractors in this frame.
    pub planted_hard_negatives: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub seed: u64,
    pub objects: Vec<ManifestObject>,
    pub frames: Vec<ManifestFrame>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(format!("manifest: {e}")))
    }
}

/// One object resolved for rendering: shape raster in local coordinates,
/// a fixed texture patch, and its motion.
struct SceneObject {
    id: String,
    kind: ObjectKind,
    category: u32,
    shape: Shape,
    start: (usize, usize),
    size: (usize, usize),
    velocity: (i64, i64),
    texture: Vec<u8>,
}

impl SceneObject {
    fn position(&self, frame: usize) -> (usize, usize) {
        let x = self.start.0 as i64 + frame as i64 * self.velocity.0;
        let y = self.start.1 as i64 + frame as i64 * self.velocity.1;
        (x as usize, y as usize)
    }

    fn covers_local(&self, lx: usize, ly: usize) -> bool {
        shape_covers(self.shape, self.size.0, self.size.1, lx, ly)
    }

    /// Exact object mask at its true (unjittered) position.
    fn mask_at(&self, frame: usize, width: usize, height: usize) -> BinaryMask {
        let (px, py) = self.position(frame);
        BinaryMask::from_fn(width, height, |x, y| {
            x >= px && x < px + self.size.0 && y >= py && y < py + self.size.1
                && self.covers_local(x - px, y - py)
        })
    }
}

fn shape_covers(shape: Shape, w: usize, h: usize, lx: usize, ly: usize) -> bool {
    match shape {
        Shape::Rect => true,
        Shape::Ellipse => {
            let cx = (w as f64 - 1.0) / 2.0;
            let cy = (h as f64 - 1.0) / 2.0;
            let a = w as f64 / 2.0;
            let b = h as f64 / 2.0;
            let dx = (lx as f64 - cx) / a;
            let dy = (ly as f64 - cy) / b;
            dx * dx + dy * dy <= 1.0
        }
    }
}

/// Stable per-purpose substream seeds (FNV-1a over the tag, mixed with the
/// scene seed) so output bytes depend only on the spec.
fn stream_seed(seed: u64, tag: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in tag.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash ^ seed
}

fn texture_patch(seed: u64, w: usize, h: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..w * h).map(|_| rng.random::<u8>()).collect()
}

fn resolve_objects(spec: &SceneSpec) -> Vec<SceneObject> {
    let mut objects = Vec::with_capacity(1 + spec.distractors.len());
    objects.push(SceneObject {
        id: "target".to_string(),
        kind: ObjectKind::Target,
        category: spec.target.category,
        shape: spec.target.shape,
        start: (spec.target.x, spec.target.y),
        size: (spec.target.w, spec.target.h),
        velocity: (spec.target.vx, spec.target.vy),
        texture: texture_patch(spec.target.texture_seed, spec.target.w, spec.target.h),
    });
    for (i, d) in spec.distractors.iter().enumerate() {
        let texture_seed = if d.similar_appearance {
            spec.target.texture_seed
        } else {
            stream_seed(spec.seed, &format!("texture/distractor_{i}"))
        };
        objects.push(SceneObject {
            id: format!("distractor_{i}"),
            kind: if d.is_static {
                ObjectKind::StaticDistractor
            } else {
                ObjectKind::MovingDistractor
            },
            category: d.category,
            shape: d.shape,
            start: (d.x, d.y),
            size: (d.w, d.h),
            velocity: (d.vx, d.vy),
            texture: texture_patch(texture_seed, d.w, d.h),
        });
    }
    objects
}

/// Renders one frame: background noise, then distractors in declaration
/// order, then the target on top.
fn render_frame(
    spec: &SceneSpec,
    objects: &[SceneObject],
    background: &[u8],
    frame: usize,
) -> Vec<u8> {
    let mut pixels = background.to_vec();
    // Paint distractors first; target (objects[0]) last, so it occludes.
    for obj in objects.iter().skip(1).chain(objects.iter().take(1)) {
        let (px, py) = obj.position(frame);
        for ly in 0..obj.size.1 {
            for lx in 0..obj.size.0 {
                if obj.covers_local(lx, ly) {
                    pixels[(py + ly) * spec.width + (px + lx)] = obj.texture[ly * obj.size.0 + lx];
                }
            }
        }
    }
    pixels
}

/// Analytic flow for the pair (frame, frame+1): each pixel carries the
/// velocity of the topmost object covering it, zero elsewhere.
fn render_flow(spec: &SceneSpec, objects: &[SceneObject], frame: usize) -> FlowField {
    let mut vectors = vec![(0.0f32, 0.0f32); spec.width * spec.height];
    for obj in objects.iter().skip(1).chain(objects.iter().take(1)) {
        let (px, py) = obj.position(frame);
        for ly in 0..obj.size.1 {
            for lx in 0..obj.size.0 {
                if obj.covers_local(lx, ly) {
                    vectors[(py + ly) * spec.width + (px + lx)] =
                        (obj.velocity.0 as f32, obj.velocity.1 as f32);
                }
            }
        }
    }
    FlowField::from_vectors(spec.width, spec.height, vectors).expect("analytic flow is valid")
}

/// Jittered detection of one object: the exact shape displaced by up to
/// `jitter` pixels per axis, clamped to the frame.
fn detect_object(
    spec: &SceneSpec,
    obj: &SceneObject,
    frame: usize,
    rng: &mut ChaCha8Rng,
) -> BinaryMask {
    let jitter = spec.noise.boundary_jitter_px;
    let (dx, dy) = if jitter > 0 {
        (
            rng.random_range(-jitter..=jitter),
            rng.random_range(-jitter..=jitter),
        )
    } else {
        (0, 0)
    };
    let (px, py) = obj.position(frame);
    let jx = (px as i64 + dx).clamp(0, (spec.width - obj.size.0) as i64) as usize;
    let jy = (py as i64 + dy).clamp(0, (spec.height - obj.size.1) as i64) as usize;
    BinaryMask::from_fn(spec.width, spec.height, |x, y| {
        x >= jx && x < jx + obj.size.0 && y >= jy && y < jy + obj.size.1
            && obj.covers_local(x - jx, y - jy)
    })
}

/// Writes the full on-disk scene (frames/, flow/, proposals/, gt/,
/// manifest.json) and returns the manifest.
pub fn generate(spec: &SceneSpec, out_dir: &Path) -> Result<Manifest> {
    spec.validate()?;
    let objects = resolve_objects(spec);
    for sub in ["frames", "flow", "proposals", "gt"] {
        fs::create_dir_all(out_dir.join(sub)).map_err(|e| Error::io(out_dir.join(sub), e))?;
    }

    let background = texture_patch(stream_seed(spec.seed, "background"), spec.width, spec.height);
    let mut manifest_frames = Vec::with_capacity(spec.n_frames);

    for t in 0..spec.n_frames {
        let pixels = render_frame(spec, &objects, &background, t);
        pnm::write_pgm(&frame_path(out_dir, "frames", t, "pgm"), spec.width, spec.height, &pixels)?;

        if t + 1 < spec.n_frames {
            let flow = render_flow(spec, &objects, t);
            write_flo(&frame_path(out_dir, "flow", t, "flo"), &flow)?;
        }

        pnm::write_mask(
            &frame_path(out_dir, "gt", t, "pgm"),
            &objects[0].mask_at(t, spec.width, spec.height),
        )?;

        // Detector pass: target first, distractors in order, then at most
        // one false positive. Draw order is fixed so bytes are a pure
        // function of the spec.
        let mut detector_rng =
            ChaCha8Rng::seed_from_u64(stream_seed(spec.seed, &format!("detector/{t}")));
        let mut records = Vec::new();
        let mut proposals = Vec::new();
        for obj in &objects {
            let mask = detect_object(spec, obj, t, &mut detector_rng);
            let score = detector_rng.random_range(spec.noise.score_min..=spec.noise.score_max);
            let bbox = bbox_of(&mask).expect("detections are nonempty");
            records.push(RecordIdentity {
                index: proposals.len(),
                object: obj.id.clone(),
            });
            proposals.push(InstanceProposal {
                mask,
                bbox,
                score,
                category: obj.category,
                source_index: proposals.len(),
            });
        }
        if spec.noise.false_positive_rate > 0.0
            && detector_rng.random_bool(spec.noise.false_positive_rate)
        {
            let fw = detector_rng.random_range(8..=24.min(spec.width));
            let fh = detector_rng.random_range(8..=24.min(spec.height));
            let fx = detector_rng.random_range(0..=spec.width - fw);
            let fy = detector_rng.random_range(0..=spec.height - fh);
            let score = detector_rng.random_range(spec.noise.score_min..=spec.noise.score_max);
            let category = detector_rng.random_range(90..=99);
            let mask = BinaryMask::from_fn(spec.width, spec.height, |x, y| {
                x >= fx && x < fx + fw && y >= fy && y < fy + fh
            });
            let bbox = bbox_of(&mask).expect("false positive box is nonempty");
            records.push(RecordIdentity {
                index: proposals.len(),
                object: "false_positive".to_string(),
            });
            proposals.push(InstanceProposal {
                mask,
                bbox,
                score,
                category,
                source_index: proposals.len(),
            });
        }

        let planted_hard_negatives = records
            .iter()
            .filter(|r| {
                objects
                    .iter()
                    .any(|o| o.id == r.object && o.kind == ObjectKind::StaticDistractor)
            })
            .map(|r| r.index)
            .collect();
        manifest_frames.push(ManifestFrame {
            frame_index: t,
            records,
            planted_hard_negatives,
        });

        serialize_proposals(
            &frame_path(out_dir, "proposals", t, "jsonl"),
            &FrameProposals {
                frame_index: t,
                proposals,
                source: ProposalSource::Instance,
            },
        )?;
    }

    let manifest = Manifest {
        width: spec.width,
        height: spec.height,
        n_frames: spec.n_frames,
        seed: spec.seed,
        objects: objects
            .iter()
            .map(|o| ManifestObject {
                id: o.id.clone(),
                kind: o.kind,
                category: o.category,
            })
            .collect(),
        frames: manifest_frames,
    };
    let manifest_path = out_dir.join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )
    .map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

fn frame_path(root: &Path, sub: &str, index: usize, ext: &str) -> PathBuf {
    root.join(sub).join(format!("{index:05}.{ext}"))
}

/// Precision/recall of hard-negative identification against the planted
/// static distractors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionScore {
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Scores selected hard negatives (record indices per frame) against the
/// manifest. Frames absent from `selected` are not judged.
pub fn score_selection(
    manifest: &Manifest,
    selected: &BTreeMap<usize, Vec<usize>>,
) -> SelectionScore {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&frame_index, picks) in selected {
        let planted: &[usize] = manifest
            .frames
            .iter()
            .find(|f| f.frame_index == frame_index)
            .map(|f| f.planted_hard_negatives.as_slice())
            .unwrap_or(&[]);
        for pick in picks {
            if planted.contains(pick) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        for plant in planted {
            if !picks.contains(plant) {
                fn_ += 1;
            }
        }
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    SelectionScore {
        precision,
        recall,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    }
}

/// The 20-scene suite used to verify hard-negative selection quality:
/// static distractors, one moving target, detector jitter up to 2 px, and
/// false positives on odd scenes.
pub fn standard_distractor_suite() -> Vec<SceneSpec> {
    (0..20)
        .map(|i| {
            let shape = if i % 2 == 0 { Shape::Rect } else { Shape::Ellipse };
            SceneSpec {
                width: 192,
                height: 128,
                n_frames: 8,
                seed: 1000 + i as u64,
                target: TargetSpec {
                    shape,
                    x: 8,
                    y: 10 + (i % 4) * 2,
                    w: 36 + (i % 3) * 4,
                    h: 26 + (i % 2) * 4,
                    vx: 3 + (i % 3) as i64,
                    vy: (i % 2) as i64,
                    texture_seed: 7000 + i as u64,
                    category: 1,
                },
                distractors: vec![
                    DistractorSpec {
                        shape: Shape::Rect,
                        x: 100 + (i % 5) * 6,
                        y: 74,
                        w: 56,
                        h: 40,
                        is_static: true,
                        vx: 0,
                        vy: 0,
                        category: 20 + i as u32,
                        similar_appearance: i % 4 == 0,
                    },
                    DistractorSpec {
                        shape: Shape::Rect,
                        x: 24 + (i % 4) * 4,
                        y: 80,
                        w: 52,
                        h: 38,
                        is_static: true,
                        vx: 0,
                        vy: 0,
                        category: 60 + i as u32,
                        similar_appearance: false,
                    },
                ],
                noise: DetectorNoise {
                    boundary_jitter_px: (i % 3) as i64,
                    score_min: 0.85,
                    score_max: 0.99,
                    false_positive_rate: if i % 2 == 1 { 0.15 } else { 0.0 },
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::read_flo;
    use crate::proposals::parse_proposals;
    use crate::tracklet::GrayFrame;
    use tempfile::tempdir;

    fn small_spec(seed: u64, vx: i64, vy: i64) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 48,
            n_frames: 4,
            seed,
            target: TargetSpec {
                shape: Shape::Rect,
                x: 4,
                y: 6,
                w: 12,
                h: 10,
                vx,
                vy,
                texture_seed: 11,
                category: 1,
            },
            distractors: vec![DistractorSpec {
                shape: Shape::Rect,
                x: 40,
                y: 30,
                w: 16,
                h: 12,
                is_static: true,
                vx: 0,
                vy: 0,
                category: 9,
                similar_appearance: false,
            }],
            noise: DetectorNoise {
                boundary_jitter_px: 1,
                score_min: 0.85,
                score_max: 0.99,
                false_positive_rate: 0.0,
            },
        }
    }

    #[test]
    fn zero_velocity_means_zero_flow() {
        let dir = tempdir().unwrap();
        generate(&small_spec(1, 0, 0), dir.path()).unwrap();
        for t in 0..3 {
            let flow = read_flo(&frame_path(dir.path(), "flow", t, "flo")).unwrap();
            assert!(flow.vectors().iter().all(|&(u, v)| u == 0.0 && v == 0.0));
        }
    }

    #[test]
    fn analytic_flow_marks_target_pixels() {
        let dir = tempdir().unwrap();
        let spec = small_spec(2, 3, 0);
        generate(&spec, dir.path()).unwrap();
        let flow = read_flo(&frame_path(dir.path(), "flow", 0, "flo")).unwrap();
        let gt = pnm::read_mask(&frame_path(dir.path(), "gt", 0, "pgm")).unwrap();
        for y in 0..spec.height {
            for x in 0..spec.width {
                let expected = if gt.get(x, y) { (3.0, 0.0) } else { (0.0, 0.0) };
                assert_eq!(flow.get(x, y), expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn warp_reproduces_next_frame_on_object_pixels() {
        let dir = tempdir().unwrap();
        let spec = small_spec(3, 2, 1);
        generate(&spec, dir.path()).unwrap();
        for t in 0..spec.n_frames - 1 {
            let a = GrayFrame::read_pnm(&frame_path(dir.path(), "frames", t, "pgm")).unwrap();
            let b = GrayFrame::read_pnm(&frame_path(dir.path(), "frames", t + 1, "pgm")).unwrap();
            let flow = read_flo(&frame_path(dir.path(), "flow", t, "flo")).unwrap();
            for y in 0..spec.height {
                for x in 0..spec.width {
                    let (u, v) = flow.get(x, y);
                    if u != 0.0 || v != 0.0 {
                        let tx = (x as i64 + u as i64) as usize;
                        let ty = (y as i64 + v as i64) as usize;
                        assert_eq!(b.get(tx, ty), a.get(x, y), "warp mismatch at ({x},{y})");
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        let spec = small_spec(4, 3, 0);
        generate(&spec, dir_a.path()).unwrap();
        generate(&spec, dir_b.path()).unwrap();
        let mut checked = 0;
        for sub in ["frames", "flow", "proposals", "gt"] {
            let mut entries: Vec<_> = fs::read_dir(dir_a.path().join(sub))
                .unwrap()
                .map(|e| e.unwrap().file_name())
                .collect();
            entries.sort();
            for name in entries {
                let a = fs::read(dir_a.path().join(sub).join(&name)).unwrap();
                let b = fs::read(dir_b.path().join(sub).join(&name)).unwrap();
                assert_eq!(a, b, "{sub}/{name:?} differs");
                checked += 1;
            }
        }
        assert!(checked > 10);
        let ma = fs::read(dir_a.path().join("manifest.json")).unwrap();
        let mb = fs::read(dir_b.path().join("manifest.json")).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn different_seeds_differ() {
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        generate(&small_spec(5, 3, 0), dir_a.path()).unwrap();
        generate(&small_spec(6, 3, 0), dir_b.path()).unwrap();
        let a = fs::read(frame_path(dir_a.path(), "frames", 0, "pgm")).unwrap();
        let b = fs::read(frame_path(dir_b.path(), "frames", 0, "pgm")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn proposals_parse_and_identify_objects() {
        let dir = tempdir().unwrap();
        let spec = small_spec(7, 3, 0);
        let manifest = generate(&spec, dir.path()).unwrap();
        let fp = parse_proposals(&frame_path(dir.path(), "proposals", 0, "jsonl"), 0).unwrap();
        assert_eq!(fp.proposals.len(), 2);
        assert_eq!(manifest.frames[0].records.len(), 2);
        assert_eq!(manifest.frames[0].records[0].object, "target");
        assert_eq!(manifest.frames[0].records[1].object, "distractor_0");
        assert_eq!(manifest.frames[0].planted_hard_negatives, vec![1]);
        // Jitter keeps the reported box within 1 px of the true box.
        let true_box = manifest_box(&spec, 0);
        let got = fp.proposals[0].bbox;
        assert!((got.x as i64 - true_box.0 as i64).abs() <= 1);
        assert!((got.y as i64 - true_box.1 as i64).abs() <= 1);
        assert_eq!((got.w, got.h), (spec.target.w, spec.target.h));
    }

    fn manifest_box(spec: &SceneSpec, frame: usize) -> (usize, usize) {
        (
            (spec.target.x as i64 + frame as i64 * spec.target.vx) as usize,
            (spec.target.y as i64 + frame as i64 * spec.target.vy) as usize,
        )
    }

    #[test]
    fn ellipse_stays_inside_its_box_and_is_fat() {
        let mask = BinaryMask::from_fn(20, 14, |x, y| shape_covers(Shape::Ellipse, 20, 14, x, y));
        assert!(mask.get(10, 7));
        assert!(!mask.get(0, 0));
        assert!(mask.area() > 20 * 14 / 2);
    }

    #[test]
    fn score_selection_perfect_and_empty() {
        let dir = tempdir().unwrap();
        let manifest = generate(&small_spec(8, 3, 0), dir.path()).unwrap();
        let mut perfect = BTreeMap::new();
        for f in &manifest.frames[1..] {
            perfect.insert(f.frame_index, f.planted_hard_negatives.clone());
        }
        let s = score_selection(&manifest, &perfect);
        assert_eq!(s.precision, 1.0);
        assert_eq!(s.recall, 1.0);

        let mut empty = BTreeMap::new();
        for f in &manifest.frames[1..] {
            empty.insert(f.frame_index, Vec::new());
        }
        let s = score_selection(&manifest, &empty);
        assert_eq!(s.recall, 0.0);
        assert_eq!(s.precision, 1.0); // nothing selected, nothing wrong
    }

    #[test]
    fn suite_specs_validate() {
        let suite = standard_distractor_suite();
        assert_eq!(suite.len(), 20);
        for spec in &suite {
            spec.validate().unwrap();
        }
        assert!(suite.iter().any(|s| s.noise.boundary_jitter_px == 2));
        assert!(suite.iter().any(|s| s.noise.false_positive_rate > 0.0));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = small_spec(9, 2, 1);
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back = SceneSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn validation_rejects_escaping_target() {
        let mut spec = small_spec(10, 30, 0);
        spec.n_frames = 4; // 4 + 3*30 + 12 > 64
        assert!(spec.validate().is_err());

        let mut bad = small_spec(11, 1, 0);
        bad.distractors[0].is_static = true;
        bad.distractors[0].vx = 2;
        assert!(bad.validate().is_err());
    }
}
