//! Ingestion of per-frame detector outputs, the category-agnostic mapping,
//! and the instance-vs-semantic source-selection policy.
//!
//! Proposal files carry one JSON object per line:
//! `{"category": int, "score": float, "bbox": [x,y,w,h], "rle": [int,...],
//!   "width": int, "height": int}` with the run-length codec from
//! [`crate::mask`]. Detector boxes may be loose; they are re-tightened to
//! the mask's bounding box on load.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{bbox_of, rle_decode, rle_encode, BBox, BinaryMask};

/// Category id every proposal receives under the class-agnostic mapping.
pub const FOREGROUND_CATEGORY: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalSource {
    Instance,
    Semantic,
}

/// One detector output: mask, tight box, confidence, and category.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceProposal {
    pub mask: BinaryMask,
    pub bbox: BBox,
    pub score: f64,
    pub category: u32,
    /// Zero-based record index in the source file; survives filtering so
    /// downstream artifacts can name proposals stably.
    pub source_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameProposals {
    pub frame_index: usize,
    pub proposals: Vec<InstanceProposal>,
    pub source: ProposalSource,
}

#[derive(Serialize, Deserialize)]
struct ProposalRecord {
    category: u32,
    score: f64,
    bbox: [usize; 4],
    rle: Vec<u32>,
    width: usize,
    height: usize,
}

/// Loads a `.jsonl` proposal file. Boxes are re-tightened to the mask.
pub fn parse_proposals(path: &Path, frame_index: usize) -> Result<FrameProposals> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut proposals = Vec::new();
    let mut dims: Option<(usize, usize)> = None;
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ProposalRecord = serde_json::from_str(line).map_err(|e| {
            Error::format(format!(
                "{}:{}: malformed proposal record: {e}",
                path.display(),
                line_no + 1
            ))
        })?;
        if !(0.0..=1.0).contains(&record.score) {
            return Err(Error::format(format!(
                "{}:{}: score {} out of [0,1]",
                path.display(),
                line_no + 1,
                record.score
            )));
        }
        let mask = rle_decode(&record.rle, record.width, record.height).map_err(|e| {
            Error::format(format!("{}:{}: {e}", path.display(), line_no + 1))
        })?;
        if let Some(d) = dims {
            if d != (record.width, record.height) {
                return Err(Error::format(format!(
                    "{}:{}: proposal dimensions {}x{} differ from {}x{}",
                    path.display(),
                    line_no + 1,
                    record.width,
                    record.height,
                    d.0,
                    d.1
                )));
            }
        } else {
            dims = Some((record.width, record.height));
        }
        let bbox = bbox_of(&mask).map_err(|_| {
            Error::format(format!(
                "{}:{}: proposal mask is empty",
                path.display(),
                line_no + 1
            ))
        })?;
        proposals.push(InstanceProposal {
            mask,
            bbox,
            score: record.score,
            category: record.category,
            source_index: proposals.len(),
        });
    }
    Ok(FrameProposals {
        frame_index,
        proposals,
        source: ProposalSource::Instance,
    })
}

/// Writes proposals in the interchange format, one JSON object per line.
pub fn serialize_proposals(path: &Path, fp: &FrameProposals) -> Result<()> {
    let mut out = String::new();
    for p in &fp.proposals {
        let record = ProposalRecord {
            category: p.category,
            score: p.score,
            bbox: [p.bbox.x, p.bbox.y, p.bbox.w, p.bbox.h],
            rle: rle_encode(&p.mask),
            width: p.mask.width(),
            height: p.mask.height(),
        };
        out.push_str(&serde_json::to_string(&record).expect("record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Keeps proposals with `score >= score_min`, preserving order.
pub fn filter_by_score(fp: &FrameProposals, score_min: f64) -> FrameProposals {
    FrameProposals {
        frame_index: fp.frame_index,
        proposals: fp
            .proposals
            .iter()
            .filter(|p| p.score >= score_min)
            .cloned()
            .collect(),
        source: fp.source,
    }
}

/// Chooses the pseudo-ground-truth mask source for a sequence.
///
/// Semantic masks win only when they exist and no category id appears more
/// than once among the (already score-filtered) first-frame instances;
/// duplicated categories cannot be separated by a semantic labeling.
pub fn select_source(
    first_frame_instances: &FrameProposals,
    semantic_available: bool,
) -> ProposalSource {
    if !semantic_available {
        return ProposalSource::Instance;
    }
    let mut seen = HashSet::new();
    for p in &first_frame_instances.proposals {
        if !seen.insert(p.category) {
            return ProposalSource::Instance;
        }
    }
    ProposalSource::Semantic
}

/// Replaces every category id with the single foreground id; idempotent.
pub fn to_class_agnostic(fp: &FrameProposals) -> FrameProposals {
    FrameProposals {
        frame_index: fp.frame_index,
        proposals: fp
            .proposals
            .iter()
            .map(|p| InstanceProposal {
                category: FOREGROUND_CATEGORY,
                ..p.clone()
            })
            .collect(),
        source: fp.source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn proposal(score: f64, category: u32, w: usize, h: usize) -> InstanceProposal {
        let mask = BinaryMask::from_fn(w, h, |x, y| x < 2 && y < 2);
        let bbox = bbox_of(&mask).unwrap();
        InstanceProposal {
            mask,
            bbox,
            score,
            category,
            source_index: 0,
        }
    }

    fn frame(proposals: Vec<InstanceProposal>) -> FrameProposals {
        FrameProposals {
            frame_index: 0,
            proposals,
            source: ProposalSource::Instance,
        }
    }

    #[test]
    fn parse_empty_file() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        fs::write(&path, "").unwrap();
        let fp = parse_proposals(&path, 3).unwrap();
        assert_eq!(fp.frame_index, 3);
        assert!(fp.proposals.is_empty());
    }

    #[test]
    fn parse_full_frame_proposal() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        fs::write(
            &path,
            r#"{"category": 5, "score": 0.9, "bbox": [0,0,4,3], "rle": [0,12], "width": 4, "height": 3}"#,
        )
        .unwrap();
        let fp = parse_proposals(&path, 0).unwrap();
        assert_eq!(fp.proposals.len(), 1);
        let p = &fp.proposals[0];
        assert_eq!(p.bbox, BBox::new(0, 0, 4, 3));
        assert_eq!(p.score, 0.9);
        assert_eq!(p.mask.area(), 12);
    }

    #[test]
    fn parse_rejects_rle_sum_mismatch() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        fs::write(
            &path,
            r#"{"category": 1, "score": 0.5, "bbox": [0,0,2,2], "rle": [0,3], "width": 2, "height": 2}"#,
        )
        .unwrap();
        assert!(parse_proposals(&path, 0).is_err());
    }

    #[test]
    fn parse_rejects_out_of_range_score() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        fs::write(
            &path,
            r#"{"category": 1, "score": 1.5, "bbox": [0,0,2,2], "rle": [0,4], "width": 2, "height": 2}"#,
        )
        .unwrap();
        assert!(parse_proposals(&path, 0).is_err());
    }

    #[test]
    fn parse_retightens_loose_boxes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        // Mask is the left column of a 2x2 frame, but the detector box
        // claims the whole frame.
        fs::write(
            &path,
            r#"{"category": 1, "score": 0.5, "bbox": [0,0,2,2], "rle": [0,2,2], "width": 2, "height": 2}"#,
        )
        .unwrap();
        let fp = parse_proposals(&path, 0).unwrap();
        assert_eq!(fp.proposals[0].bbox, BBox::new(0, 0, 1, 2));
    }

    #[test]
    fn round_trip_preserves_proposals() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("00000.jsonl");
        let mut fp = frame(vec![proposal(0.9, 3, 5, 4), proposal(0.35, 17, 5, 4)]);
        for (i, p) in fp.proposals.iter_mut().enumerate() {
            p.source_index = i;
        }
        serialize_proposals(&path, &fp).unwrap();
        let back = parse_proposals(&path, 0).unwrap();
        assert_eq!(back.proposals.len(), 2);
        for (a, b) in fp.proposals.iter().zip(&back.proposals) {
            assert_eq!(a.mask, b.mask);
            assert_eq!(a.score, b.score);
            assert_eq!(a.category, b.category);
            assert_eq!(a.source_index, b.source_index);
        }
    }

    #[test]
    fn filter_keeps_scores_at_or_above_min() {
        let fp = frame(vec![
            proposal(0.9, 1, 3, 3),
            proposal(0.79, 1, 3, 3),
            proposal(0.8, 1, 3, 3),
        ]);
        let kept = filter_by_score(&fp, 0.8);
        let scores: Vec<f64> = kept.proposals.iter().map(|p| p.score).collect();
        assert_eq!(scores, vec![0.9, 0.8]);

        assert_eq!(filter_by_score(&fp, 0.0).proposals.len(), 3);
        let only_perfect = filter_by_score(&frame(vec![proposal(1.0, 1, 3, 3), proposal(0.99, 1, 3, 3)]), 1.0);
        assert_eq!(only_perfect.proposals.len(), 1);
    }

    #[test]
    fn filter_is_idempotent_and_never_grows() {
        let fp = frame(vec![proposal(0.9, 1, 3, 3), proposal(0.4, 2, 3, 3)]);
        let once = filter_by_score(&fp, 0.5);
        let twice = filter_by_score(&once, 0.5);
        assert!(once.proposals.len() <= fp.proposals.len());
        assert_eq!(once, twice);
    }

    #[test]
    fn source_selection_policy() {
        let distinct = frame(vec![proposal(0.9, 1, 3, 3), proposal(0.9, 2, 3, 3)]);
        assert_eq!(select_source(&distinct, true), ProposalSource::Semantic);

        let duplicated = frame(vec![proposal(0.9, 1, 3, 3), proposal(0.9, 1, 3, 3)]);
        assert_eq!(select_source(&duplicated, true), ProposalSource::Instance);

        assert_eq!(select_source(&distinct, false), ProposalSource::Instance);
    }

    #[test]
    fn class_agnostic_mapping() {
        let fp = frame(vec![proposal(0.9, 3, 3, 3), proposal(0.9, 17, 3, 3)]);
        let mapped = to_class_agnostic(&fp);
        assert!(mapped
            .proposals
            .iter()
            .all(|p| p.category == FOREGROUND_CATEGORY));
        assert_eq!(to_class_agnostic(&mapped), mapped);

        let empty = frame(vec![]);
        assert!(to_class_agnostic(&empty).proposals.is_empty());
    }
}
