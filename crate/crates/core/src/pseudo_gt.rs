//! First-frame pseudo ground truth: the union of instance proposals whose
//! motion-overlap ratio clears the threshold.

use crate::error::{Error, Result};
use crate::flow::MotionMask;
use crate::mask::{overlap_ratio, union_all, BinaryMask};
use crate::proposals::FrameProposals;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoGroundTruth {
    pub mask: BinaryMask,
    /// Ordinals into the proposal list handed to [`generate_pseudo_gt`],
    /// sorted ascending.
    pub selected_indices: Vec<usize>,
    pub threshold_used: f64,
}

/// Unions exactly those proposals whose overlap with the motion mask,
/// normalized by proposal area, strictly exceeds `threshold`.
///
/// The strict inequality is deliberate: a ratio exactly equal to the
/// threshold is excluded. An empty selection is a hard failure because the
/// pipeline assumes a primary moving object exists.
pub fn generate_pseudo_gt(
    fp: &FrameProposals,
    motion: &MotionMask,
    threshold: f64,
) -> Result<PseudoGroundTruth> {
    assert!(
        (0.0..1.0).contains(&threshold),
        "pseudo-gt threshold must be in [0, 1)"
    );
    let mut selected_indices = Vec::new();
    let mut selected_masks = Vec::new();
    for (i, p) in fp.proposals.iter().enumerate() {
        let ratio = overlap_ratio(&p.mask, &motion.mask)?;
        if ratio > threshold {
            selected_indices.push(i);
            selected_masks.push(p.mask.clone());
        }
    }
    if selected_indices.is_empty() {
        return Err(Error::NoForegroundFound {
            frame: fp.frame_index,
        });
    }
    Ok(PseudoGroundTruth {
        mask: union_all(&selected_masks)?,
        selected_indices,
        threshold_used: threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{bbox_of, BinaryMask};
    use crate::proposals::{InstanceProposal, ProposalSource};

    const W: usize = 12;
    const H: usize = 10;

    fn motion(mask: BinaryMask) -> MotionMask {
        MotionMask {
            mask,
            threshold_used: 0.5,
            frame_index: 0,
        }
    }

    fn proposal(mask: BinaryMask, idx: usize) -> InstanceProposal {
        let bbox = bbox_of(&mask).unwrap();
        InstanceProposal {
            mask,
            bbox,
            score: 0.9,
            category: 1,
            source_index: idx,
        }
    }

    fn frame(masks: Vec<BinaryMask>) -> FrameProposals {
        FrameProposals {
            frame_index: 0,
            proposals: masks
                .into_iter()
                .enumerate()
                .map(|(i, m)| proposal(m, i))
                .collect(),
            source: ProposalSource::Instance,
        }
    }

    fn rect(x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(W, H, |x, y| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h)
    }

    #[test]
    fn fully_covered_proposal_selected() {
        let fp = frame(vec![rect(2, 2, 3, 3)]);
        let m = motion(rect(0, 0, 8, 8));
        let got = generate_pseudo_gt(&fp, &m, 0.5).unwrap();
        assert_eq!(got.selected_indices, vec![0]);
        assert_eq!(got.mask, fp.proposals[0].mask);
    }

    #[test]
    fn disjoint_proposal_is_no_foreground() {
        let fp = frame(vec![rect(0, 0, 2, 2)]);
        let m = motion(rect(6, 6, 3, 3));
        let err = generate_pseudo_gt(&fp, &m, 0.5).unwrap_err();
        assert!(matches!(err, Error::NoForegroundFound { frame: 0 }));
    }

    #[test]
    fn ratio_test_selects_only_passing_proposals() {
        // Proposal 0: 10 px with 6 in motion (0.6); proposal 1: 10 px with
        // 4 in motion (0.4). Brute-force ratios computed by construction.
        let p0 = rect(0, 0, 10, 1);
        let p1 = rect(0, 2, 10, 1);
        let mut motion_bits = BinaryMask::new(W, H);
        for x in 0..6 {
            motion_bits.set(x, 0, true);
        }
        for x in 0..4 {
            motion_bits.set(x, 2, true);
        }
        let fp = frame(vec![p0.clone(), p1]);
        let got = generate_pseudo_gt(&fp, &motion(motion_bits), 0.5).unwrap();
        assert_eq!(got.selected_indices, vec![0]);
        assert_eq!(got.mask, p0);
    }

    #[test]
    fn boundary_ratio_is_excluded() {
        // Exactly at the threshold: 5 of 10 pixels covered, T = 0.5.
        let p = rect(0, 0, 10, 1);
        let mut m = BinaryMask::new(W, H);
        for x in 0..5 {
            m.set(x, 0, true);
        }
        let fp = frame(vec![p]);
        assert!(generate_pseudo_gt(&fp, &motion(m), 0.5).is_err());
    }

    #[test]
    fn raising_threshold_never_adds() {
        let fp = frame(vec![rect(0, 0, 4, 2), rect(0, 4, 4, 4), rect(8, 8, 2, 2)]);
        let m = motion(rect(0, 0, 6, 7));
        let mut prev: Option<Vec<usize>> = None;
        for t in [0.0, 0.3, 0.5, 0.9] {
            let selected = generate_pseudo_gt(&fp, &m, t)
                .map(|g| g.selected_indices)
                .unwrap_or_default();
            if let Some(p) = prev {
                assert!(selected.iter().all(|i| p.contains(i)));
                assert!(selected.len() <= p.len());
            }
            prev = Some(selected);
        }
    }

    #[test]
    fn selection_is_permutation_invariant() {
        let a = rect(0, 0, 4, 4);
        let b = rect(5, 0, 4, 4);
        let m = motion(rect(0, 0, 12, 5));
        let fwd = generate_pseudo_gt(&frame(vec![a.clone(), b.clone()]), &m, 0.3).unwrap();
        let rev = generate_pseudo_gt(&frame(vec![b, a]), &m, 0.3).unwrap();
        assert_eq!(fwd.mask, rev.mask);
        assert_eq!(fwd.selected_indices, vec![0, 1]);
        assert_eq!(rev.selected_indices, vec![0, 1]);
    }

    #[test]
    fn zero_threshold_with_touching_motion_selects_all() {
        let masks = vec![rect(0, 0, 3, 3), rect(4, 4, 3, 3), rect(8, 0, 3, 3)];
        let fp = frame(masks.clone());
        let m = motion(BinaryMask::from_fn(W, H, |_, _| true));
        let got = generate_pseudo_gt(&fp, &m, 0.0).unwrap();
        assert_eq!(got.selected_indices, vec![0, 1, 2]);
        assert_eq!(got.mask, crate::mask::union_all(&masks).unwrap());
    }
}
