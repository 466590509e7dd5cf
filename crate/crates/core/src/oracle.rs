//! Oracular bounds for shot-based proposals.
//!
//! A "perfect" matcher that can see the ground truth scores each segment by
//! its best IoU with any ground-truth window. The post-processing variant also
//! merges adjacent segments whenever the merge improves that IoU. These are
//! bounds rather than upper bounds: other oracle scores could do better.

use crate::error::{Error, Result};
use crate::interval::{max_iou, TimeInterval};
use crate::postprocess::adjacent;
use crate::record::{QueryRecord, ScoredMoment};

/// Scores each segment by its highest IoU with any ground-truth window.
pub fn oracle_scores(segments: &[TimeInterval], gt: &QueryRecord) -> Result<Vec<ScoredMoment>> {
    if gt.gt_windows().is_empty() {
        return Err(Error::Empty("relevant_windows"));
    }
    segments.iter().map(|s| ScoredMoment::new(*s, max_iou(s, gt.gt_windows()))).collect()
}

fn check_partition(segments: &[TimeInterval]) -> Result<()> {
    for w in segments.windows(2) {
        if !adjacent(w[0].end(), w[1].start()) {
            return Err(Error::NotPartition { prev_end: w[0].end(), start: w[1].start() });
        }
    }
    Ok(())
}

/// Greedy single left-to-right merge pass over a partition.
///
/// The accumulated segment absorbs the next segment only when the union's IoU
/// is strictly higher than both the accumulated segment's and the next
/// segment's own IoU; otherwise the accumulated segment is emitted and the
/// next one starts a new accumulation. Every emitted segment therefore scores
/// at least as high as each of its parts.
pub fn oracle_merge(segments: &[TimeInterval], gt: &QueryRecord) -> Result<Vec<ScoredMoment>> {
    let windows = gt.gt_windows();
    if windows.is_empty() {
        return Err(Error::Empty("relevant_windows"));
    }
    check_partition(segments)?;
    let Some((first, rest)) = segments.split_first() else {
        return Ok(Vec::new());
    };

    let mut out = Vec::new();
    let mut cur = *first;
    let mut cur_iou = max_iou(&cur, windows);
    for seg in rest {
        let next_iou = max_iou(seg, windows);
        let union = cur.hull(seg);
        let union_iou = max_iou(&union, windows);
        if union_iou > cur_iou && union_iou > next_iou {
            cur = union;
            cur_iou = union_iou;
        } else {
            out.push(ScoredMoment::new(cur, cur_iou)?);
            cur = *seg;
            cur_iou = next_iou;
        }
    }
    out.push(ScoredMoment::new(cur, cur_iou)?);
    Ok(out)
}
