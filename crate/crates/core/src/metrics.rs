//! Moment-retrieval metrics: Recall@1 and detection-style mAP at temporal IoU
//! thresholds, with the same matching and interpolation rules as the
//! QVHighlights evaluator.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{max_iou, TimeInterval};
use crate::record::{PredictionRecord, QueryRecord, ScoredMoment};

/// IoU grid averaged into the headline "avg mAP".
pub const MAP_IOU_THRESHOLDS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
/// Predictions per query considered by the evaluator.
pub const DEFAULT_MAX_PREDS: usize = 10;

const IDX_0_5: usize = 0;
const IDX_0_75: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthBucket {
    Short,
    Medium,
    Long,
}

impl LengthBucket {
    pub const ALL: [LengthBucket; 3] = [LengthBucket::Short, LengthBucket::Medium, LengthBucket::Long];
}

/// Short below 10 s, long above 30 s, medium in between (both ends inclusive).
pub fn bucketize(window: &TimeInterval) -> LengthBucket {
    let l = window.length();
    if l < 10.0 {
        LengthBucket::Short
    } else if l <= 30.0 {
        LengthBucket::Medium
    } else {
        LengthBucket::Long
    }
}

fn check_qid(pred: &PredictionRecord, gt: &QueryRecord) -> Result<()> {
    if pred.qid != gt.qid {
        return Err(Error::QidMismatch { pred: pred.qid, gt: gt.qid });
    }
    Ok(())
}

fn recall_hit(moments: &[ScoredMoment], gts: &[TimeInterval], iou_thresh: f64) -> f64 {
    match moments.first() {
        Some(top) if max_iou(&top.interval, gts) >= iou_thresh => 1.0,
        _ => 0.0,
    }
}

/// 1 when the top-ranked prediction reaches `iou_thresh` with some
/// ground-truth window, else 0 (also for an empty prediction).
pub fn recall_at_1(pred: &PredictionRecord, gt: &QueryRecord, iou_thresh: f64) -> Result<f64> {
    check_qid(pred, gt)?;
    Ok(recall_hit(pred.moments(), gt.gt_windows(), iou_thresh))
}

/// Detection-style average precision of one ranked list at one threshold.
pub fn average_precision(pred: &PredictionRecord, gt: &QueryRecord, iou_thresh: f64) -> Result<f64> {
    check_qid(pred, gt)?;
    Ok(ap_at_thresholds(pred.moments(), gt.gt_windows(), &[iou_thresh])[0])
}

/// Average precision of `moments` (already in rank order) for every threshold.
///
/// Each prediction claims the highest-IoU ground-truth window not yet claimed
/// at that threshold; if the best remaining IoU is below the threshold it is a
/// false positive. AP is the area under the max-envelope precision/recall
/// curve with recall measured against all ground-truth windows.
pub fn ap_at_thresholds(moments: &[ScoredMoment], gts: &[TimeInterval], thresholds: &[f64]) -> Vec<f64> {
    let nt = thresholds.len();
    if moments.is_empty() || gts.is_empty() {
        return vec![0.0; nt];
    }
    let mut claimed = vec![vec![false; gts.len()]; nt];
    let mut tp = vec![vec![0.0f64; moments.len()]; nt];
    let mut fp = vec![vec![0.0f64; moments.len()]; nt];
    let mut order: Vec<usize> = (0..gts.len()).collect();

    for (idx, m) in moments.iter().enumerate() {
        let ious: Vec<f64> = gts.iter().map(|g| m.interval.iou(g)).collect();
        // Descending IoU; equal IoUs visit the later window first, as a
        // reversed ascending argsort does.
        order.sort_by(|&a, &b| ious[b].total_cmp(&ious[a]).then(b.cmp(&a)));
        for (t, &thresh) in thresholds.iter().enumerate() {
            let mut hit = false;
            for &j in &order {
                if ious[j] < thresh {
                    break;
                }
                if claimed[t][j] {
                    continue;
                }
                claimed[t][j] = true;
                hit = true;
                break;
            }
            if hit {
                tp[t][idx] = 1.0;
            } else {
                fp[t][idx] = 1.0;
            }
        }
    }

    let num_positive = gts.len() as f64;
    (0..nt)
        .map(|t| {
            let mut precision = Vec::with_capacity(moments.len());
            let mut recall = Vec::with_capacity(moments.len());
            let (mut tp_sum, mut fp_sum) = (0.0, 0.0);
            for i in 0..moments.len() {
                tp_sum += tp[t][i];
                fp_sum += fp[t][i];
                recall.push(tp_sum / num_positive);
                precision.push(tp_sum / (tp_sum + fp_sum));
            }
            interpolated_precision_recall(&precision, &recall)
        })
        .collect()
}

/// Area under the precision/recall curve after replacing each precision by
/// the maximum precision at any higher recall.
fn interpolated_precision_recall(precision: &[f64], recall: &[f64]) -> f64 {
    let mut mprec = Vec::with_capacity(precision.len() + 2);
    mprec.push(0.0);
    mprec.extend_from_slice(precision);
    mprec.push(0.0);
    let mut mrec = Vec::with_capacity(recall.len() + 2);
    mrec.push(0.0);
    mrec.extend_from_slice(recall);
    mrec.push(1.0);

    for i in (0..mprec.len() - 1).rev() {
        mprec[i] = mprec[i].max(mprec[i + 1]);
    }
    (1..mrec.len()).filter(|&i| mrec[i] != mrec[i - 1]).map(|i| (mrec[i] - mrec[i - 1]) * mprec[i]).sum()
}

/// Average mAP per ground-truth length bucket, in percent. A bucket with no
/// query holding a window of that length is `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketedMap {
    pub short: Option<f64>,
    pub medium: Option<f64>,
    pub long: Option<f64>,
    /// Queries contributing to each bucket: short, medium, long.
    pub counts: [usize; 3],
}

impl BucketedMap {
    pub fn get(&self, bucket: LengthBucket) -> Option<f64> {
        match bucket {
            LengthBucket::Short => self.short,
            LengthBucket::Medium => self.medium,
            LengthBucket::Long => self.long,
        }
    }
}

/// Aggregate metrics, all in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub r1_at_0_5: f64,
    pub r1_at_0_7: f64,
    pub map_at_0_5: f64,
    pub map_at_0_75: f64,
    pub map_avg: f64,
    /// mAP at each of [`MAP_IOU_THRESHOLDS`].
    pub map_by_threshold: Vec<f64>,
    /// Bucketed scores restrict ground-truth windows only; predictions are
    /// left as they are.
    pub bucketed: BucketedMap,
    pub num_queries: usize,
    pub max_preds: usize,
}

impl EvalReport {
    /// The five headline values: R1@0.5, R1@0.7, mAP@0.5, mAP@0.75, avg mAP.
    pub fn headline(&self) -> [f64; 5] {
        [self.r1_at_0_5, self.r1_at_0_7, self.map_at_0_5, self.map_at_0_75, self.map_avg]
    }
}

#[derive(Debug, Clone)]
struct QueryScore {
    r1: [f64; 2],
    ap: Vec<f64>,
}

fn score_query(moments: &[ScoredMoment], gts: &[TimeInterval]) -> QueryScore {
    QueryScore {
        r1: [recall_hit(moments, gts, 0.5), recall_hit(moments, gts, 0.7)],
        ap: ap_at_thresholds(moments, gts, &MAP_IOU_THRESHOLDS),
    }
}

fn mean_ap_by_threshold(scores: &[&QueryScore]) -> Vec<f64> {
    let n = scores.len() as f64;
    (0..MAP_IOU_THRESHOLDS.len()).map(|t| scores.iter().map(|s| s.ap[t]).sum::<f64>() / n).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Evaluates with the default cap of [`DEFAULT_MAX_PREDS`] predictions per query.
pub fn evaluate(preds: &[PredictionRecord], gts: &[QueryRecord]) -> Result<EvalReport> {
    evaluate_with_cap(preds, gts, DEFAULT_MAX_PREDS)
}

/// Evaluates `preds` against every query in `gts`.
///
/// Queries without a prediction record count as empty predictions; records
/// for qids absent from `gts` are ignored, so evaluating a subset of queries
/// only uses that subset's denominators.
pub fn evaluate_with_cap(preds: &[PredictionRecord], gts: &[QueryRecord], max_preds: usize) -> Result<EvalReport> {
    if gts.is_empty() {
        return Err(Error::Empty("ground-truth set"));
    }
    if max_preds == 0 {
        return Err(Error::InvalidArgument("max_preds must be >= 1".into()));
    }
    let mut by_qid: HashMap<u64, &PredictionRecord> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_qid.insert(p.qid, p).is_some() {
            return Err(Error::DuplicatePrediction(p.qid));
        }
    }

    let capped: Vec<&[ScoredMoment]> = gts
        .iter()
        .map(|gt| {
            let moments = by_qid.get(&gt.qid).map(|p| p.moments()).unwrap_or(&[]);
            &moments[..moments.len().min(max_preds)]
        })
        .collect();

    let full: Vec<QueryScore> =
        gts.par_iter().zip(capped.par_iter()).map(|(gt, m)| score_query(m, gt.gt_windows())).collect();

    let refs: Vec<&QueryScore> = full.iter().collect();
    let map_by_threshold = mean_ap_by_threshold(&refs);
    let n = gts.len() as f64;
    let r1_05 = full.iter().map(|s| s.r1[0]).sum::<f64>() / n;
    let r1_07 = full.iter().map(|s| s.r1[1]).sum::<f64>() / n;

    let mut bucketed = BucketedMap::default();
    for (k, bucket) in LengthBucket::ALL.into_iter().enumerate() {
        let scores: Vec<QueryScore> = gts
            .par_iter()
            .zip(capped.par_iter())
            .filter_map(|(gt, m)| {
                let windows: Vec<TimeInterval> =
                    gt.gt_windows().iter().copied().filter(|w| bucketize(w) == bucket).collect();
                (!windows.is_empty()).then(|| score_query(m, &windows))
            })
            .collect();
        bucketed.counts[k] = scores.len();
        if !scores.is_empty() {
            let refs: Vec<&QueryScore> = scores.iter().collect();
            let value = Some(100.0 * mean(&mean_ap_by_threshold(&refs)));
            match bucket {
                LengthBucket::Short => bucketed.short = value,
                LengthBucket::Medium => bucketed.medium = value,
                LengthBucket::Long => bucketed.long = value,
            }
        }
    }

    Ok(EvalReport {
        r1_at_0_5: 100.0 * r1_05,
        r1_at_0_7: 100.0 * r1_07,
        map_at_0_5: 100.0 * map_by_threshold[IDX_0_5],
        map_at_0_75: 100.0 * map_by_threshold[IDX_0_75],
        map_avg: 100.0 * mean(&map_by_threshold),
        map_by_threshold: map_by_threshold.iter().map(|v| 100.0 * v).collect(),
        bucketed,
        num_queries: gts.len(),
        max_preds,
    })
}
