//! Dataset examples, scored moments and ranked predictions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::TimeInterval;

/// Slack allowed between a ground-truth window end and the video duration.
pub const WINDOW_SLACK_S: f64 = 0.5;

/// An interval with a query-similarity score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredMoment {
    pub interval: TimeInterval,
    score: f64,
}

impl ScoredMoment {
    pub fn new(interval: TimeInterval, score: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&score) {
            Ok(Self { interval, score })
        } else {
            Err(Error::ScoreOutOfRange(score))
        }
    }

    #[inline]
    pub fn score(&self) -> f64 {
        self.score
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.interval.start()
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.interval.end()
    }
}

/// Ranking order: score descending, then earlier start, then earlier end.
pub fn rank_order(a: &ScoredMoment, b: &ScoredMoment) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.start().total_cmp(&b.start()))
        .then_with(|| a.end().total_cmp(&b.end()))
}

/// Temporal order: earlier start first, then earlier end.
pub fn temporal_order(a: &ScoredMoment, b: &ScoredMoment) -> Ordering {
    a.start().total_cmp(&b.start()).then_with(|| a.end().total_cmp(&b.end()))
}

/// One benchmark example: a query against a video with its ground-truth windows.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub qid: u64,
    pub vid: String,
    pub query: String,
    pub duration_s: f64,
    gt_windows: Vec<TimeInterval>,
}

impl QueryRecord {
    pub fn new(
        qid: u64,
        vid: impl Into<String>,
        query: impl Into<String>,
        duration_s: f64,
        gt_windows: Vec<TimeInterval>,
    ) -> Result<Self> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(Error::InvalidArgument(format!("duration must be > 0, got {duration_s}")));
        }
        if gt_windows.is_empty() {
            return Err(Error::Empty("relevant_windows"));
        }
        if let Some(w) = gt_windows.iter().find(|w| w.end() > duration_s + WINDOW_SLACK_S) {
            return Err(Error::OutOfVideo { start: w.start(), end: w.end(), duration: duration_s });
        }
        Ok(Self { qid, vid: vid.into(), query: query.into(), duration_s, gt_windows })
    }

    pub fn gt_windows(&self) -> &[TimeInterval] {
        &self.gt_windows
    }

    /// Copy of this record keeping only the windows accepted by `keep`, or `None`
    /// when no window survives.
    pub fn restricted(&self, keep: impl Fn(&TimeInterval) -> bool) -> Option<QueryRecord> {
        let windows: Vec<_> = self.gt_windows.iter().copied().filter(|w| keep(w)).collect();
        if windows.is_empty() {
            None
        } else {
            Some(QueryRecord { gt_windows: windows, ..self.clone() })
        }
    }
}

/// Ranked predictions for one query, kept in [`rank_order`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub qid: u64,
    pub vid: String,
    moments: Vec<ScoredMoment>,
}

impl PredictionRecord {
    /// Builds a record, sorting `moments` into ranking order.
    pub fn new(qid: u64, vid: impl Into<String>, mut moments: Vec<ScoredMoment>) -> Self {
        moments.sort_by(rank_order);
        Self { qid, vid: vid.into(), moments }
    }

    pub fn moments(&self) -> &[ScoredMoment] {
        &self.moments
    }

    pub fn top(&self) -> Option<&ScoredMoment> {
        self.moments.first()
    }

    pub fn truncate(&mut self, max_preds: usize) {
        self.moments.truncate(max_preds);
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }
}
