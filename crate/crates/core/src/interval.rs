//! Time intervals in seconds and the interval algebra used by every metric.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed span `[start, end]` in seconds within a video.
///
/// Always satisfies `0 <= start < end`, both finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct TimeInterval {
    start: f64,
    end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if start.is_finite() && end.is_finite() && start >= 0.0 && start < end {
            Ok(Self { start, end })
        } else {
            Err(Error::InvalidInterval { start, end })
        }
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.start
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.end
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }

    /// Length of the overlap with `other`, 0 when disjoint.
    #[inline]
    pub fn intersection(&self, other: &TimeInterval) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }

    /// Temporal intersection over union.
    ///
    /// The union is `|a| + |b| - |a ∩ b|`, the same arithmetic the QVHighlights
    /// evaluator uses, so scores agree with it bit for bit.
    #[inline]
    pub fn iou(&self, other: &TimeInterval) -> f64 {
        let inter = self.intersection(other);
        inter / (self.length() + other.length() - inter)
    }

    /// Smallest interval covering both.
    pub fn hull(&self, other: &TimeInterval) -> TimeInterval {
        TimeInterval { start: self.start.min(other.start), end: self.end.max(other.end) }
    }

    /// Intersects the interval with `[0, duration_s]`.
    pub fn clamp_to_video(&self, duration_s: f64) -> Result<TimeInterval> {
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(Error::InvalidArgument(format!("video duration must be > 0, got {duration_s}")));
        }
        if self.start >= duration_s {
            return Err(Error::OutOfVideo { start: self.start, end: self.end, duration: duration_s });
        }
        Ok(TimeInterval { start: self.start, end: self.end.min(duration_s) })
    }

    pub fn shifted(&self, offset: f64) -> Result<TimeInterval> {
        TimeInterval::new(self.start + offset, self.end + offset)
    }
}

/// Temporal IoU of two intervals, in `[0, 1]`.
#[inline]
pub fn iou(a: &TimeInterval, b: &TimeInterval) -> f64 {
    a.iou(b)
}

/// Largest IoU between `a` and any of `windows`; 0 for an empty slice.
pub fn max_iou(a: &TimeInterval, windows: &[TimeInterval]) -> f64 {
    windows.iter().map(|w| a.iou(w)).fold(0.0, f64::max)
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

impl TryFrom<[f64; 2]> for TimeInterval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        TimeInterval::new(v[0], v[1])
    }
}

impl From<TimeInterval> for [f64; 2] {
    fn from(t: TimeInterval) -> Self {
        [t.start, t.end]
    }
}
