//! SimpleWatershed: merge runs of adjacent high-scoring segments.

use crate::error::{Error, Result};
use crate::record::ScoredMoment;

/// Tolerance for treating `end_i` and `start_{i+1}` as the same instant.
pub const ADJACENCY_TOL_S: f64 = 1e-6;

pub(crate) fn adjacent(prev_end: f64, next_start: f64) -> bool {
    (next_start - prev_end).abs() <= ADJACENCY_TOL_S
}

/// Replaces every maximal run of temporally adjacent moments whose scores are
/// all `>= gamma` by a single moment spanning the run, scored by the run
/// maximum. Moments below `gamma` pass through unchanged, and a gap between
/// two moments ends a run.
///
/// Input must be sorted by start time and non-overlapping.
pub fn simple_watershed(moments: &[ScoredMoment], gamma: f64) -> Result<Vec<ScoredMoment>> {
    if !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be finite, got {gamma}")));
    }
    for w in moments.windows(2) {
        if w[1].start() < w[0].end() - ADJACENCY_TOL_S {
            return Err(Error::Unordered {
                prev_start: w[0].start(),
                prev_end: w[0].end(),
                start: w[1].start(),
                end: w[1].end(),
            });
        }
    }

    let mut out = Vec::with_capacity(moments.len());
    let mut run: Option<ScoredMoment> = None;
    for m in moments {
        if m.score() < gamma {
            out.extend(run.take());
            out.push(*m);
            continue;
        }
        run = Some(match run.take() {
            Some(cur) if adjacent(cur.end(), m.start()) => {
                ScoredMoment::new(cur.interval.hull(&m.interval), cur.score().max(m.score()))?
            }
            Some(cur) => {
                out.push(cur);
                *m
            }
            None => *m,
        });
    }
    out.extend(run);
    Ok(out)
}
