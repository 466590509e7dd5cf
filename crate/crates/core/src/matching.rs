//! Moment-query matching.
//!
//! Two scoring paths share one contract, a score in `[0, 1]` per proposal:
//!
//! * frame path: per-second joint image-text embeddings of the video, compared
//!   with the query's text embedding by cosine and aggregated with `max`;
//! * caption path: a sentence embedding of each segment's caption, compared
//!   with the query's sentence embedding.
//!
//! Negative cosines are clamped to 0. Scores can optionally be min-max
//! rescaled per video so that a fixed watershed threshold is meaningful.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::TimeInterval;
use crate::record::ScoredMoment;

/// Maximum deviation from unit L2 norm accepted for stored embeddings.
pub const UNIT_NORM_TOL: f64 = 1e-4;

/// Tolerance when matching a caption's interval to a proposal, in seconds.
pub const CAPTION_MATCH_TOL_S: f64 = 1e-3;

/// Which embedding space a vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoder {
    /// Joint image-text encoder (frame path).
    Joint,
    /// Sentence encoder (caption path).
    Sentence,
}

impl Encoder {
    pub fn as_str(&self) -> &'static str {
        match self {
            Encoder::Joint => "joint",
            Encoder::Sentence => "sentence",
        }
    }
}

impl fmt::Display for Encoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Encoder::Joint),
            "sentence" => Ok(Encoder::Sentence),
            other => Err(Error::InvalidArgument(format!("unknown encoder `{other}`"))),
        }
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

pub(crate) fn check_unit(v: &[f32], index: usize) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() <= UNIT_NORM_TOL {
        Ok(())
    } else {
        Err(Error::NotUnitNorm { index, norm: n })
    }
}

/// Cosine similarity, accumulated in f64.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Timestamped unit-norm embeddings sampled from one video.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTrack {
    pub vid: String,
    dim: usize,
    timestamps: Vec<f32>,
    vectors: Vec<f32>,
}

impl EmbeddingTrack {
    /// `vectors` holds `timestamps.len()` rows of `dim` values.
    pub fn new(vid: impl Into<String>, dim: usize, timestamps: Vec<f32>, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidEmbeddingTrack("dimension is 0".into()));
        }
        if vectors.len() != timestamps.len() * dim {
            return Err(Error::InvalidEmbeddingTrack(format!(
                "{} values for {} entries of dimension {dim}",
                vectors.len(),
                timestamps.len()
            )));
        }
        if let Some(t) = timestamps.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidEmbeddingTrack(format!("bad timestamp {t}")));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidEmbeddingTrack(format!(
                "timestamps not strictly increasing at entry {}: {} then {}",
                i + 1,
                timestamps[i],
                timestamps[i + 1]
            )));
        }
        for (i, v) in vectors.chunks_exact(dim).enumerate() {
            check_unit(v, i)?;
        }
        Ok(Self { vid: vid.into(), dim, timestamps, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[f32] {
        &self.timestamps
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> impl Iterator<Item = (f32, &[f32])> {
        self.timestamps.iter().copied().zip(self.vectors.chunks_exact(self.dim))
    }
}

/// A query embedded by one of the encoders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryEmbedding {
    pub qid: u64,
    pub encoder: Encoder,
    pub vector: Vec<f32>,
}

impl QueryEmbedding {
    pub fn new(qid: u64, encoder: Encoder, vector: Vec<f32>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::Empty("query vector"));
        }
        check_unit(&vector, 0)?;
        Ok(Self { qid, encoder, vector })
    }
}

/// A generated caption for one segment together with its sentence embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCaption {
    pub vid: String,
    pub interval: TimeInterval,
    pub caption: String,
    embedding: Vec<f32>,
}

impl SegmentCaption {
    pub fn new(vid: impl Into<String>, interval: TimeInterval, caption: impl Into<String>, embedding: Vec<f32>) -> Result<Self> {
        if embedding.is_empty() {
            return Err(Error::Empty("caption embedding"));
        }
        check_unit(&embedding, 0)?;
        Ok(Self { vid: vid.into(), interval, caption: caption.into(), embedding })
    }

    pub fn embedding(&self) -> &[f32] {
        &self.embedding
    }

    fn covers(&self, seg: &TimeInterval) -> bool {
        (self.interval.start() - seg.start()).abs() <= CAPTION_MATCH_TOL_S
            && (self.interval.end() - seg.end()).abs() <= CAPTION_MATCH_TOL_S
    }
}

/// How per-frame similarities are folded into one segment score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Max,
}

/// Per-video score rescaling applied after matching.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    /// Min-max rescale to `[0, 1]` across the video's segments.
    #[value(name = "per_video")]
    PerVideo,
}

/// Sampled frames whose timestamp falls in `[seg.start, seg.end)`.
///
/// A segment shorter than the sampling period may contain no sample; the
/// entry nearest its midpoint is returned instead (earlier entry on ties).
pub fn frames_in_segment<'a>(track: &'a EmbeddingTrack, seg: &TimeInterval) -> Result<Vec<&'a [f32]>> {
    if track.is_empty() {
        return Err(Error::Empty("embedding track"));
    }
    let ts = track.timestamps();
    let lo = ts.partition_point(|&t| (t as f64) < seg.start());
    let hi = ts.partition_point(|&t| (t as f64) < seg.end());
    if lo < hi {
        return Ok((lo..hi).map(|i| track.vector(i)).collect());
    }
    // No sample inside: candidates are the neighbours around the insertion point.
    let mid = seg.midpoint();
    let candidates = lo.saturating_sub(1)..(lo + 1).min(ts.len());
    let nearest = candidates
        .min_by(|&a, &b| (ts[a] as f64 - mid).abs().total_cmp(&(ts[b] as f64 - mid).abs()))
        .expect("track is non-empty");
    Ok(vec![track.vector(nearest)])
}

/// Score of a segment from its sampled frame embeddings.
pub fn score_segment_by_frames(frames: &[&[f32]], query: &QueryEmbedding, agg: Aggregation) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::Empty("frame list"));
    }
    let mut best = f64::NEG_INFINITY;
    for f in frames {
        if f.len() != query.vector.len() {
            return Err(Error::DimensionMismatch { expected: query.vector.len(), actual: f.len() });
        }
        let c = cosine(f, &query.vector)?;
        best = match agg {
            Aggregation::Max => best.max(c),
        };
    }
    Ok(best.max(0.0))
}

/// Score of a segment from its caption embedding.
pub fn score_segment_by_caption(cap: &SegmentCaption, query: &QueryEmbedding) -> Result<f64> {
    if query.encoder != Encoder::Sentence {
        return Err(Error::EncoderMismatch {
            expected: Encoder::Sentence.to_string(),
            actual: query.encoder.to_string(),
        });
    }
    if cap.embedding.len() != query.vector.len() {
        return Err(Error::DimensionMismatch { expected: query.vector.len(), actual: cap.embedding.len() });
    }
    Ok(cosine(&cap.embedding, &query.vector)?.max(0.0))
}

/// Video-side features a proposal list is scored against.
#[derive(Debug, Clone, Copy)]
pub enum SegmentFeatures<'a> {
    Frames(&'a EmbeddingTrack),
    Captions(&'a [SegmentCaption]),
}

/// Min-max rescales `scores` in place; identity when all values are equal.
pub fn normalize_min_max(scores: &mut [f64]) {
    let (lo, hi) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi > lo {
        let range = hi - lo;
        for s in scores.iter_mut() {
            *s = (*s - lo) / range;
        }
    }
}

/// Scores every segment against the query, preserving segment order.
pub fn score_proposals(
    segments: &[TimeInterval],
    features: SegmentFeatures<'_>,
    query: &QueryEmbedding,
    normalize: Normalization,
) -> Result<Vec<ScoredMoment>> {
    if segments.is_empty() {
        return Err(Error::Empty("segment list"));
    }
    let mut raw = Vec::with_capacity(segments.len());
    match features {
        SegmentFeatures::Frames(track) => {
            if query.encoder != Encoder::Joint {
                return Err(Error::EncoderMismatch {
                    expected: Encoder::Joint.to_string(),
                    actual: query.encoder.to_string(),
                });
            }
            for seg in segments {
                let frames = frames_in_segment(track, seg)?;
                raw.push(score_segment_by_frames(&frames, query, Aggregation::Max)?);
            }
        }
        SegmentFeatures::Captions(captions) => {
            for seg in segments {
                let cap = captions.iter().find(|c| c.covers(seg)).ok_or_else(|| Error::MissingCaption {
                    vid: captions.first().map(|c| c.vid.clone()).unwrap_or_default(),
                    start: seg.start(),
                    end: seg.end(),
                })?;
                raw.push(score_segment_by_caption(cap, query)?);
            }
        }
    }
    if normalize == Normalization::PerVideo {
        normalize_min_max(&mut raw);
    }
    segments.iter().zip(raw).map(|(seg, s)| ScoredMoment::new(*seg, s.clamp(0.0, 1.0))).collect()
}
