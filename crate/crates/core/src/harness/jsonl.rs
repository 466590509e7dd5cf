//! Dataset, prediction, segment and scored-moment JSONL files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{read_jsonl, write_jsonl};
use crate::error::Result;
use crate::interval::TimeInterval;
use crate::record::{PredictionRecord, QueryRecord, ScoredMoment, WINDOW_SLACK_S};

#[derive(Serialize, Deserialize)]
struct DatasetLine {
    qid: u64,
    query: String,
    vid: String,
    duration: f64,
    relevant_windows: Vec<[f64; 2]>,
}

fn parse_dataset_line(line: &str) -> std::result::Result<QueryRecord, String> {
    let raw: DatasetLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if !(raw.duration.is_finite() && raw.duration > 0.0) {
        return Err(format!("duration: must be > 0, got {}", raw.duration));
    }
    if raw.relevant_windows.is_empty() {
        return Err("relevant_windows: empty".into());
    }
    let mut windows = Vec::with_capacity(raw.relevant_windows.len());
    for (i, [s, e]) in raw.relevant_windows.iter().copied().enumerate() {
        let w = TimeInterval::new(s, e).map_err(|err| format!("relevant_windows[{i}]: {err}"))?;
        if e > raw.duration + WINDOW_SLACK_S {
            return Err(format!("relevant_windows[{i}]: end {e} exceeds duration {}", raw.duration));
        }
        windows.push(w);
    }
    QueryRecord::new(raw.qid, raw.vid, raw.query, raw.duration, windows).map_err(|e| e.to_string())
}

/// Reads a QVHighlights-style annotation file. Unknown fields are ignored.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<QueryRecord>> {
    read_jsonl(path.as_ref(), |_, line| parse_dataset_line(line))
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[QueryRecord]) -> Result<()> {
    write_jsonl(
        path.as_ref(),
        records.iter().map(|r| DatasetLine {
            qid: r.qid,
            query: r.query.clone(),
            vid: r.vid.clone(),
            duration: r.duration_s,
            relevant_windows: r.gt_windows().iter().map(|w| [w.start(), w.end()]).collect(),
        }),
    )
}

#[derive(Serialize, Deserialize)]
struct PredictionLine {
    qid: u64,
    #[serde(default)]
    vid: String,
    pred_relevant_windows: Vec<[f64; 3]>,
}

fn to_triplets(moments: &[ScoredMoment]) -> Vec<[f64; 3]> {
    moments.iter().map(|m| [m.start(), m.end(), m.score()]).collect()
}

fn from_triplets(triplets: &[[f64; 3]], field: &str) -> std::result::Result<Vec<ScoredMoment>, String> {
    triplets
        .iter()
        .enumerate()
        .map(|(i, &[s, e, score])| {
            TimeInterval::new(s, e)
                .and_then(|iv| ScoredMoment::new(iv, score))
                .map_err(|err| format!("{field}[{i}]: {err}"))
        })
        .collect()
}

/// One line per record: `{"qid", "vid", "pred_relevant_windows": [[start, end, score], ..]}`,
/// windows in ranking order.
pub fn write_predictions(path: impl AsRef<Path>, preds: &[PredictionRecord]) -> Result<()> {
    write_jsonl(path.as_ref(), preds.iter().map(prediction_line))
}

fn prediction_line(p: &PredictionRecord) -> PredictionLine {
    PredictionLine { qid: p.qid, vid: p.vid.clone(), pred_relevant_windows: to_triplets(p.moments()) }
}

fn lines_to_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(&row).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

/// Serialized predictions exactly as [`write_predictions`] writes them.
pub fn predictions_to_string(preds: &[PredictionRecord]) -> String {
    lines_to_string(preds.iter().map(prediction_line))
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    read_jsonl(path.as_ref(), |_, line| {
        let raw: PredictionLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let moments = from_triplets(&raw.pred_relevant_windows, "pred_relevant_windows")?;
        Ok(PredictionRecord::new(raw.qid, raw.vid, moments))
    })
}

/// Proposals for one video: `{"vid", "duration", "segments": [[start, end], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoSegments {
    pub vid: String,
    pub duration: f64,
    pub segments: Vec<TimeInterval>,
}

pub fn write_segments(path: impl AsRef<Path>, rows: &[VideoSegments]) -> Result<()> {
    write_jsonl(path.as_ref(), rows)
}

pub fn segments_to_string(rows: &[VideoSegments]) -> String {
    lines_to_string(rows)
}

pub fn load_segments(path: impl AsRef<Path>) -> Result<Vec<VideoSegments>> {
    read_jsonl(path.as_ref(), |_, line| serde_json::from_str(line).map_err(|e| e.to_string()))
}

/// Scored proposals for one query in temporal order:
/// `{"qid", "vid", "moments": [[start, end, score], ..]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredQuery {
    pub qid: u64,
    pub vid: String,
    pub moments: Vec<ScoredMoment>,
}

#[derive(Serialize, Deserialize)]
struct ScoredLine {
    qid: u64,
    vid: String,
    moments: Vec<[f64; 3]>,
}

fn scored_line(r: &ScoredQuery) -> ScoredLine {
    ScoredLine { qid: r.qid, vid: r.vid.clone(), moments: to_triplets(&r.moments) }
}

pub fn write_scored(path: impl AsRef<Path>, rows: &[ScoredQuery]) -> Result<()> {
    write_jsonl(path.as_ref(), rows.iter().map(scored_line))
}

pub fn scored_to_string(rows: &[ScoredQuery]) -> String {
    lines_to_string(rows.iter().map(scored_line))
}

pub fn load_scored(path: impl AsRef<Path>) -> Result<Vec<ScoredQuery>> {
    read_jsonl(path.as_ref(), |_, line| {
        let raw: ScoredLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        Ok(ScoredQuery { qid: raw.qid, vid: raw.vid, moments: from_triplets(&raw.moments, "moments")? })
    })
}
