//! End-to-end orchestration: propose, score, optionally merge, rank.
//!
//! Queries are grouped by video and videos are processed in parallel. Each
//! video's features are loaded once and shared by every configuration in a
//! batch, so a sweep over λ decodes each frame track a single time. Videos
//! whose feature files are absent are skipped with a warning; the caller
//! evaluates on the remaining subset.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use rayon::prelude::*;

use super::config::{MatcherKind, PipelineConfig, ProposalMethod};
use super::features::{load_captions, load_embedding_track, load_frame_track, load_query_embeddings, FeatureRoot};
use crate::error::{Error, Result};
use crate::interval::TimeInterval;
use crate::matching::{score_proposals, EmbeddingTrack, Encoder, QueryEmbedding, SegmentCaption, SegmentFeatures};
use crate::oracle::{oracle_merge, oracle_scores};
use crate::postprocess::simple_watershed;
use crate::proposals::{content_values, shots_from_signal, sliding_windows, ContentSignal};
use crate::record::{PredictionRecord, QueryRecord, ScoredMoment};

/// Which per-video feature files a run needs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FeatureNeeds {
    pub frames: bool,
    pub embeddings: bool,
    pub captions: bool,
}

impl FeatureNeeds {
    pub fn for_configs(configs: &[PipelineConfig]) -> Self {
        let mut needs = Self::default();
        for c in configs {
            needs.frames |= c.proposal == ProposalMethod::Shotdetect;
            needs.embeddings |= c.matcher == MatcherKind::Frames;
            needs.captions |= c.matcher == MatcherKind::Captions;
        }
        needs
    }

    /// Shot detection only, as used by the oracle bounds.
    pub fn shots_only() -> Self {
        Self { frames: true, ..Self::default() }
    }

    fn any_matcher(&self) -> bool {
        self.embeddings || self.captions
    }
}

/// A query left out of a run, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub qid: u64,
    pub vid: String,
    pub reason: String,
}

/// Decoded features of one video.
#[derive(Debug, Clone)]
pub struct VideoFeatures {
    pub vid: String,
    signal: Option<(ContentSignal, f64)>,
    embeddings: Option<EmbeddingTrack>,
    captions: Option<Vec<SegmentCaption>>,
}

impl VideoFeatures {
    /// Loads what `needs` asks for. `Ok(None)` names the first missing file.
    pub fn load(root: &FeatureRoot, vid: &str, needs: FeatureNeeds) -> Result<std::result::Result<Self, String>> {
        let wanted = [
            (needs.frames, root.frames(vid)),
            (needs.embeddings, root.embeddings(vid)),
            (needs.captions, root.captions(vid)),
        ];
        for (needed, path) in &wanted {
            if *needed && !path.is_file() {
                return Ok(Err(format!("missing {}", path.display())));
            }
        }
        let signal = if needs.frames {
            let track = load_frame_track(root.frames(vid))?;
            Some((content_values(&track), track.fps() as f64))
        } else {
            None
        };
        let embeddings = if needs.embeddings { Some(load_embedding_track(root.embeddings(vid))?) } else { None };
        let captions = if needs.captions { Some(load_captions(root.captions(vid))?) } else { None };
        Ok(Ok(Self { vid: vid.to_owned(), signal, embeddings, captions }))
    }

    /// Candidate segments for a video of `duration_s` seconds, in temporal order.
    ///
    /// Shots come from the frame track and are clipped to the annotated
    /// duration; shots starting past it are dropped.
    pub fn proposals(&self, config: &PipelineConfig, duration_s: f64) -> Result<Vec<TimeInterval>> {
        match config.proposal {
            ProposalMethod::Slidingwindow => sliding_windows(duration_s, config.window_s, config.stride_s),
            ProposalMethod::Shotdetect => {
                let (signal, fps) = self.signal.as_ref().ok_or(Error::Empty("frame track"))?;
                let shots = shots_from_signal(signal, *fps, config.lambda, config.min_len_s)?;
                Ok(shots.iter().filter(|s| s.start() < duration_s).map(|s| s.clamp_to_video(duration_s)).collect::<Result<_>>()?)
            }
        }
    }

    /// Scores `segments` against `query` with the configured matcher and normalization.
    pub fn score(&self, config: &PipelineConfig, segments: &[TimeInterval], query: &QueryEmbedding) -> Result<Vec<ScoredMoment>> {
        let features = match config.matcher {
            MatcherKind::Frames => SegmentFeatures::Frames(self.embeddings.as_ref().ok_or(Error::Empty("embedding track"))?),
            MatcherKind::Captions => SegmentFeatures::Captions(self.captions.as_deref().ok_or(Error::Empty("caption list"))?),
        };
        score_proposals(segments, features, query, config.normalize)
    }
}

/// Moments after the optional watershed step, in temporal order.
pub fn postprocess(config: &PipelineConfig, scored: Vec<ScoredMoment>) -> Result<Vec<ScoredMoment>> {
    match config.gamma {
        Some(gamma) => simple_watershed(&scored, gamma),
        None => Ok(scored),
    }
}

/// Query embeddings keyed by `(qid, encoder)`.
#[derive(Debug, Clone, Default)]
pub struct QueryIndex {
    by_key: HashMap<(u64, Encoder), QueryEmbedding>,
}

impl QueryIndex {
    pub fn load(root: &FeatureRoot) -> Result<Self> {
        Ok(Self::from_embeddings(load_query_embeddings(root.query_embeddings())?))
    }

    /// Later entries for the same `(qid, encoder)` replace earlier ones.
    pub fn from_embeddings(embeddings: Vec<QueryEmbedding>) -> Self {
        Self { by_key: embeddings.into_iter().map(|q| ((q.qid, q.encoder), q)).collect() }
    }

    pub fn get(&self, qid: u64, encoder: Encoder) -> Option<&QueryEmbedding> {
        self.by_key.get(&(qid, encoder))
    }
}

/// Predictions of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// One record per processed query, in dataset order.
    pub predictions: Vec<PredictionRecord>,
    pub skipped: Vec<Skipped>,
    /// Moments emitted before truncation, summed over processed queries.
    pub segments: usize,
}

impl PipelineOutput {
    /// The dataset restricted to queries that were processed.
    pub fn evaluated_subset(&self, dataset: &[QueryRecord]) -> Vec<QueryRecord> {
        let done: std::collections::HashSet<u64> = self.predictions.iter().map(|p| p.qid).collect();
        dataset.iter().filter(|r| done.contains(&r.qid)).cloned().collect()
    }
}

/// Queries grouped by video, videos in lexicographic order.
fn group_by_video(dataset: &[QueryRecord]) -> Vec<(&str, Vec<(usize, &QueryRecord)>)> {
    let mut groups: BTreeMap<&str, Vec<(usize, &QueryRecord)>> = BTreeMap::new();
    for (i, r) in dataset.iter().enumerate() {
        groups.entry(r.vid.as_str()).or_default().push((i, r));
    }
    groups.into_iter().collect()
}

/// Runs `per_query` over every query whose video has the needed features, in
/// parallel across videos. Results come back in dataset order.
fn drive<T, F>(dataset: &[QueryRecord], root: &FeatureRoot, needs: FeatureNeeds, per_query: F) -> Result<(Vec<T>, Vec<Skipped>)>
where
    T: Send,
    F: Fn(&VideoFeatures, &QueryRecord) -> Result<std::result::Result<T, String>> + Sync,
{
    let groups = group_by_video(dataset);
    let outcomes: Vec<Result<(Vec<(usize, T)>, Vec<Skipped>)>> = groups
        .par_iter()
        .map(|(vid, queries)| {
            let video = match VideoFeatures::load(root, vid, needs)? {
                Ok(v) => v,
                Err(reason) => {
                    warn!("skipping video {vid}: {reason}");
                    let skipped = queries
                        .iter()
                        .map(|(_, r)| Skipped { qid: r.qid, vid: vid.to_string(), reason: reason.clone() })
                        .collect();
                    return Ok((Vec::new(), skipped));
                }
            };
            let mut done = Vec::with_capacity(queries.len());
            let mut skipped = Vec::new();
            for &(i, r) in queries {
                match per_query(&video, r)? {
                    Ok(value) => done.push((i, value)),
                    Err(reason) => {
                        warn!("skipping query {}: {reason}", r.qid);
                        skipped.push(Skipped { qid: r.qid, vid: vid.to_string(), reason });
                    }
                }
            }
            Ok((done, skipped))
        })
        .collect();

    let mut done = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        let (d, s) = outcome?;
        done.extend(d);
        skipped.extend(s);
    }
    done.sort_by_key(|(i, _)| *i);
    Ok((done.into_iter().map(|(_, v)| v).collect(), skipped))
}

fn query_for<'a>(queries: &'a QueryIndex, config: &PipelineConfig, qid: u64) -> std::result::Result<&'a QueryEmbedding, String> {
    let encoder = config.matcher.encoder();
    queries.get(qid, encoder).ok_or_else(|| format!("no {encoder} query embedding"))
}

/// Runs every configuration over the dataset, sharing decoded features.
pub fn run_many(configs: &[PipelineConfig], dataset: &[QueryRecord], root: &FeatureRoot) -> Result<Vec<PipelineOutput>> {
    for c in configs {
        c.validate()?;
    }
    let needs = FeatureNeeds::for_configs(configs);
    let queries = if needs.any_matcher() { QueryIndex::load(root)? } else { QueryIndex::default() };
    run_many_with_queries(configs, dataset, root, &queries)
}

/// As [`run_many`], with query embeddings supplied by the caller.
pub fn run_many_with_queries(
    configs: &[PipelineConfig],
    dataset: &[QueryRecord],
    root: &FeatureRoot,
    queries: &QueryIndex,
) -> Result<Vec<PipelineOutput>> {
    let needs = FeatureNeeds::for_configs(configs);
    let (rows, skipped) = drive(dataset, root, needs, |video, record| {
        let mut per_config = Vec::with_capacity(configs.len());
        for config in configs {
            let query = match query_for(queries, config, record.qid) {
                Ok(q) => q,
                Err(reason) => return Ok(Err(reason)),
            };
            let segments = video.proposals(config, record.duration_s)?;
            let moments = postprocess(config, video.score(config, &segments, query)?)?;
            let count = moments.len();
            let mut pred = PredictionRecord::new(record.qid, record.vid.clone(), moments);
            pred.truncate(config.max_preds);
            per_config.push((pred, count));
        }
        Ok(Ok(per_config))
    })?;

    let mut outputs: Vec<PipelineOutput> = configs
        .iter()
        .map(|_| PipelineOutput { predictions: Vec::with_capacity(rows.len()), skipped: skipped.clone(), segments: 0 })
        .collect();
    for row in rows {
        for (out, (pred, count)) in outputs.iter_mut().zip(row) {
            out.predictions.push(pred);
            out.segments += count;
        }
    }
    Ok(outputs)
}

/// Runs a single configuration over the dataset.
pub fn run_pipeline(config: &PipelineConfig, dataset: &[QueryRecord], root: &FeatureRoot) -> Result<PipelineOutput> {
    Ok(run_many(std::slice::from_ref(config), dataset, root)?.remove(0))
}

/// Proposals for every video referenced by the dataset, as `(vid, duration, segments)`.
pub fn propose_videos(
    config: &PipelineConfig,
    dataset: &[QueryRecord],
    root: &FeatureRoot,
) -> Result<(Vec<(String, f64, Vec<TimeInterval>)>, Vec<Skipped>)> {
    config.validate()?;
    let needs = FeatureNeeds { frames: config.proposal == ProposalMethod::Shotdetect, ..Default::default() };
    let (rows, skipped) = drive(dataset, root, needs, |video, record| {
        Ok(Ok((record.vid.clone(), record.duration_s, video.proposals(config, record.duration_s)?)))
    })?;
    // One row per video: the first query's duration wins.
    let mut seen = std::collections::HashSet::new();
    let mut videos: Vec<_> = rows.into_iter().filter(|(vid, _, _)| seen.insert(vid.clone())).collect();
    videos.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((videos, skipped))
}

/// Scored proposals per query before post-processing, in temporal order.
pub fn score_queries(
    config: &PipelineConfig,
    dataset: &[QueryRecord],
    root: &FeatureRoot,
) -> Result<(Vec<(u64, String, Vec<ScoredMoment>)>, Vec<Skipped>)> {
    config.validate()?;
    let needs = FeatureNeeds::for_configs(std::slice::from_ref(config));
    let queries = QueryIndex::load(root)?;
    drive(dataset, root, needs, |video, record| {
        let query = match query_for(&queries, config, record.qid) {
            Ok(q) => q,
            Err(reason) => return Ok(Err(reason)),
        };
        let segments = video.proposals(config, record.duration_s)?;
        Ok(Ok((record.qid, record.vid.clone(), video.score(config, &segments, query)?)))
    })
}

/// Predictions of both oracle bounds on shot proposals.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub scores: Vec<PredictionRecord>,
    pub merged: Vec<PredictionRecord>,
    pub skipped: Vec<Skipped>,
}

/// Oracle bounds over shot proposals detected with `config`'s λ and minimum
/// shot length. Only frame tracks are needed.
pub fn run_oracle(config: &PipelineConfig, dataset: &[QueryRecord], root: &FeatureRoot) -> Result<OracleOutput> {
    let config = PipelineConfig { proposal: ProposalMethod::Shotdetect, gamma: None, ..config.clone() };
    config.validate()?;
    let (rows, skipped) = drive(dataset, root, FeatureNeeds::shots_only(), |video, record| {
        let segments = video.proposals(&config, record.duration_s)?;
        let mut scored = PredictionRecord::new(record.qid, record.vid.clone(), oracle_scores(&segments, record)?);
        let mut merged = PredictionRecord::new(record.qid, record.vid.clone(), oracle_merge(&segments, record)?);
        scored.truncate(config.max_preds);
        merged.truncate(config.max_preds);
        Ok(Ok((scored, merged)))
    })?;
    let (scores, merged) = rows.into_iter().unzip();
    Ok(OracleOutput { scores, merged, skipped })
}
