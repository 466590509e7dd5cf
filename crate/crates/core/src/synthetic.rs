//! Seeded generators for synthetic feature sets.
//!
//! A synthetic video is a sequence of solid-colour shots, each showing one of
//! a few topics. Frame embeddings and caption embeddings are noisy copies of a
//! per-topic prototype, and a query about a topic gets a noisy prototype as
//! its embedding. Ground-truth windows are the runs of shots showing the
//! query's topic, with a little annotation jitter so they need not line up
//! with shot boundaries exactly.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::harness::features::{write_captions, write_embedding_track, write_frame_track, write_query_embeddings, FeatureRoot};
use crate::harness::jsonl::write_dataset;
use crate::interval::TimeInterval;
use crate::matching::{EmbeddingTrack, Encoder, QueryEmbedding, SegmentCaption};
use crate::proposals::FrameTrack;
use crate::record::QueryRecord;

pub const TOPIC_NAMES: [&str; 8] =
    ["shark", "kitchen", "guitar", "beach", "city street", "dog", "mountain", "classroom"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub videos: usize,
    pub fps: f32,
    pub width: u16,
    pub height: u16,
    pub min_duration_s: u32,
    pub max_duration_s: u32,
    pub joint_dim: usize,
    pub sentence_dim: usize,
    pub queries_per_video: usize,
    /// Uniform per-pixel noise amplitude on each HSV channel.
    pub pixel_noise: u8,
    /// Noise magnitude added to each embedding before normalisation.
    pub embedding_noise: f32,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            videos: 6,
            fps: 5.0,
            width: 16,
            height: 9,
            min_duration_s: 40,
            max_duration_s: 90,
            joint_dim: 32,
            sentence_dim: 24,
            queries_per_video: 3,
            pixel_noise: 4,
            embedding_noise: 0.9,
        }
    }
}

/// One generated video with everything the pipeline reads for it.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub frames: FrameTrack,
    pub embeddings: EmbeddingTrack,
    pub captions: Vec<SegmentCaption>,
    /// True shot boundaries.
    pub shots: Vec<TimeInterval>,
    /// Topic index of each shot.
    pub topics: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub videos: Vec<SyntheticVideo>,
    pub dataset: Vec<QueryRecord>,
    pub queries: Vec<QueryEmbedding>,
}

fn unit_vector(v: Vec<f32>) -> Vec<f32> {
    let n = v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt() as f32;
    v.into_iter().map(|x| x / n).collect()
}

fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f32> {
    unit_vector((0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect())
}

fn noisy(rng: &mut impl Rng, proto: &[f32], noise: f32) -> Vec<f32> {
    let jitter = random_unit(rng, proto.len());
    unit_vector(proto.iter().zip(jitter).map(|(p, j)| p + noise * j).collect())
}

/// A colour whose every channel is at least 80 away from `prev`'s.
fn next_colour(rng: &mut impl Rng, prev: Option<[u8; 3]>) -> [u8; 3] {
    const LEVELS: [u8; 3] = [30, 125, 220];
    let mut out = [0u8; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let choices: Vec<u8> = LEVELS.iter().copied().filter(|&l| prev.map_or(true, |p| l.abs_diff(p[c]) >= 90)).collect();
        let level = *choices.choose(rng).expect("three levels leave a choice");
        *slot = level.saturating_add_signed(rng.gen_range(-5i8..=5));
    }
    out
}

fn frame(rng: &mut impl Rng, colour: [u8; 3], pixels: usize, noise: u8) -> Vec<u8> {
    let mut data = Vec::with_capacity(3 * pixels);
    for base in colour {
        data.extend((0..pixels).map(|_| base.saturating_add(rng.gen_range(0..=noise))));
    }
    data
}

/// Shot lengths in whole seconds, even, 2 to 12, covering `duration_s`.
fn shot_lengths(rng: &mut impl Rng, duration_s: u32) -> Vec<u32> {
    let mut lengths = Vec::new();
    let mut t = 0;
    while t < duration_s {
        let l = (2 * rng.gen_range(1..=6)).min(duration_s - t);
        if l < 2 {
            *lengths.last_mut().expect("first shot is at least 2 s") += l;
        } else {
            lengths.push(l);
        }
        t += l;
    }
    lengths
}

/// Maximal runs of consecutive shots with topic `topic`.
fn topic_runs(shots: &[TimeInterval], topics: &[usize], topic: usize) -> Vec<TimeInterval> {
    let mut runs: Vec<TimeInterval> = Vec::new();
    let mut prev_match = false;
    for (s, &t) in shots.iter().zip(topics) {
        if t == topic {
            match runs.last_mut() {
                Some(last) if prev_match => *last = last.hull(s),
                _ => runs.push(*s),
            }
        }
        prev_match = t == topic;
    }
    runs
}

/// Moves each boundary by -2, 0 or +2 s while keeping windows valid and disjoint.
fn jitter_windows(rng: &mut impl Rng, runs: &[TimeInterval], duration: f64) -> Result<Vec<TimeInterval>> {
    let mut out: Vec<TimeInterval> = Vec::with_capacity(runs.len());
    for run in runs {
        let floor = out.last().map_or(0.0, |w| w.end());
        let start = (run.start() + 2.0 * rng.gen_range(-1i32..=1) as f64).max(floor);
        let end = (run.end() + 2.0 * rng.gen_range(-1i32..=1) as f64).min(duration);
        let (start, end) = if end - start >= 2.0 { (start, end) } else { (run.start().max(floor), run.end()) };
        out.push(TimeInterval::new(start, end)?);
    }
    Ok(out)
}

impl SyntheticSet {
    pub fn generate(spec: &SyntheticSpec) -> Result<Self> {
        if spec.videos == 0 || spec.min_duration_s < 2 || spec.min_duration_s > spec.max_duration_s {
            return Err(Error::InvalidArgument("synthetic spec needs videos >= 1 and 2 <= min <= max duration".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let topics = TOPIC_NAMES.len();
        let joint_protos: Vec<Vec<f32>> = (0..topics).map(|_| random_unit(&mut rng, spec.joint_dim)).collect();
        let sentence_protos: Vec<Vec<f32>> = (0..topics).map(|_| random_unit(&mut rng, spec.sentence_dim)).collect();
        let pixels = spec.width as usize * spec.height as usize;

        let mut videos = Vec::with_capacity(spec.videos);
        let mut dataset = Vec::new();
        let mut queries = Vec::new();
        let mut next_qid = 1u64;

        for v in 0..spec.videos {
            let vid = format!("syn{v:02}");
            let duration_s = rng.gen_range(spec.min_duration_s..=spec.max_duration_s);
            let duration = duration_s as f64;

            // Shots, colours and topics. A video draws from four topics so
            // each tends to recur.
            let mut palette: Vec<usize> = (0..topics).collect();
            palette.shuffle(&mut rng);
            palette.truncate(4);
            let mut shots = Vec::new();
            let mut shot_topics = Vec::new();
            let mut frames = Vec::new();
            let mut colour = None;
            let mut t = 0u32;
            for len in shot_lengths(&mut rng, duration_s) {
                let c = next_colour(&mut rng, colour);
                colour = Some(c);
                let n = (len as f32 * spec.fps).round() as usize;
                frames.extend((0..n).map(|_| frame(&mut rng, c, pixels, spec.pixel_noise)));
                shots.push(TimeInterval::new(t as f64, (t + len) as f64)?);
                shot_topics.push(*palette.choose(&mut rng).expect("palette is non-empty"));
                t += len;
            }
            let frames = FrameTrack::from_frames(&vid, spec.fps, spec.width, spec.height, &frames)?;

            // One joint embedding per second at the half-second mark.
            let mut timestamps = Vec::with_capacity(duration_s as usize);
            let mut vectors = Vec::with_capacity(duration_s as usize * spec.joint_dim);
            for k in 0..duration_s {
                let ts = k as f64 + 0.5;
                let shot = shots.iter().position(|s| ts < s.end()).expect("shots cover the video");
                timestamps.push(ts as f32);
                vectors.extend(noisy(&mut rng, &joint_protos[shot_topics[shot]], spec.embedding_noise));
            }
            let embeddings = EmbeddingTrack::new(&vid, spec.joint_dim, timestamps, vectors)?;

            let captions = shots
                .iter()
                .zip(&shot_topics)
                .map(|(s, &topic)| {
                    let text = format!("a video clip showing a {}", TOPIC_NAMES[topic]);
                    SegmentCaption::new(&vid, *s, text, noisy(&mut rng, &sentence_protos[topic], spec.embedding_noise))
                })
                .collect::<Result<Vec<_>>>()?;

            // Queries about topics present in the video.
            let mut present: Vec<usize> = shot_topics.clone();
            present.sort_unstable();
            present.dedup();
            present.shuffle(&mut rng);
            for &topic in present.iter().take(spec.queries_per_video) {
                let runs = topic_runs(&shots, &shot_topics, topic);
                let windows = jitter_windows(&mut rng, &runs, duration)?;
                let text = format!("Someone shows the {}", TOPIC_NAMES[topic]);
                dataset.push(QueryRecord::new(next_qid, &vid, text, duration, windows)?);
                queries.push(QueryEmbedding::new(next_qid, Encoder::Joint, noisy(&mut rng, &joint_protos[topic], spec.embedding_noise))?);
                queries.push(QueryEmbedding::new(
                    next_qid,
                    Encoder::Sentence,
                    noisy(&mut rng, &sentence_protos[topic], spec.embedding_noise),
                )?);
                next_qid += 1;
            }

            videos.push(SyntheticVideo { frames, embeddings, captions, shots, topics: shot_topics });
        }
        Ok(Self { videos, dataset, queries })
    }

    /// Writes the feature files under `root` and the annotations to `dataset_path`.
    pub fn write(&self, root: &FeatureRoot, dataset_path: &Path) -> Result<()> {
        for dir in ["frames", "embeddings", "captions"] {
            let p = root.path().join(dir);
            std::fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        for v in &self.videos {
            let vid = &v.frames.vid;
            write_frame_track(root.frames(vid), &v.frames)?;
            write_embedding_track(root.embeddings(vid), &v.embeddings)?;
            write_captions(root.captions(vid), &v.captions)?;
        }
        write_query_embeddings(root.query_embeddings(), &self.queries)?;
        write_dataset(dataset_path, &self.dataset)
    }
}

/// A frame track of solid-colour blocks with known cut positions.
#[derive(Debug, Clone)]
pub struct BlockTrack {
    pub track: FrameTrack,
    /// Index of the first frame of every block after the first.
    pub cut_frames: Vec<usize>,
    /// Content values inside a block never exceed this.
    pub noise: f64,
    /// Content values at a cut are never below this.
    pub separation: f64,
}

/// Generates `blocks` solid-colour blocks at `fps`.
///
/// Every pixel gets independent noise in `[0, noise]` on each channel, so two
/// frames of one block differ by at most `noise` per value. Consecutive
/// blocks' base colours differ by `separation + noise` on every channel, so
/// frames either side of a cut differ by at least `separation` per value.
/// Blocks last at least `min_block_s` seconds.
pub fn block_track(
    rng: &mut impl Rng,
    blocks: usize,
    fps: f32,
    noise: u8,
    separation: u8,
    min_block_s: f64,
) -> Result<BlockTrack> {
    let step = separation as u16 + noise as u16;
    if blocks == 0 || step > 110 {
        return Err(Error::InvalidArgument("need blocks >= 1 and separation + noise <= 110".into()));
    }
    let (w, h) = (8u16, 6u16);
    let pixels = w as usize * h as usize;
    let min_frames = (min_block_s * fps as f64).ceil() as usize + 1;
    let mut colour: [u8; 3] = [rng.gen_range(0..=235), rng.gen_range(0..=235), rng.gen_range(0..=235)];
    let mut frames = Vec::new();
    let mut cut_frames = Vec::new();
    for b in 0..blocks {
        if b > 0 {
            cut_frames.push(frames.len());
            for c in colour.iter_mut() {
                let up = *c as u16 + step;
                *c = if up <= 235 && (rng.gen_bool(0.5) || (*c as u16) < step) { up as u8 } else { *c - step as u8 };
            }
        }
        let n = rng.gen_range(min_frames..=min_frames + 3 * fps as usize);
        frames.extend((0..n).map(|_| frame(rng, colour, pixels, noise)));
    }
    let track = FrameTrack::from_frames("blocks", fps, w, h, &frames)?;
    Ok(BlockTrack { track, cut_frames, noise: noise as f64, separation: separation as f64 })
}
