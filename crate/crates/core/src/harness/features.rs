//! Binary feature tracks and JSONL side files.
//!
//! Frame track (`.vmrf`), little-endian:
//!
//! ```text
//! "VMRF" | version u16 = 1 | width u16 | height u16 | fps f32 | frame_count u32
//! frame_count x (H plane, S plane, V plane), each width*height bytes, row-major
//! ```
//!
//! Embedding track (`.vmre`), little-endian:
//!
//! ```text
//! "VMRE" | version u16 = 1 | dim u16 | count u32
//! count x (timestamp f32 seconds | dim x f32 unit-norm vector)
//! ```
//!
//! Query embeddings and captions are JSONL:
//! `{"qid": .., "encoder": "joint"|"sentence", "vector": [..]}` and
//! `{"vid": .., "start": .., "end": .., "caption": .., "vector": [..]}`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::TimeInterval;
use crate::matching::{EmbeddingTrack, QueryEmbedding, SegmentCaption};
use crate::proposals::FrameTrack;

pub const FRAME_MAGIC: [u8; 4] = *b"VMRF";
pub const EMBEDDING_MAGIC: [u8; 4] = *b"VMRE";
pub const FORMAT_VERSION: u16 = 1;
pub const FRAME_HEADER_LEN: usize = 18;
pub const EMBEDDING_HEADER_LEN: usize = 12;

/// Default frame-track resolution written by the extractor.
pub const DEFAULT_RESOLUTION: (u16, u16) = (64, 36);

/// Directory layout of a feature root:
///
/// ```text
/// <root>/frames/<vid>.vmrf
/// <root>/embeddings/<vid>.vmre
/// <root>/captions/<vid>.jsonl
/// <root>/queries.jsonl
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRoot {
    root: PathBuf,
}

impl FeatureRoot {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn frames(&self, vid: &str) -> PathBuf {
        self.root.join("frames").join(format!("{vid}.vmrf"))
    }

    pub fn embeddings(&self, vid: &str) -> PathBuf {
        self.root.join("embeddings").join(format!("{vid}.vmre"))
    }

    pub fn captions(&self, vid: &str) -> PathBuf {
        self.root.join("captions").join(format!("{vid}.jsonl"))
    }

    pub fn query_embeddings(&self) -> PathBuf {
        self.root.join("queries.jsonl")
    }
}

fn vid_from_path(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.buf[self.pos..self.pos + N].try_into().expect("length checked");
        self.pos += N;
        out
    }
    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn f32(&mut self) -> f32 {
        f32::from_le_bytes(self.take())
    }
}

fn check_header(path: &Path, buf: &[u8], magic: [u8; 4], header_len: usize) -> Result<()> {
    if buf.len() < 4 {
        return Err(Error::Truncated { path: path.into(), expected: header_len, actual: buf.len() });
    }
    let found: [u8; 4] = buf[..4].try_into().expect("length checked");
    if found != magic {
        return Err(Error::BadMagic { path: path.into(), expected: magic, found });
    }
    if buf.len() < header_len {
        return Err(Error::Truncated { path: path.into(), expected: header_len, actual: buf.len() });
    }
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { path: path.into(), version });
    }
    Ok(())
}

fn check_payload(path: &Path, expected: usize, actual: usize) -> Result<()> {
    if actual < expected {
        return Err(Error::Truncated { path: path.into(), expected, actual });
    }
    if actual > expected {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            message: format!("{} trailing bytes after payload", actual - expected),
        });
    }
    Ok(())
}

/// Parses a frame track; the video id is taken from the file stem.
pub fn decode_frame_track(path: &Path, buf: &[u8]) -> Result<FrameTrack> {
    check_header(path, buf, FRAME_MAGIC, FRAME_HEADER_LEN)?;
    let mut r = Reader { buf, pos: 6 };
    let width = r.u16();
    let height = r.u16();
    let fps = r.f32();
    let count = r.u32() as usize;
    let expected = FRAME_HEADER_LEN + count * 3 * width as usize * height as usize;
    check_payload(path, expected, buf.len())?;
    FrameTrack::new(vid_from_path(path), fps, width, height, buf[FRAME_HEADER_LEN..].to_vec())
}

pub fn encode_frame_track(track: &FrameTrack) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + track.raw().len());
    out.extend_from_slice(&FRAME_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&track.width().to_le_bytes());
    out.extend_from_slice(&track.height().to_le_bytes());
    out.extend_from_slice(&track.fps().to_le_bytes());
    out.extend_from_slice(&(track.frame_count() as u32).to_le_bytes());
    out.extend_from_slice(track.raw());
    out
}

pub fn load_frame_track(path: impl AsRef<Path>) -> Result<FrameTrack> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_frame_track(path, &buf)
}

pub fn write_frame_track(path: impl AsRef<Path>, track: &FrameTrack) -> Result<()> {
    write_atomic(path.as_ref(), &encode_frame_track(track))
}

/// Parses an embedding track; checks timestamp order and unit norms.
pub fn decode_embedding_track(path: &Path, buf: &[u8]) -> Result<EmbeddingTrack> {
    check_header(path, buf, EMBEDDING_MAGIC, EMBEDDING_HEADER_LEN)?;
    let mut r = Reader { buf, pos: 6 };
    let dim = r.u16() as usize;
    let count = r.u32() as usize;
    let expected = EMBEDDING_HEADER_LEN + count * 4 * (1 + dim);
    check_payload(path, expected, buf.len())?;
    let mut timestamps = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count * dim);
    for _ in 0..count {
        timestamps.push(r.f32());
        for _ in 0..dim {
            vectors.push(r.f32());
        }
    }
    EmbeddingTrack::new(vid_from_path(path), dim, timestamps, vectors)
}

pub fn encode_embedding_track(track: &EmbeddingTrack) -> Vec<u8> {
    let mut out = Vec::with_capacity(EMBEDDING_HEADER_LEN + track.len() * 4 * (1 + track.dim()));
    out.extend_from_slice(&EMBEDDING_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(track.dim() as u16).to_le_bytes());
    out.extend_from_slice(&(track.len() as u32).to_le_bytes());
    for (t, v) in track.entries() {
        out.extend_from_slice(&t.to_le_bytes());
        for x in v {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn load_embedding_track(path: impl AsRef<Path>) -> Result<EmbeddingTrack> {
    let path = path.as_ref();
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embedding_track(path, &buf)
}

pub fn write_embedding_track(path: impl AsRef<Path>, track: &EmbeddingTrack) -> Result<()> {
    if track.dim() > u16::MAX as usize {
        return Err(Error::InvalidEmbeddingTrack(format!("dimension {} does not fit in u16", track.dim())));
    }
    write_atomic(path.as_ref(), &encode_embedding_track(track))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Iterates the non-blank lines of a JSONL file as `(line_number, text)`.
pub(crate) fn read_jsonl<T, F>(path: &Path, mut parse: F) -> Result<Vec<T>>
where
    F: FnMut(usize, &str) -> std::result::Result<T, String>,
{
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = parse(i + 1, &line).map_err(|message| Error::Parse { path: path.into(), line: i + 1, message })?;
        out.push(value);
    }
    Ok(out)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut buf = BufWriter::new(Vec::new());
    for row in rows {
        serde_json::to_writer(&mut buf, &row)?;
        buf.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    let bytes = buf.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn load_query_embeddings(path: impl AsRef<Path>) -> Result<Vec<QueryEmbedding>> {
    read_jsonl(path.as_ref(), |_, line| {
        let q: QueryEmbedding = serde_json::from_str(line).map_err(|e| e.to_string())?;
        QueryEmbedding::new(q.qid, q.encoder, q.vector).map_err(|e| e.to_string())
    })
}

pub fn write_query_embeddings(path: impl AsRef<Path>, queries: &[QueryEmbedding]) -> Result<()> {
    write_jsonl(path.as_ref(), queries)
}

#[derive(Serialize, Deserialize)]
struct CaptionLine {
    vid: String,
    start: f64,
    end: f64,
    caption: String,
    vector: Vec<f32>,
}

pub fn load_captions(path: impl AsRef<Path>) -> Result<Vec<SegmentCaption>> {
    read_jsonl(path.as_ref(), |_, line| {
        let c: CaptionLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if c.caption.trim().is_empty() {
            return Err("empty caption".into());
        }
        let interval = TimeInterval::new(c.start, c.end).map_err(|e| e.to_string())?;
        SegmentCaption::new(c.vid, interval, c.caption, c.vector).map_err(|e| e.to_string())
    })
}

pub fn write_captions(path: impl AsRef<Path>, captions: &[SegmentCaption]) -> Result<()> {
    write_jsonl(
        path.as_ref(),
        captions.iter().map(|c| CaptionLine {
            vid: c.vid.clone(),
            start: c.interval.start(),
            end: c.interval.end(),
            caption: c.caption.clone(),
            vector: c.embedding().to_vec(),
        }),
    )
}
