//! Moment proposals: content-aware shot detection over HSV frame tracks and the
//! fixed sliding-window baseline.

use crate::error::{Error, Result};
use crate::interval::TimeInterval;

/// Default minimum shot length; shorter shots have their closing cut suppressed.
pub const DEFAULT_MIN_SHOT_LEN_S: f64 = 0.4;
pub const DEFAULT_WINDOW_S: f64 = 15.0;
pub const DEFAULT_STRIDE_S: f64 = 10.0;
/// Sliding windows clipped below this length at the end of the video are dropped.
pub const MIN_TAIL_WINDOW_S: f64 = 1.0;

/// Downscaled HSV frames of one video at a fixed frame rate.
///
/// Each frame is stored as three planes (H, S, V) of `width * height` bytes,
/// row-major, with hue rescaled to 0..=255.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrack {
    pub vid: String,
    fps: f32,
    width: u16,
    height: u16,
    data: Vec<u8>,
}

impl FrameTrack {
    pub fn new(vid: impl Into<String>, fps: f32, width: u16, height: u16, data: Vec<u8>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidFrameTrack(format!("fps must be > 0, got {fps}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrameTrack(format!("empty frame size {width}x{height}")));
        }
        let frame_len = 3 * width as usize * height as usize;
        if data.len() % frame_len != 0 {
            return Err(Error::InvalidFrameTrack(format!(
                "{} bytes is not a whole number of {width}x{height} frames",
                data.len()
            )));
        }
        if data.len() / frame_len < 2 {
            return Err(Error::InvalidFrameTrack("need at least 2 frames".into()));
        }
        Ok(Self { vid: vid.into(), fps, width, height, data })
    }

    /// Builds a track from a list of equally sized frames.
    pub fn from_frames(vid: impl Into<String>, fps: f32, width: u16, height: u16, frames: &[Vec<u8>]) -> Result<Self> {
        let frame_len = 3 * width as usize * height as usize;
        if let Some(bad) = frames.iter().position(|f| f.len() != frame_len) {
            return Err(Error::InvalidFrameTrack(format!(
                "frame {bad} has {} bytes, expected {frame_len}",
                frames[bad].len()
            )));
        }
        Self::new(vid, fps, width, height, frames.concat())
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn frame_len(&self) -> usize {
        3 * self.width as usize * self.height as usize
    }

    pub fn frame_count(&self) -> usize {
        self.data.len() / self.frame_len()
    }

    pub fn duration_s(&self) -> f64 {
        self.frame_count() as f64 / self.fps as f64
    }

    /// Planar H, S, V bytes of frame `i`.
    pub fn frame(&self, i: usize) -> &[u8] {
        let n = self.frame_len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[u8]> {
        self.data.chunks_exact(self.frame_len())
    }

    pub fn raw(&self) -> &[u8] {
        &self.data
    }

    /// Same track with frame order reversed.
    pub fn reversed(&self) -> FrameTrack {
        let data = self.data.chunks_exact(self.frame_len()).rev().flatten().copied().collect();
        FrameTrack { data, ..self.clone() }
    }
}

/// Per adjacent frame pair colour-change magnitude, in 8-bit units.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentSignal {
    pub values: Vec<f64>,
}

/// Mean over H, S and V of the mean absolute per-pixel difference between
/// consecutive frames. Hue is compared linearly, without wraparound.
pub fn content_values(track: &FrameTrack) -> ContentSignal {
    let n = track.frame_len() as f64;
    let values = track
        .frames()
        .zip(track.frames().skip(1))
        .map(|(a, b)| {
            let total: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
            // Channel planes have equal size, so the mean of channel means is
            // the mean over all bytes.
            total as f64 / n
        })
        .collect();
    ContentSignal { values }
}

/// Frame indices at which a new shot starts (excluding frame 0).
///
/// A cut before frame `i + 1` fires when `values[i] >= lambda` and the shot it
/// closes spans at least `min_len_s`.
pub fn cut_frames(signal: &ContentSignal, fps: f64, lambda: f64, min_len_s: f64) -> Result<Vec<usize>> {
    check_detection_args(lambda, min_len_s)?;
    let mut cuts = Vec::new();
    let mut shot_start = 0usize;
    for (i, &v) in signal.values.iter().enumerate() {
        let cut = i + 1;
        if v >= lambda && (cut - shot_start) as f64 / fps >= min_len_s {
            cuts.push(cut);
            shot_start = cut;
        }
    }
    Ok(cuts)
}

/// Shot segments from a precomputed content signal. The segments partition
/// `[0, frame_count / fps]`.
pub fn shots_from_signal(signal: &ContentSignal, fps: f64, lambda: f64, min_len_s: f64) -> Result<Vec<TimeInterval>> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidArgument(format!("fps must be > 0, got {fps}")));
    }
    let frame_count = signal.values.len() + 1;
    let cuts = cut_frames(signal, fps, lambda, min_len_s)?;
    let bounds: Vec<usize> = std::iter::once(0).chain(cuts).chain(std::iter::once(frame_count)).collect();
    bounds
        .windows(2)
        .map(|w| TimeInterval::new(w[0] as f64 / fps, w[1] as f64 / fps))
        .collect()
}

/// Content-aware shot detection; returns consecutive segments covering the
/// whole track.
pub fn detect_shots(track: &FrameTrack, lambda: f64, min_len_s: f64) -> Result<Vec<TimeInterval>> {
    shots_from_signal(&content_values(track), track.fps() as f64, lambda, min_len_s)
}

fn check_detection_args(lambda: f64, min_len_s: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
    }
    if !(min_len_s.is_finite() && min_len_s >= 0.0) {
        return Err(Error::InvalidArgument(format!("min shot length must be >= 0, got {min_len_s}")));
    }
    Ok(())
}

/// Fixed-length windows starting every `stride_s` seconds, clipped to the
/// video. A clipped tail window shorter than [`MIN_TAIL_WINDOW_S`] is dropped.
pub fn sliding_windows(duration_s: f64, window_s: f64, stride_s: f64) -> Result<Vec<TimeInterval>> {
    for (name, v) in [("duration", duration_s), ("window", window_s), ("stride", stride_s)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
        }
    }
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        // Multiply rather than accumulate so window starts do not drift.
        let start = k as f64 * stride_s;
        if start >= duration_s {
            break;
        }
        let end = (start + window_s).min(duration_s);
        // Only a clipped window can fall below the tail limit; the first window
        // is always kept so short videos still get a proposal.
        if end - start >= MIN_TAIL_WINDOW_S || k == 0 {
            out.push(TimeInterval::new(start, end)?);
        }
        k += 1;
    }
    Ok(out)
}
