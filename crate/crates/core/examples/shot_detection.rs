//! Content-aware shot detection on a generated block track, showing how the
//! threshold trades missed cuts against spurious ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vmr_core::proposals::{content_values, detect_shots, DEFAULT_MIN_SHOT_LEN_S};
use vmr_core::synthetic::block_track;

fn main() -> vmr_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let blocks = block_track(&mut rng, 5, 24.0, 12, 45, DEFAULT_MIN_SHOT_LEN_S)?;
    let signal = content_values(&blocks.track);
    let peak = signal.values.iter().copied().fold(0.0, f64::max);
    println!(
        "{} frames at {} fps, true cuts at frames {:?}, peak content value {peak:.1}",
        blocks.track.frame_count(),
        blocks.track.fps(),
        blocks.cut_frames
    );
    for lambda in [5.0, 20.0, 40.0, 80.0] {
        let shots = detect_shots(&blocks.track, lambda, DEFAULT_MIN_SHOT_LEN_S)?;
        let bounds: Vec<String> = shots.iter().map(|s| format!("[{:.2}, {:.2}]", s.start(), s.end())).collect();
        println!("lambda {lambda:>4}: {} shots {}", shots.len(), bounds.join(" "));
    }
    Ok(())
}
