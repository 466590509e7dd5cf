//! Merging runs of adjacent high-scoring segments.

use vmr_core::postprocess::simple_watershed;
use vmr_core::{ScoredMoment, TimeInterval};

fn main() -> vmr_core::Result<()> {
    let moments = [(0.0, 5.0, 0.8), (5.0, 9.0, 0.75), (9.0, 12.0, 0.3), (12.0, 20.0, 0.9), (20.0, 26.0, 0.72)]
        .into_iter()
        .map(|(s, e, c)| ScoredMoment::new(TimeInterval::new(s, e)?, c))
        .collect::<vmr_core::Result<Vec<_>>>()?;
    for gamma in [0.0, 0.7, 0.78, 0.95] {
        let merged = simple_watershed(&moments, gamma)?;
        let shown: Vec<String> =
            merged.iter().map(|m| format!("[{}, {}]={}", m.start(), m.end(), m.score())).collect();
        println!("gamma {gamma:<4} -> {}", shown.join(" "));
    }
    Ok(())
}
