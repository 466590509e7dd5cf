//! Regenerates the committed synthetic fixture set and its golden predictions.
//!
//! ```text
//! cargo run --example make_fixtures -- [OUT_DIR]
//! ```
//!
//! OUT_DIR defaults to `tests/fixtures/synthetic` inside this crate.

use std::path::PathBuf;

use vmr_core::harness::features::FeatureRoot;
use vmr_core::harness::jsonl::write_predictions;
use vmr_core::harness::{run_pipeline, PipelineConfig};
use vmr_core::synthetic::{SyntheticSet, SyntheticSpec};

fn main() -> vmr_core::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic"));
    let set = SyntheticSet::generate(&SyntheticSpec::default())?;
    let root = FeatureRoot::new(out.join("features"));
    let dataset_path = out.join("dataset.jsonl");
    set.write(&root, &dataset_path)?;

    let config = PipelineConfig::shot_frames_watershed();
    let output = run_pipeline(&config, &set.dataset, &root)?;
    write_predictions(out.join("golden_predictions.jsonl"), &output.predictions)?;
    println!(
        "wrote {} videos, {} queries and golden predictions to {}",
        set.videos.len(),
        set.dataset.len(),
        out.display()
    );
    Ok(())
}
