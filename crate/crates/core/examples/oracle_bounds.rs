//! Ground-truth-aware bounds for shot proposals next to the real pipeline.

use std::path::PathBuf;

use vmr_core::harness::features::FeatureRoot;
use vmr_core::harness::jsonl::load_dataset;
use vmr_core::harness::report::render_table;
use vmr_core::harness::{run_oracle, run_pipeline, PipelineConfig};
use vmr_core::metrics::evaluate;

fn main() -> vmr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic");
    let root = FeatureRoot::new(dir.join("features"));
    let dataset = load_dataset(dir.join("dataset.jsonl"))?;
    let config = PipelineConfig::shot_frames_watershed();

    let bounds = run_oracle(&config, &dataset, &root)?;
    let pipeline = run_pipeline(&config, &dataset, &root)?;
    print!("{}", render_table("oracle_scores", &evaluate(&bounds.scores, &dataset)?));
    print!("{}", render_table("oracle_merge", &evaluate(&bounds.merged, &dataset)?));
    print!("{}", render_table("pipeline", &evaluate(&pipeline.predictions, &dataset)?));
    Ok(())
}
