//! Sweeps the shot threshold and prints the CSV a plot would be drawn from.

use std::path::PathBuf;

use vmr_core::harness::config::{SweepParam, SweepSpec};
use vmr_core::harness::features::FeatureRoot;
use vmr_core::harness::jsonl::load_dataset;
use vmr_core::harness::{sweep, PipelineConfig};

fn main() -> vmr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic");
    let root = FeatureRoot::new(dir.join("features"));
    let dataset = load_dataset(dir.join("dataset.jsonl"))?;
    let spec = SweepSpec::new(SweepParam::Lambda, SweepSpec::grid(20.0, 140.0, 12.0)?, PipelineConfig::shot_frames())?;
    let table = sweep(&spec, &dataset, &root)?;
    print!("{}", table.to_csv());
    if let Some(best) = table.best() {
        println!("# best lambda {} with avg mAP {:.2}", best.value, best.report.map_avg);
    }
    Ok(())
}
