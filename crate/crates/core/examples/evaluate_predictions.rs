//! Evaluates the committed golden predictions and prints the metric table.

use std::path::PathBuf;

use vmr_core::harness::jsonl::{load_dataset, load_predictions};
use vmr_core::harness::report::{headline_row, render_table};
use vmr_core::metrics::{evaluate, MAP_IOU_THRESHOLDS};

fn main() -> vmr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic");
    let preds = load_predictions(dir.join("golden_predictions.jsonl"))?;
    let gts = load_dataset(dir.join("dataset.jsonl"))?;
    let report = evaluate(&preds, &gts)?;
    print!("{}", render_table("shots+frames+watershed", &report));
    println!("headline: {}", headline_row(&report));
    for (t, v) in MAP_IOU_THRESHOLDS.iter().zip(&report.map_by_threshold) {
        println!("  mAP@{t:.2} = {v:.2}");
    }
    Ok(())
}
