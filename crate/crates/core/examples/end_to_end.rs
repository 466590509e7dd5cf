//! Generates a fresh synthetic feature set in a temporary directory, runs the
//! three main configurations over it and compares them.

use vmr_core::harness::features::FeatureRoot;
use vmr_core::harness::report::render_table;
use vmr_core::harness::sweep::evaluate_output;
use vmr_core::harness::{run_many, MatcherKind, PipelineConfig, ProposalMethod};
use vmr_core::synthetic::{SyntheticSet, SyntheticSpec};

fn main() -> vmr_core::Result<()> {
    let dir = std::env::temp_dir().join(format!("vmr-end-to-end-{}", std::process::id()));
    let spec = SyntheticSpec { seed: 99, videos: 10, ..SyntheticSpec::default() };
    let set = SyntheticSet::generate(&spec)?;
    let root = FeatureRoot::new(dir.join("features"));
    set.write(&root, &dir.join("dataset.jsonl"))?;

    let configs = [
        ("sliding+frames", PipelineConfig { proposal: ProposalMethod::Slidingwindow, ..PipelineConfig::shot_frames() }),
        ("shots+frames", PipelineConfig::shot_frames()),
        ("shots+frames+watershed", PipelineConfig::shot_frames_watershed()),
        ("shots+captions+watershed", PipelineConfig { matcher: MatcherKind::Captions, ..PipelineConfig::shot_frames_watershed() }),
    ];
    let outputs = run_many(&configs.iter().map(|(_, c)| c.clone()).collect::<Vec<_>>(), &set.dataset, &root)?;
    for ((name, config), out) in configs.iter().zip(&outputs) {
        print!("{}", render_table(name, &evaluate_output(out, &set.dataset, config.max_preds)?));
    }
    std::fs::remove_dir_all(&dir).map_err(|e| vmr_core::Error::io(&dir, e))?;
    Ok(())
}
