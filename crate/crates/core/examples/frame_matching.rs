//! Scores shot proposals against a query with per-second frame embeddings.

use std::path::PathBuf;

use vmr_core::harness::features::{load_embedding_track, load_frame_track, load_query_embeddings, FeatureRoot};
use vmr_core::harness::jsonl::load_dataset;
use vmr_core::matching::{score_proposals, Encoder, Normalization, SegmentFeatures};
use vmr_core::proposals::detect_shots;

fn main() -> vmr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic");
    let root = FeatureRoot::new(dir.join("features"));
    let query = &load_dataset(dir.join("dataset.jsonl"))?[0];
    let embedding = load_query_embeddings(root.query_embeddings())?
        .into_iter()
        .find(|q| q.qid == query.qid && q.encoder == Encoder::Joint)
        .expect("fixture has a joint embedding per query");

    let shots = detect_shots(&load_frame_track(root.frames(&query.vid))?, 32.0, 0.4)?;
    let track = load_embedding_track(root.embeddings(&query.vid))?;
    println!("query {} on {}: {:?}", query.qid, query.vid, query.query);
    println!("ground truth: {:?}", query.gt_windows());
    for normalize in [Normalization::None, Normalization::PerVideo] {
        let scored = score_proposals(&shots, SegmentFeatures::Frames(&track), &embedding, normalize)?;
        println!("{normalize:?}:");
        for m in &scored {
            println!("  [{:>5.1}, {:>5.1}]  {:.3}", m.start(), m.end(), m.score());
        }
    }
    Ok(())
}
