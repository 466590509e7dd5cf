//! Scores shots through their caption embeddings instead of frames.

use std::path::PathBuf;

use vmr_core::harness::features::{load_captions, load_query_embeddings, FeatureRoot};
use vmr_core::harness::jsonl::load_dataset;
use vmr_core::matching::{score_proposals, Encoder, Normalization, SegmentFeatures};

fn main() -> vmr_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic");
    let root = FeatureRoot::new(dir.join("features"));
    let query = &load_dataset(dir.join("dataset.jsonl"))?[1];
    let embedding = load_query_embeddings(root.query_embeddings())?
        .into_iter()
        .find(|q| q.qid == query.qid && q.encoder == Encoder::Sentence)
        .expect("fixture has a sentence embedding per query");
    let captions = load_captions(root.captions(&query.vid))?;
    let segments: Vec<_> = captions.iter().map(|c| c.interval).collect();
    let scored = score_proposals(&segments, SegmentFeatures::Captions(&captions), &embedding, Normalization::None)?;

    println!("query: {:?}", query.query);
    for (m, c) in scored.iter().zip(&captions) {
        println!("  [{:>5.1}, {:>5.1}]  {:.3}  {}", m.start(), m.end(), m.score(), c.caption);
    }
    Ok(())
}
