//! Zero-shot video moment retrieval over precomputed features.
//!
//! The pipeline proposes candidate segments (shot boundaries from a frame
//! track, or fixed sliding windows), scores each against a query embedding,
//! optionally merges adjacent high-scoring segments, and ranks the result.
//! [`metrics`] reproduces the standard QVHighlights moment-retrieval
//! evaluation and [`oracle`] gives ground-truth-aware bounds for a proposal
//! set. No neural inference happens here; embeddings and captions are read
//! from files written by an external extractor.

pub mod error;
pub mod harness;
pub mod interval;
pub mod matching;
pub mod metrics;
pub mod oracle;
pub mod postprocess;
pub mod proposals;
pub mod record;
pub mod synthetic;

pub use error::{Error, Result};
pub use interval::TimeInterval;
pub use record::{PredictionRecord, QueryRecord, ScoredMoment};
