//! File formats, pipeline orchestration, sweeps and reports.

pub mod config;
pub mod features;
pub mod jsonl;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::{ConfigOverrides, MatcherKind, PipelineConfig, ProposalMethod, SweepParam, SweepSpec};
pub use features::FeatureRoot;
pub use pipeline::{run_many, run_oracle, run_pipeline, OracleOutput, PipelineOutput, Skipped};
pub use sweep::{sweep, SweepTable};

/// Environment variable that overrides the feature root directory.
pub const FEATURE_ROOT_ENV: &str = "VMR_FEATURE_ROOT";
