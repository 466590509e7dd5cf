use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Args, Parser, Subcommand};
use log::info;

use vmr_core::harness::config::{ConfigOverrides, MatcherKind, PipelineConfig, ProposalMethod, SweepParam, SweepSpec};
use vmr_core::harness::features::{load_frame_track, write_atomic, FeatureRoot};
use vmr_core::harness::jsonl::{
    load_dataset, load_predictions, load_scored, predictions_to_string, scored_to_string, segments_to_string,
    ScoredQuery, VideoSegments,
};
use vmr_core::harness::pipeline::{propose_videos, run_oracle, run_pipeline, score_queries, Skipped};
use vmr_core::harness::report::{headline_row, load_report_json, render_csv, render_table, write_report_json};
use vmr_core::harness::sweep::sweep;
use vmr_core::harness::FEATURE_ROOT_ENV;
use vmr_core::matching::Normalization;
use vmr_core::metrics::{evaluate_with_cap, EvalReport, DEFAULT_MAX_PREDS};
use vmr_core::postprocess::simple_watershed;
use vmr_core::proposals::{detect_shots, DEFAULT_MIN_SHOT_LEN_S};
use vmr_core::record::QueryRecord;
use vmr_core::{Error, Result};

/// Environment variable naming the external feature extractor executable.
const EXTRACTOR_ENV: &str = "VMR_EXTRACTOR";

#[derive(Parser)]
#[command(name = "vmr", version, about = "Zero-shot video moment retrieval over precomputed features")]
struct Cli {
    /// TOML file with pipeline settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory holding frames/, embeddings/, captions/ and queries.jsonl.
    #[arg(long, global = true, env = FEATURE_ROOT_ENV)]
    feature_root: Option<PathBuf>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run the external feature extractor with the given arguments.
    Extract {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        args: Vec<String>,
    },
    /// Detect shots in one frame-track file.
    Shots {
        track: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        min_len: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Candidate segments for every video in a dataset.
    Propose(StageArgs),
    /// Scored proposals per query, before post-processing.
    Score(StageArgs),
    /// Merge adjacent high-scoring moments of a scored file.
    Watershed {
        input: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline: ranked predictions per query.
    Predict(StageArgs),
    /// Evaluate predictions against a dataset.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Evaluate only queries that have a prediction record.
        #[arg(long)]
        only_predicted: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_PREDS)]
        max_preds: usize,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Print CSV instead of the table.
        #[arg(long)]
        csv: bool,
    },
    /// Ground-truth-aware bounds for shot proposals.
    Oracle {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        min_len: Option<f64>,
        /// Write both bounds' predictions and reports here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate the pipeline over a grid of one hyperparameter.
    Sweep {
        #[command(flatten)]
        stage: StageArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Explicit comma-separated grid.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["start", "stop", "step"])]
        values: Vec<f64>,
        #[arg(long, requires_all = ["stop", "step"])]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Render saved evaluation reports.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct PipelineFlags {
    #[arg(long, value_enum)]
    proposal: Option<ProposalMethod>,
    #[arg(long, value_enum)]
    matcher: Option<MatcherKind>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Enable watershed with its default threshold.
    #[arg(long)]
    watershed: bool,
    #[arg(long)]
    min_len: Option<f64>,
    #[arg(long, value_enum)]
    normalize: Option<Normalization>,
    #[arg(long)]
    max_preds: Option<usize>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    stride: Option<f64>,
}

impl PipelineFlags {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            proposal: self.proposal,
            matcher: self.matcher,
            lambda: self.lambda,
            gamma: self.gamma,
            watershed: self.watershed,
            min_len_s: self.min_len,
            normalize: self.normalize,
            max_preds: self.max_preds,
            window_s: self.window,
            stride_s: self.stride,
        }
    }
}

/// Settings from the optional config file.
struct FileSettings {
    feature_root: Option<PathBuf>,
    pipeline: ConfigOverrides,
}

fn load_file_settings(path: Option<&Path>) -> Result<FileSettings> {
    let Some(path) = path else {
        return Ok(FileSettings { feature_root: None, pipeline: ConfigOverrides::default() });
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let feature_root = match table.remove("feature_root") {
        None => None,
        Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(Error::Config(format!("feature_root must be a string, got {other}"))),
    };
    let pipeline = table.try_into().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(FileSettings { feature_root, pipeline })
}

struct Context {
    file: FileSettings,
    feature_root: Option<PathBuf>,
}

impl Context {
    fn root(&self) -> Result<FeatureRoot> {
        self.feature_root
            .clone()
            .or_else(|| self.file.feature_root.clone())
            .map(FeatureRoot::new)
            .ok_or_else(|| Error::Config(format!("no feature root: pass --feature-root or set {FEATURE_ROOT_ENV}")))
    }

    fn config(&self, flags: &PipelineFlags) -> Result<PipelineConfig> {
        flags.overrides().or(self.file.pipeline.clone()).resolve()
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn warn_skipped(skipped: &[Skipped]) {
    if !skipped.is_empty() {
        eprintln!("skipped {} queries with missing features", skipped.len());
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Context { file: load_file_settings(cli.config.as_deref())?, feature_root: cli.feature_root.clone() };
    match cli.command {
        Verb::Extract { args } => {
            let exe = std::env::var_os(EXTRACTOR_ENV).ok_or_else(|| {
                let msg = format!("{EXTRACTOR_ENV} is not set; point it at the feature extractor");
                Error::io(EXTRACTOR_ENV, std::io::Error::new(std::io::ErrorKind::NotFound, msg))
            })?;
            let status = Command::new(&exe).args(&args).status().map_err(|e| Error::io(PathBuf::from(&exe), e))?;
            if !status.success() {
                let msg = format!("extractor exited with {status}");
                return Err(Error::io(PathBuf::from(&exe), std::io::Error::other(msg)));
            }
        }
        Verb::Shots { track, lambda, min_len, out } => {
            let base = ctx.config(&PipelineFlags::default())?;
            let frames = load_frame_track(&track)?;
            let segments = detect_shots(
                &frames,
                lambda.unwrap_or(base.lambda),
                min_len.unwrap_or(DEFAULT_MIN_SHOT_LEN_S),
            )?;
            let row = VideoSegments { vid: frames.vid.clone(), duration: frames.duration_s(), segments };
            emit(out.as_deref(), &segments_to_string(&[row]))?;
        }
        Verb::Propose(stage) => {
            let config = ctx.config(&stage.pipeline)?;
            let dataset = load_dataset(&stage.dataset)?;
            let (videos, skipped) = propose_videos(&config, &dataset, &ctx.root()?)?;
            warn_skipped(&skipped);
            let rows: Vec<_> = videos
                .into_iter()
                .map(|(vid, duration, segments)| VideoSegments { vid, duration, segments })
                .collect();
            emit(stage.out.as_deref(), &segments_to_string(&rows))?;
        }
        Verb::Score(stage) => {
            let config = ctx.config(&stage.pipeline)?;
            let dataset = load_dataset(&stage.dataset)?;
            let (rows, skipped) = score_queries(&config, &dataset, &ctx.root()?)?;
            warn_skipped(&skipped);
            let rows: Vec<_> = rows.into_iter().map(|(qid, vid, moments)| ScoredQuery { qid, vid, moments }).collect();
            emit(stage.out.as_deref(), &scored_to_string(&rows))?;
        }
        Verb::Watershed { input, gamma, out } => {
            let flags = PipelineFlags { gamma, watershed: true, ..Default::default() };
            let gamma = ctx.config(&flags)?.gamma.expect("watershed flag sets gamma");
            let rows = load_scored(&input)?
                .into_iter()
                .map(|r| Ok(ScoredQuery { moments: simple_watershed(&r.moments, gamma)?, ..r }))
                .collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &scored_to_string(&rows))?;
        }
        Verb::Predict(stage) => {
            let config = ctx.config(&stage.pipeline)?;
            info!("config: {config:?}");
            let dataset = load_dataset(&stage.dataset)?;
            let output = run_pipeline(&config, &dataset, &ctx.root()?)?;
            warn_skipped(&output.skipped);
            emit(stage.out.as_deref(), &predictions_to_string(&output.predictions))?;
        }
        Verb::Eval { predictions, dataset, only_predicted, max_preds, json, csv } => {
            let preds = load_predictions(&predictions)?;
            let mut gts = load_dataset(&dataset)?;
            if only_predicted {
                let have: std::collections::HashSet<u64> = preds.iter().map(|p| p.qid).collect();
                gts.retain(|g| have.contains(&g.qid));
            }
            let report = evaluate_with_cap(&preds, &gts, max_preds)?;
            let name = predictions.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            print_report(&name, &report, csv)?;
            if let Some(path) = json {
                write_report_json(path, &report)?;
            }
        }
        Verb::Oracle { dataset, lambda, min_len, out_dir } => {
            let flags = PipelineFlags { lambda, min_len, ..Default::default() };
            let config = ctx.config(&flags)?;
            let dataset = load_dataset(&dataset)?;
            let output = run_oracle(&config, &dataset, &ctx.root()?)?;
            warn_skipped(&output.skipped);
            let subset = evaluated(&dataset, &output.skipped);
            let scores = evaluate_with_cap(&output.scores, &subset, config.max_preds)?;
            let merged = evaluate_with_cap(&output.merged, &subset, config.max_preds)?;
            print!("{}", render_table("oracle_scores", &scores));
            print!("{}", render_table("oracle_merge", &merged));
            if let Some(dir) = out_dir {
                emit(Some(&dir.join("oracle_scores.jsonl")), &predictions_to_string(&output.scores))?;
                emit(Some(&dir.join("oracle_merge.jsonl")), &predictions_to_string(&output.merged))?;
                write_report_json(dir.join("oracle_scores.json"), &scores)?;
                write_report_json(dir.join("oracle_merge.json"), &merged)?;
            }
        }
        Verb::Sweep { stage, param, values, start, stop, step } => {
            let base = ctx.config(&stage.pipeline)?;
            let grid = match (start, stop, step) {
                (Some(a), Some(b), Some(s)) => SweepSpec::grid(a, b, s)?,
                _ => values,
            };
            let spec = SweepSpec::new(param, grid, base)?;
            let dataset = load_dataset(&stage.dataset)?;
            let table = sweep(&spec, &dataset, &ctx.root()?)?;
            emit(stage.out.as_deref(), &table.to_csv())?;
            if let Some(best) = table.best() {
                eprintln!("best {param} = {} (avg mAP {:.2})", best.value, best.report.map_avg);
            }
        }
        Verb::Report { inputs, csv } => {
            let reports = inputs
                .iter()
                .map(|p| {
                    let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    Ok((name, load_report_json(p)?))
                })
                .collect::<Result<Vec<(String, EvalReport)>>>()?;
            if csv {
                let rows: Vec<(&str, &EvalReport)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
                print!("{}", render_csv(&rows));
            } else {
                for (name, r) in &reports {
                    print!("{}", render_table(name, r));
                }
            }
        }
    }
    Ok(())
}

fn evaluated(dataset: &[QueryRecord], skipped: &[Skipped]) -> Vec<QueryRecord> {
    let gone: std::collections::HashSet<u64> = skipped.iter().map(|s| s.qid).collect();
    dataset.iter().filter(|r| !gone.contains(&r.qid)).cloned().collect()
}

fn print_report(name: &str, report: &EvalReport, csv: bool) -> Result<()> {
    if csv {
        print!("{}", render_csv(&[(name, report)]));
    } else {
        print!("{}", render_table(name, report));
        println!("{}", headline_row(report));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
