//! Pipeline configuration, config-file overrides and sweep specifications.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{Encoder, Normalization};
use crate::metrics::DEFAULT_MAX_PREDS;
use crate::proposals::{DEFAULT_MIN_SHOT_LEN_S, DEFAULT_STRIDE_S, DEFAULT_WINDOW_S};

/// Best shot threshold without post-processing.
pub const DEFAULT_LAMBDA: f64 = 53.0;
/// Best shot threshold when SimpleWatershed follows.
pub const DEFAULT_WATERSHED_LAMBDA: f64 = 32.0;
pub const DEFAULT_GAMMA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProposalMethod {
    Shotdetect,
    Slidingwindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MatcherKind {
    /// Per-second joint image-text embeddings, max over frames.
    Frames,
    /// Sentence embeddings of per-segment captions.
    Captions,
}

impl MatcherKind {
    pub fn encoder(&self) -> Encoder {
        match self {
            MatcherKind::Frames => Encoder::Joint,
            MatcherKind::Captions => Encoder::Sentence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub proposal: ProposalMethod,
    pub matcher: MatcherKind,
    pub lambda: f64,
    /// Watershed threshold; `None` skips post-processing.
    pub gamma: Option<f64>,
    pub min_len_s: f64,
    pub normalize: Normalization,
    pub max_preds: usize,
    pub window_s: f64,
    pub stride_s: f64,
}

impl PipelineConfig {
    /// Shot proposals scored by frame embeddings, no post-processing.
    pub fn shot_frames() -> Self {
        Self {
            proposal: ProposalMethod::Shotdetect,
            matcher: MatcherKind::Frames,
            lambda: DEFAULT_LAMBDA,
            gamma: None,
            min_len_s: DEFAULT_MIN_SHOT_LEN_S,
            normalize: Normalization::None,
            max_preds: DEFAULT_MAX_PREDS,
            window_s: DEFAULT_WINDOW_S,
            stride_s: DEFAULT_STRIDE_S,
        }
    }

    /// Shot proposals, frame embeddings, per-video normalization and watershed.
    pub fn shot_frames_watershed() -> Self {
        Self {
            lambda: DEFAULT_WATERSHED_LAMBDA,
            gamma: Some(DEFAULT_GAMMA),
            normalize: Normalization::PerVideo,
            ..Self::shot_frames()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if let Some(g) = self.gamma {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Config(format!("gamma must be in [0, 1], got {g}")));
            }
            if self.proposal == ProposalMethod::Slidingwindow {
                return Err(Error::Config(
                    "watershed needs adjacent proposals; sliding windows overlap".into(),
                ));
            }
        }
        if self.max_preds == 0 {
            return Err(Error::Config("max_preds must be >= 1".into()));
        }
        if !(self.min_len_s.is_finite() && self.min_len_s >= 0.0) {
            return Err(Error::Config(format!("min_len_s must be >= 0, got {}", self.min_len_s)));
        }
        if !(self.window_s > 0.0 && self.stride_s > 0.0) {
            return Err(Error::Config("window_s and stride_s must be > 0".into()));
        }
        Ok(())
    }
}

/// Partially specified configuration, from flags or a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub proposal: Option<ProposalMethod>,
    pub matcher: Option<MatcherKind>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    /// Turn on watershed with the default gamma when no gamma is given.
    #[serde(default)]
    pub watershed: bool,
    pub min_len_s: Option<f64>,
    pub normalize: Option<Normalization>,
    pub max_preds: Option<usize>,
    pub window_s: Option<f64>,
    pub stride_s: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `fallback`.
    pub fn or(self, fallback: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            proposal: self.proposal.or(fallback.proposal),
            matcher: self.matcher.or(fallback.matcher),
            lambda: self.lambda.or(fallback.lambda),
            gamma: self.gamma.or(fallback.gamma),
            watershed: self.watershed || fallback.watershed,
            min_len_s: self.min_len_s.or(fallback.min_len_s),
            normalize: self.normalize.or(fallback.normalize),
            max_preds: self.max_preds.or(fallback.max_preds),
            window_s: self.window_s.or(fallback.window_s),
            stride_s: self.stride_s.or(fallback.stride_s),
        }
    }

    /// Fills unset fields. Defaults depend on whether watershed is on:
    /// lambda 32 with per-video normalization when it is, lambda 53 and raw
    /// scores when it is not.
    pub fn resolve(self) -> Result<PipelineConfig> {
        let gamma = self.gamma.or(self.watershed.then_some(DEFAULT_GAMMA));
        let base = if gamma.is_some() { PipelineConfig::shot_frames_watershed() } else { PipelineConfig::shot_frames() };
        let config = PipelineConfig {
            proposal: self.proposal.unwrap_or(base.proposal),
            matcher: self.matcher.unwrap_or(base.matcher),
            lambda: self.lambda.unwrap_or(base.lambda),
            gamma,
            min_len_s: self.min_len_s.unwrap_or(base.min_len_s),
            normalize: self.normalize.unwrap_or(base.normalize),
            max_preds: self.max_preds.unwrap_or(base.max_preds),
            window_s: self.window_s.unwrap_or(base.window_s),
            stride_s: self.stride_s.unwrap_or(base.stride_s),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lambda,
    Gamma,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Gamma => "gamma",
        })
    }
}

/// One hyperparameter varied over a grid, everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: PipelineConfig,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, base: PipelineConfig) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep grid must be strictly increasing".into()));
        }
        let spec = Self { param, values, base };
        for c in spec.configs() {
            c.validate()?;
        }
        Ok(spec)
    }

    /// `start, start + step, ...` up to and including `stop`.
    pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && start.is_finite() && stop.is_finite()) {
            return Err(Error::Config(format!("bad grid {start}..{stop} step {step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor();
        if n < 0.0 {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        Ok((0..=n as usize).map(|k| start + k as f64 * step).collect())
    }

    pub fn configs(&self) -> Vec<PipelineConfig> {
        self.values
            .iter()
            .map(|&v| {
                let mut c = self.base.clone();
                match self.param {
                    SweepParam::Lambda => c.lambda = v,
                    SweepParam::Gamma => c.gamma = Some(v),
                }
                c
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_watershed_choice() {
        let plain = ConfigOverrides::default().resolve().unwrap();
        assert_eq!(plain.lambda, 53.0);
        assert_eq!(plain.gamma, None);
        assert_eq!(plain.normalize, Normalization::None);

        let ws = ConfigOverrides { watershed: true, ..Default::default() }.resolve().unwrap();
        assert_eq!((ws.lambda, ws.gamma, ws.normalize), (32.0, Some(0.7), Normalization::PerVideo));

        let g = ConfigOverrides { gamma: Some(0.5), ..Default::default() }.resolve().unwrap();
        assert_eq!((g.lambda, g.gamma), (32.0, Some(0.5)));
    }

    #[test]
    fn flags_win_over_file() {
        let file: ConfigOverrides = toml::from_str("lambda = 40.0\nmax_preds = 5\nnormalize = \"per_video\"").unwrap();
        let flags = ConfigOverrides { lambda: Some(45.0), ..Default::default() };
        let c = flags.or(file).resolve().unwrap();
        assert_eq!(c.lambda, 45.0);
        assert_eq!(c.max_preds, 5);
        assert_eq!(c.normalize, Normalization::PerVideo);
        assert!(toml::from_str::<ConfigOverrides>("lamda = 1.0").is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = |o: ConfigOverrides| o.resolve().unwrap_err();
        assert!(bad(ConfigOverrides { lambda: Some(0.0), ..Default::default() }).is_usage());
        assert!(bad(ConfigOverrides { gamma: Some(1.5), ..Default::default() }).is_usage());
        assert!(bad(ConfigOverrides { max_preds: Some(0), ..Default::default() }).is_usage());
        bad(ConfigOverrides {
            proposal: Some(ProposalMethod::Slidingwindow),
            watershed: true,
            ..Default::default()
        });
    }

    #[test]
    fn sweep_grids() {
        let lambdas = SweepSpec::grid(20.0, 70.0, 3.0).unwrap();
        assert_eq!(lambdas.len(), 17);
        assert_eq!(lambdas[16], 68.0);
        assert_eq!(SweepSpec::grid(0.5, 0.9, 0.1).unwrap().len(), 5);
        let spec = SweepSpec::new(SweepParam::Lambda, lambdas, PipelineConfig::shot_frames()).unwrap();
        assert_eq!(spec.configs()[1].lambda, 23.0);
        assert!(SweepSpec::new(SweepParam::Lambda, vec![], PipelineConfig::shot_frames()).is_err());
        assert!(SweepSpec::new(SweepParam::Lambda, vec![3.0, 3.0], PipelineConfig::shot_frames()).is_err());
        assert!(SweepSpec::new(SweepParam::Gamma, vec![0.5, 2.0], PipelineConfig::shot_frames()).is_err());
    }
}
