//! JSON run configuration.

use std::path::{Path, PathBuf};

use fbpanel_core::identified::{Backend, ExogeneityMode, ScanSpec};
use fbpanel_core::model::{dgp_default, ModelConfig, MAX_T};
use fbpanel_core::{FeedbackProcess, HeterogeneityDist, HeterogeneityGrid, Link};
use serde::Deserialize;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub model: ModelBlock,
    #[serde(default)]
    pub dgp: DgpBlock,
    #[serde(default)]
    pub scan: ScanBlock,
    #[serde(default)]
    pub mode: ModeSelection,
    #[serde(default)]
    pub backend: BackendChoice,
    #[serde(default)]
    pub output: OutputBlock,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub diagnose: DiagnoseBlock,
    #[serde(default)]
    pub estimate: EstimateBlock,
    #[serde(default)]
    pub simulate: SimulateBlock,
    pub export_lp: Option<ExportBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub link: Link,
    pub periods: usize,
    /// Number of support points of the default design.
    #[serde(default = "default_support")]
    pub support: usize,
    pub theta: ThetaList,
}

fn default_support() -> usize {
    31
}

/// A single coefficient or a list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ThetaList {
    One(f64),
    Many(Vec<f64>),
}

impl ThetaList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ThetaList::One(t) => vec![*t],
            ThetaList::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum DgpBlock {
    /// Bernoulli(1/2) covariates and normal-percentile heterogeneity.
    #[default]
    Default,
    Explicit(ExplicitDgp),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitDgp {
    pub grid: Vec<f64>,
    pub pi: PiSpec,
    pub feedback: FeedbackSpec,
    /// `Pr(X_1 = 1)`.
    #[serde(default = "half")]
    pub initial_share: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PiSpec {
    /// Same weights for both initial covariate values.
    Common(Vec<f64>),
    /// Weights given `X_1 = 0`, then given `X_1 = 1`.
    ByInitial([Vec<f64>; 2]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FeedbackSpec {
    Constant(f64),
    /// `G[y][x]` as a function of the previous period's outcome and
    /// covariate only, the same for every period and support point.
    LaggedCell([[f64; 2]; 2]),
    /// Every entry in storage order: period, packed history, support point.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    /// Scan `[theta - half_width, theta + half_width]` unless `min` and
    /// `max` are both given.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_bisect_tol")]
    pub bisect_tol: f64,
}

fn default_half_width() -> f64 {
    1.5
}
fn default_step() -> f64 {
    0.02
}
fn default_bisect_tol() -> f64 {
    1e-3
}

impl Default for ScanBlock {
    fn default() -> Self {
        ScanBlock {
            half_width: default_half_width(),
            min: None,
            max: None,
            step: default_step(),
            bisect_tol: default_bisect_tol(),
        }
    }
}

impl ScanBlock {
    pub fn spec(&self, theta: f64) -> ScanSpec {
        let (theta_min, theta_max) = match (self.min, self.max) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => (theta - self.half_width, theta + self.half_width),
        };
        ScanSpec { theta_min, theta_max, step: self.step, bisect_tol: self.bisect_tol }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Predetermined,
    Strict,
    #[default]
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<ExogeneityMode> {
        match self {
            ModeSelection::Predetermined => vec![ExogeneityMode::Predetermined],
            ModeSelection::Strict => vec![ExogeneityMode::StrictlyExogenous],
            ModeSelection::Both => vec![ExogeneityMode::Predetermined, ExogeneityMode::StrictlyExogenous],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    #[default]
    ColumnGeneration,
    Direct,
}

impl From<BackendChoice> for Backend {
    fn from(b: BackendChoice) -> Self {
        match b {
            BackendChoice::ColumnGeneration => Backend::ColumnGeneration,
            BackendChoice::Direct => Backend::Direct,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseBlock {
    #[serde(default = "default_independence_tol")]
    pub independence_tol: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_independence_tol() -> f64 {
    fbpanel_core::diagnostics::INDEPENDENCE_TOL
}
fn default_fd_step() -> f64 {
    fbpanel_core::diagnostics::FD_STEP
}

impl Default for DiagnoseBlock {
    fn default() -> Self {
        DiagnoseBlock { independence_tol: default_independence_tol(), fd_step: default_fd_step() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateBlock {
    pub dataset: Option<PathBuf>,
    #[serde(default = "default_bracket")]
    pub bracket: [f64; 2],
    #[serde(default = "default_estimator_tol")]
    pub tol: f64,
}

fn default_bracket() -> [f64; 2] {
    [-5.0, 5.0]
}
fn default_estimator_tol() -> f64 {
    fbpanel_core::estimators::ESTIMATOR_TOL
}

impl Default for EstimateBlock {
    fn default() -> Self {
        EstimateBlock { dataset: None, bracket: default_bracket(), tol: default_estimator_tol() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateBlock {
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportObjective {
    #[default]
    None,
    ApeMin,
    ApeMax,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportBlock {
    pub theta_tilde: f64,
    #[serde(default)]
    pub objective: ExportObjective,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema));
        }
        let m = &self.model;
        if !(2..=MAX_T).contains(&m.periods) {
            return bad(format!("model.periods = {} must lie in [2, {MAX_T}]", m.periods));
        }
        if m.support == 0 {
            return bad("model.support must be at least 1".into());
        }
        let thetas = m.theta.values();
        if thetas.is_empty() || thetas.iter().any(|t| !t.is_finite()) {
            return bad("model.theta must hold at least one finite value".into());
        }
        let s = &self.scan;
        if !(s.step > 0.0) || !(s.bisect_tol > 0.0) || !(s.half_width > 0.0) {
            return bad("scan.step, scan.bisect_tol and scan.half_width must be positive".into());
        }
        if s.min.is_some() != s.max.is_some() {
            return bad("scan.min and scan.max must be given together".into());
        }
        if let (Some(lo), Some(hi)) = (s.min, s.max) {
            if !(lo < hi) {
                return bad(format!("scan.min = {lo} must be below scan.max = {hi}"));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if !(self.diagnose.fd_step > 0.0) || !(self.diagnose.independence_tol >= 0.0) {
            return bad("diagnose.fd_step must be positive and diagnose.independence_tol nonnegative".into());
        }
        let [lo, hi] = self.estimate.bracket;
        if !(lo < hi) || !(self.estimate.tol > 0.0) {
            return bad("estimate.bracket must be increasing and estimate.tol positive".into());
        }
        if self.simulate.n == Some(0) {
            return bad("simulate.n must be at least 1".into());
        }
        // Building every model surfaces table and domain errors at load time.
        for theta in thetas {
            self.model_config(theta)?;
        }
        Ok(())
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.model.theta.values()
    }

    /// The data generating process at coefficient `theta`.
    pub fn model_config(&self, theta: f64) -> Result<ModelConfig, CliError> {
        let m = &self.model;
        let built = match &self.dgp {
            DgpBlock::Default => dgp_default(m.periods, theta, m.link, m.support),
            DgpBlock::Explicit(e) => explicit_model(e, m.periods, theta, m.link),
        };
        built.map_err(|e| CliError::Config(format!("model at theta = {theta}: {e}")))
    }
}

fn explicit_model(e: &ExplicitDgp, periods: usize, theta: f64, link: Link) -> fbpanel_core::Result<ModelConfig> {
    let grid = HeterogeneityGrid::new(e.grid.clone())?;
    let k = grid.len();
    let pi = match &e.pi {
        PiSpec::Common(w) => HeterogeneityDist::independent(w.clone())?,
        PiSpec::ByInitial([w0, w1]) => HeterogeneityDist::new(w0.clone(), w1.clone())?,
    };
    let feedback = match &e.feedback {
        FeedbackSpec::Constant(g) => FeedbackProcess::constant(periods, k, *g)?,
        FeedbackSpec::LaggedCell(g) => FeedbackProcess::from_fn(periods, k, |t, ys, xs, _| {
            g[ys[t - 2] as usize][xs[t - 2] as usize]
        })?,
        FeedbackSpec::Values(v) => {
            let expected: usize = (2..=periods).map(|t| (1usize << (2 * (t - 1))) * k).sum();
            if v.len() != expected {
                return Err(fbpanel_core::Error::DimensionMismatch(format!(
                    "feedback.values has {} entries, expected {expected}",
                    v.len()
                )));
            }
            let mut iter = v.iter();
            FeedbackProcess::from_fn(periods, k, |_, _, _, _| *iter.next().expect("length checked"))?
        }
    };
    let share = e.initial_share;
    ModelConfig::new(theta, link, grid, pi, feedback, [1.0 - share, share])
}
