//! Experiment configuration: JSON in, fully resolved manifest out.
//!
//! A config names one experiment kind plus its parameter block. Parsing is
//! strict: a missing `schema_version`, an unknown kind, or any unrecognized
//! key fails before anything runs. Resolution fills every defaulted or
//! computed field (matched lambda2, empirical centers, generated seeds) so
//! the emitted manifest can be re-fed verbatim and reproduce the run.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::dynamics::Mode;
use crate::error::{Error, Result};
use crate::escape::AbsorbAt;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    Density,
    EscapeAnalytic,
    EscapeMc,
    SuccessRate,
    NoiseScan,
    Fit,
    Bound,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Density => "density",
            Kind::EscapeAnalytic => "escape-analytic",
            Kind::EscapeMc => "escape-mc",
            Kind::SuccessRate => "success-rate",
            Kind::NoiseScan => "noise-scan",
            Kind::Fit => "fit",
            Kind::Bound => "bound",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw shape of the config file. `params` stays untyped until the kind is
/// known; unknown top-level keys are rejected here, unknown parameter keys
/// by the per-kind structs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u64,
    kind: Kind,
    #[serde(default)]
    master_seed: Option<u64>,
    #[serde(default)]
    out: Option<PathBuf>,
    params: serde_json::Value,
}

/// A parsed experiment configuration. `master_seed` may still be absent
/// until [`ExperimentConfig::resolve`] runs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub master_seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub params: Params,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Params {
    Simulate(SimulateParams),
    Density(DensityParams),
    EscapeAnalytic(EscapeAnalyticParams),
    EscapeMc(EscapeMcParams),
    SuccessRate(SuccessRateParams),
    NoiseScan(NoiseScanParams),
    Fit(FitParams),
    Bound(BoundParams),
}

impl Params {
    pub fn kind(&self) -> Kind {
        match self {
            Params::Simulate(_) => Kind::Simulate,
            Params::Density(_) => Kind::Density,
            Params::EscapeAnalytic(_) => Kind::EscapeAnalytic,
            Params::EscapeMc(_) => Kind::EscapeMc,
            Params::SuccessRate(_) => Kind::SuccessRate,
            Params::NoiseScan(_) => Kind::NoiseScan,
            Params::Fit(_) => Kind::Fit,
            Params::Bound(_) => Kind::Bound,
        }
    }
}

/// Parses and schema-checks a config document. Errors carry serde's
/// line/column diagnostics.
pub fn parse_config(json: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "unsupported schema_version {}, expected {SCHEMA_VERSION}",
            raw.schema_version
        )));
    }
    let in_params = |e: serde_json::Error| Error::Config(format!("invalid params: {e}"));
    let params = match raw.kind {
        Kind::Simulate => Params::Simulate(serde_json::from_value(raw.params).map_err(in_params)?),
        Kind::Density => Params::Density(serde_json::from_value(raw.params).map_err(in_params)?),
        Kind::EscapeAnalytic => {
            Params::EscapeAnalytic(serde_json::from_value(raw.params).map_err(in_params)?)
        }
        Kind::EscapeMc => Params::EscapeMc(serde_json::from_value(raw.params).map_err(in_params)?),
        Kind::SuccessRate => {
            Params::SuccessRate(serde_json::from_value(raw.params).map_err(in_params)?)
        }
        Kind::NoiseScan => {
            Params::NoiseScan(serde_json::from_value(raw.params).map_err(in_params)?)
        }
        Kind::Fit => Params::Fit(serde_json::from_value(raw.params).map_err(in_params)?),
        Kind::Bound => Params::Bound(serde_json::from_value(raw.params).map_err(in_params)?),
    };
    Ok(ExperimentConfig {
        master_seed: raw.master_seed,
        out: raw.out,
        params,
    })
}

/// Fully resolved configuration; everything a rerun needs. Serializes as
/// the manifest. The output directory is deliberately not part of it, so
/// the same experiment lands byte-identical wherever it is written.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub schema_version: u64,
    pub kind: Kind,
    pub master_seed: u64,
    pub params: Params,
}

// ---------------------------------------------------------------------
// shared sub-specs

/// Toy empirical loss: n two-dimensional points near (1, 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    pub n: usize,
    pub data_std: f64,
    pub data_seed: u64,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    pub center: Vec<f64>,
    pub curvatures: Vec<f64>,
    #[serde(default)]
    pub base_loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleWellSpec {
    pub min_a: f64,
    pub curvature_a: f64,
    pub curvature_b_abs: f64,
    pub barrier: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandscapeSpec {
    Quadratic(QuadraticSpec),
    Toy(ToySpec),
    DoubleWell(DoubleWellSpec),
}

/// State-dependent scalar noise block. `center` and `curvature` may be
/// omitted when the landscape pins them (a one-dimensional quadratic).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarNoiseSpec {
    pub sigma_g: f64,
    #[serde(default)]
    pub sigma_h: f64,
    #[serde(default)]
    pub rho_gh: f64,
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(default)]
    pub curvature: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

fn one() -> f64 {
    1.0
}

fn one_u64() -> u64 {
    1
}

// ---------------------------------------------------------------------
// per-kind parameter blocks

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub landscape: LandscapeSpec,
    pub mode: Mode,
    pub eta: f64,
    pub steps: u64,
    #[serde(default = "one_u64")]
    pub record_every: u64,
    pub w0: Vec<f64>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub lambda2: Option<f64>,
    #[serde(default)]
    pub noise: Option<ScalarNoiseSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

/// Stationary density on a grid. Two modes: `kappa` alone gives the
/// simplified power law; `rho_gh` + `eta` + `curvature` give the full
/// cross-correlated form (kappa is then derived, not supplied).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    pub sigma_g: f64,
    pub sigma_h: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub rho_gh: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub curvature: Option<f64>,
    /// Normalization window half-width for the full form; defaulted from
    /// the grid and the tail scale during resolution.
    #[serde(default)]
    pub half_width: Option<f64>,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeAnalyticParams {
    pub eta: f64,
    pub sigma_g: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub h_a: Vec<f64>,
    pub h_b_abs: Vec<f64>,
    pub delta_l: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeMcParams {
    pub well: DoubleWellSpec,
    pub sigma_g: f64,
    pub sigma_h: f64,
    pub eta: f64,
    pub mode: Mode,
    pub trials: usize,
    pub max_steps: u64,
    #[serde(default = "default_absorb")]
    pub absorb: AbsorbAt,
    #[serde(default)]
    pub emit_times: bool,
}

fn default_absorb() -> AbsorbAt {
    AbsorbAt::FarMinimum
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessRateParams {
    pub toy: ToySpec,
    pub eta: f64,
    pub steps: u64,
    pub runs: usize,
    pub lambda1_values: Vec<f64>,
    /// Noise amplitude; when absent it is matched to the minibatch gradient
    /// noise at the empirical minimum and written back here.
    #[serde(default)]
    pub lambda2: Option<f64>,
    #[serde(default)]
    pub include_sgd: bool,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_match_draws")]
    pub match_draws: usize,
    #[serde(default)]
    pub region: Option<RegionSpec>,
}

fn default_match_draws() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseScanParams {
    pub toy: ToySpec,
    /// Scan origin; defaults to the empirical minimum of the toy loss.
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    pub half_width: f64,
    pub points: usize,
    pub batch_size: usize,
    pub draws: usize,
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySource {
    pub kappa: f64,
    pub sigma_g: f64,
    pub sigma_h: f64,
    #[serde(default)]
    pub center: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSource {
    pub curvature: f64,
    #[serde(default)]
    pub center: f64,
    pub sigma_g: f64,
    pub sigma_h: f64,
    pub eta: f64,
    pub steps: u64,
    pub record_every: u64,
    pub burn_in_records: usize,
    #[serde(default)]
    pub w0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitSource {
    /// Draw n independent samples from the closed-form stationary density.
    Stationary(StationarySource),
    /// Run the state-dependent-noise chain and fit its recorded iterates.
    Chain(ChainSource),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    pub source: FitSource,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    60
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub hessian: Vec<Vec<f64>>,
    pub sigma_g_mat: Vec<Vec<f64>>,
    pub eta: f64,
    pub kappa: f64,
    pub n_samples: u64,
    pub delta: f64,
    pub empirical_risk: f64,
}
