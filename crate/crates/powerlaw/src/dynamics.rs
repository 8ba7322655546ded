//! Discrete-time integrators: minibatch SGD on the empirical toy loss,
//! constant-noise Langevin steps, the state-dependent power-law step, and the
//! loss-modulated toy power-law step. One step advances SDE time by eta, so
//! the per-step noise term is eta * xi with Cov(xi) = C evaluated at the
//! pre-step state.

use crate::error::{Error, Result};
use crate::landscape::{EmpiricalToyLoss, LossSurface};
use crate::noise::{diffusion_factor, MultivariateNoiseParams, ScalarNoiseParams};
use crate::rng::stream_rng;
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Which update rule drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    Sgd,
    Langevin,
    PowerLaw,
    ToyPowerLaw,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Sgd => "SGD",
            Mode::Langevin => "LANGEVIN",
            Mode::PowerLaw => "POWER_LAW",
            Mode::ToyPowerLaw => "TOY_POWER_LAW",
        };
        f.write_str(s)
    }
}

/// Run parameters for [`run`]. `lambda1`/`lambda2` apply to
/// [`Mode::ToyPowerLaw`] only; `batch_size` to [`Mode::Sgd`] only.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub eta: f64,
    pub steps: u64,
    pub mode: Mode,
    pub master_seed: u64,
    pub record_every: u64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub batch_size: Option<usize>,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidParameter("eta must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "record_every must be positive".into(),
            ));
        }
        if self.steps.checked_mul(self.record_every).is_none() {
            return Err(Error::InvalidParameter(
                "steps * record_every overflows".into(),
            ));
        }
        let toy_mode = self.mode == Mode::ToyPowerLaw;
        match (toy_mode, self.lambda1, self.lambda2) {
            (true, Some(l1), Some(l2)) => {
                if !(l1.is_finite() && l1 >= 0.0 && l2.is_finite() && l2 >= 0.0) {
                    return Err(Error::InvalidParameter(
                        "lambda1 and lambda2 must be finite and >= 0".into(),
                    ));
                }
            }
            (true, _, _) => {
                return Err(Error::InvalidParameter(format!(
                    "mode {} requires lambda1 and lambda2",
                    self.mode
                )))
            }
            (false, None, None) => {}
            (false, _, _) => {
                return Err(Error::InvalidParameter(format!(
                    "lambda1/lambda2 are only valid for TOY_POWER_LAW, not {}",
                    self.mode
                )))
            }
        }
        match (self.mode == Mode::Sgd, self.batch_size) {
            (true, Some(b)) if b > 0 => {}
            (true, _) => {
                return Err(Error::InvalidParameter(
                    "mode SGD requires batch_size >= 1".into(),
                ))
            }
            (false, None) => {}
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "batch_size is only valid for SGD, not {}",
                    self.mode
                )))
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding; stamps every trajectory.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Recorded states of one chain, thinned by `record_every`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub losses: Option<Vec<f64>>,
    pub config_hash: String,
}

/// Noise argument for [`step_power_law`]: the scalar quadratic form in one
/// dimension or the matrix form in d dimensions.
#[derive(Debug, Clone, Copy)]
pub enum PowerLawNoise<'a> {
    Scalar(&'a ScalarNoiseParams),
    Multivariate(&'a MultivariateNoiseParams),
}

impl PowerLawNoise<'_> {
    pub fn dim(&self) -> usize {
        match self {
            PowerLawNoise::Scalar(_) => 1,
            PowerLawNoise::Multivariate(m) => m.dim(),
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            PowerLawNoise::Scalar(p) => p.eta,
            PowerLawNoise::Multivariate(m) => m.eta(),
        }
    }
}

/// Landscape/noise pairing for [`run`].
#[derive(Clone, Copy)]
pub enum NoiseSpec<'a> {
    /// SGD and TOY_POWER_LAW: noise comes from the mode itself.
    None,
    /// LANGEVIN: constant covariance.
    Constant(&'a DMatrix<f64>),
    /// POWER_LAW: state-dependent covariance.
    PowerLaw(PowerLawNoise<'a>),
}

/// What the chain runs on. SGD and TOY_POWER_LAW need the empirical toy loss
/// (they sample it); the SDE modes accept any loss surface.
#[derive(Clone, Copy)]
pub enum RunTarget<'a> {
    Surface(&'a dyn LossSurface),
    Toy(&'a EmpiricalToyLoss),
}

impl<'a> RunTarget<'a> {
    fn as_surface(&self) -> &'a dyn LossSurface {
        match self {
            RunTarget::Surface(s) => *s,
            RunTarget::Toy(t) => *t,
        }
    }

    fn as_toy(&self) -> Option<&'a EmpiricalToyLoss> {
        match self {
            RunTarget::Toy(t) => Some(t),
            RunTarget::Surface(_) => None,
        }
    }
}

fn standard_normal_vec(d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(d, |_, _| StandardNormal.sample(rng))
}

/// One minibatch SGD step w - eta * g_B(w).
pub fn step_sgd(
    landscape: &EmpiricalToyLoss,
    w: &[f64; 2],
    batch_size: usize,
    rng: &mut ChaCha8Rng,
    eta: f64,
) -> Result<[f64; 2]> {
    let g = landscape.minibatch_gradient(w, batch_size, rng)?;
    Ok([w[0] - eta * g[0], w[1] - eta * g[1]])
}

/// Noise factor for a constant covariance. Zero and singular PSD matrices
/// are allowed (their null directions simply carry no noise); indefinite
/// matrices are rejected.
fn constant_noise_factor(cov: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
    if cov.iter().all(|x| *x == 0.0) {
        return Ok(None);
    }
    match diffusion_factor(cov) {
        Ok(m) => Ok(Some(m)),
        Err(Error::NotPositiveDefinite { min_eigenvalue }) => {
            let scale = cov.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if min_eigenvalue >= -1e-10 * scale {
                let eig = cov.clone().symmetric_eigen();
                let sqrt_vals =
                    DVector::from_iterator(cov.nrows(), eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
                Ok(Some(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)))
            } else {
                Err(Error::NotPositiveDefinite { min_eigenvalue })
            }
        }
        Err(e) => Err(e),
    }
}

/// One Langevin step w - eta g(w) + eta M xi with M M' = const_cov.
pub fn step_langevin(
    landscape: &dyn LossSurface,
    w: &[f64],
    const_cov: &DMatrix<f64>,
    eta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let d = landscape.dim();
    if w.len() != d || const_cov.nrows() != d || const_cov.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w.len().min(const_cov.nrows()),
        });
    }
    let factor = constant_noise_factor(const_cov)?;
    let g = landscape.gradient(w);
    let mut next: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - eta * gi).collect();
    if let Some(m) = factor {
        let noise = m * standard_normal_vec(d, rng);
        for (ni, xi) in next.iter_mut().zip(noise.iter()) {
            *ni += eta * xi;
        }
    }
    Ok(next)
}

/// One power-law step w - eta g(w) + eta M(w) xi, the noise factor taken at
/// the pre-step state.
pub fn step_power_law(
    landscape: &dyn LossSurface,
    w: &[f64],
    noise: PowerLawNoise<'_>,
    eta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let d = landscape.dim();
    if w.len() != d || noise.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: noise.dim(),
        });
    }
    let g = landscape.gradient(w);
    match noise {
        PowerLawNoise::Scalar(p) => {
            let c = p.variance_at(w[0]);
            if c < 0.0 {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: c });
            }
            let xi: f64 = StandardNormal.sample(rng);
            Ok(vec![w[0] - eta * g[0] + eta * c.sqrt() * xi])
        }
        PowerLawNoise::Multivariate(m) => {
            let cov = m.covariance_at(w)?;
            let factor = diffusion_factor(&cov)?;
            let noise_vec = factor * standard_normal_vec(d, rng);
            Ok(w
                .iter()
                .zip(&g)
                .zip(noise_vec.iter())
                .map(|((wi, gi), xi)| wi - eta * gi + eta * xi)
                .collect())
        }
    }
}

/// One loss-modulated toy step
/// w - eta g(w) + eta lambda2 sqrt(1 + lambda1 L(w)) xi, xi ~ N(0, I_2).
pub fn step_toy_power_law(
    landscape: &EmpiricalToyLoss,
    w: &[f64; 2],
    lambda1: f64,
    lambda2: f64,
    eta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<[f64; 2]> {
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) {
        return Err(Error::InvalidParameter(
            "lambda1 and lambda2 must be >= 0".into(),
        ));
    }
    let (loss, g) = landscape.loss_and_gradient(w);
    let modulation = 1.0 + lambda1 * loss;
    if modulation < 0.0 {
        return Err(Error::Numerical(format!(
            "noise modulation 1 + lambda1 L = {modulation} is negative"
        )));
    }
    let amp = eta * lambda2 * modulation.sqrt();
    let xi0: f64 = StandardNormal.sample(rng);
    let xi1: f64 = StandardNormal.sample(rng);
    Ok([
        w[0] - eta * g[0] + amp * xi0,
        w[1] - eta * g[1] + amp * xi1,
    ])
}

/// Noise-matching rule for the toy dynamic: lambda2 = sqrt(Tr(C_B(w*)) / 2),
/// with the trace estimated from `draws` minibatch gradients, so that
/// Cov(lambda2 xi) has the same trace as the SGD gradient noise at w*.
pub fn match_lambda2(
    landscape: &EmpiricalToyLoss,
    w_star: &[f64; 2],
    batch_size: usize,
    draws: usize,
    master_seed: u64,
) -> Result<f64> {
    let trace =
        crate::noise::minibatch_trace_estimate(landscape, w_star, batch_size, draws, master_seed)?;
    Ok((trace / 2.0).sqrt())
}

/// Iterate the configured step `steps` times from `w0`, recording the state
/// every `record_every` steps (the initial state is always recorded).
/// Bit-deterministic for a given config. A step error aborts the run with
/// the step index attached.
pub fn run(
    config: &IntegratorConfig,
    target: RunTarget<'_>,
    noise: NoiseSpec<'_>,
    w0: &[f64],
) -> Result<Trajectory> {
    config.validate()?;
    let surface = target.as_surface();
    let d = surface.dim();
    if w0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w0.len(),
        });
    }
    match (config.mode, &noise) {
        (Mode::Sgd | Mode::ToyPowerLaw, NoiseSpec::None) => {
            if target.as_toy().is_none() {
                return Err(Error::InvalidParameter(format!(
                    "mode {} runs on the empirical toy loss",
                    config.mode
                )));
            }
        }
        (Mode::Langevin, NoiseSpec::Constant(_)) => {}
        (Mode::PowerLaw, NoiseSpec::PowerLaw(p)) => {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.dim(),
                });
            }
            if p.eta() != config.eta {
                return Err(Error::InvalidParameter(format!(
                    "noise eta {} disagrees with config eta {}",
                    p.eta(),
                    config.eta
                )));
            }
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "noise specification does not match mode {}",
                config.mode
            )))
        }
    }

    let mut rng = stream_rng(config.master_seed, 0);
    let n_records = (config.steps / config.record_every + 1) as usize;
    let mut states = Vec::with_capacity(n_records);
    let mut losses = Vec::with_capacity(n_records);
    let mut w: Vec<f64> = w0.to_vec();
    states.push(w.clone());
    losses.push(surface.loss(&w));

    for t in 0..config.steps {
        let stepped: Result<Vec<f64>> = match config.mode {
            Mode::Sgd => {
                let toy = target.as_toy().expect("checked above");
                let wa = [w[0], w[1]];
                step_sgd(
                    toy,
                    &wa,
                    config.batch_size.expect("validated"),
                    &mut rng,
                    config.eta,
                )
                .map(|x| x.to_vec())
            }
            Mode::Langevin => {
                let cov = match noise {
                    NoiseSpec::Constant(c) => c,
                    _ => unreachable!(),
                };
                step_langevin(surface, &w, cov, config.eta, &mut rng)
            }
            Mode::PowerLaw => {
                let p = match noise {
                    NoiseSpec::PowerLaw(p) => p,
                    _ => unreachable!(),
                };
                step_power_law(surface, &w, p, config.eta, &mut rng)
            }
            Mode::ToyPowerLaw => {
                let toy = target.as_toy().expect("checked above");
                let wa = [w[0], w[1]];
                step_toy_power_law(
                    toy,
                    &wa,
                    config.lambda1.expect("validated"),
                    config.lambda2.expect("validated"),
                    config.eta,
                    &mut rng,
                )
                .map(|x| x.to_vec())
            }
        };
        w = stepped.map_err(|e| Error::Numerical(format!("aborted at step {t}: {e}")))?;
        if (t + 1) % config.record_every == 0 {
            states.push(w.clone());
            losses.push(surface.loss(&w));
        }
    }

    Ok(Trajectory {
        states,
        losses: Some(losses),
        config_hash: config.hash_hex(),
    })
}
