//! State-dependent gradient-noise model: the scalar quadratic variance
//! C(w) = sigma_g + 2 rho (w - w*) + sigma_h (w - w*)^2, its multivariate
//! analog, and empirical noise scans over minibatch gradients.

use crate::error::{Error, Result};
use crate::landscape::EmpiricalToyLoss;
use crate::numeric::fit_quadratic;
use crate::rng::stream_rng;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Scalar noise parameters around a single minimum.
///
/// `sigma_g` is the gradient-noise variance at the minimum, `sigma_h` the
/// Hessian-noise variance, `rho_gh` their covariance, `curvature` the loss
/// curvature H at the minimum, and `eta` the step size. The derived tail
/// index is kappa = H / (eta sigma_h).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalarNoiseParams {
    pub sigma_g: f64,
    pub sigma_h: f64,
    pub rho_gh: f64,
    pub center: f64,
    pub curvature: f64,
    pub eta: f64,
}

impl ScalarNoiseParams {
    pub fn new(
        sigma_g: f64,
        sigma_h: f64,
        rho_gh: f64,
        center: f64,
        curvature: f64,
        eta: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("sigma_g", sigma_g),
            ("sigma_h", sigma_h),
            ("rho_gh", rho_gh),
            ("center", center),
            ("curvature", curvature),
            ("eta", eta),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if sigma_g < 0.0 || sigma_h < 0.0 {
            return Err(Error::InvalidParameter(
                "noise variances must be nonnegative".into(),
            ));
        }
        if curvature <= 0.0 || eta <= 0.0 {
            return Err(Error::InvalidParameter(
                "curvature and eta must be positive".into(),
            ));
        }
        // Cauchy-Schwarz: rho is a covariance of (gradient, Hessian) noise
        if rho_gh * rho_gh > sigma_g * sigma_h * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "rho_gh^2 = {:.6e} exceeds sigma_g * sigma_h = {:.6e}",
                rho_gh * rho_gh,
                sigma_g * sigma_h
            )));
        }
        Ok(Self {
            sigma_g,
            sigma_h,
            rho_gh,
            center,
            curvature,
            eta,
        })
    }

    /// The rho = 0 special case used by the closed-form family.
    pub fn simplified(
        sigma_g: f64,
        sigma_h: f64,
        center: f64,
        curvature: f64,
        eta: f64,
    ) -> Result<Self> {
        Self::new(sigma_g, sigma_h, 0.0, center, curvature, eta)
    }

    /// Tail index kappa = H / (eta sigma_h); infinite for constant noise.
    pub fn kappa(&self) -> f64 {
        if self.sigma_h == 0.0 {
            f64::INFINITY
        } else {
            self.curvature / (self.eta * self.sigma_h)
        }
    }

    /// Full quadratic noise variance C(w).
    pub fn variance_at(&self, w: f64) -> f64 {
        let q = w - self.center;
        self.sigma_g + 2.0 * self.rho_gh * q + self.sigma_h * q * q
    }

    /// C(w) with the first-order rho term dropped.
    pub fn simplified_variance_at(&self, w: f64) -> f64 {
        let q = w - self.center;
        self.sigma_g + self.sigma_h * q * q
    }

    /// C'(w) of the full quadratic form.
    pub fn dvariance_at(&self, w: f64) -> f64 {
        2.0 * self.rho_gh + 2.0 * self.sigma_h * (w - self.center)
    }
}

/// Multivariate noise covariance
/// C(w) = Sigma_g (1 + (1/(eta kappa)) (w-w*)' H Sigma_g^-1 (w-w*)).
#[derive(Debug, Clone)]
pub struct MultivariateNoiseParams {
    sigma_g_mat: DMatrix<f64>,
    hessian: DMatrix<f64>,
    kappa: f64,
    eta: f64,
    center: DVector<f64>,
    // cached Sigma_g^-1 applied through H for the quadratic form
    h_sig_inv: DMatrix<f64>,
}

impl MultivariateNoiseParams {
    pub fn new(
        sigma_g_mat: DMatrix<f64>,
        hessian: DMatrix<f64>,
        kappa: f64,
        eta: f64,
        center: DVector<f64>,
    ) -> Result<Self> {
        let d = center.len();
        for (name, m) in [("sigma_g_mat", &sigma_g_mat), ("hessian", &hessian)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: m.nrows(),
                });
            }
            check_spd(m).map_err(|e| match e {
                Error::NotPositiveDefinite { min_eigenvalue } => {
                    Error::InvalidParameter(format!(
                        "{name} must be SPD (smallest eigenvalue {min_eigenvalue:.6e})"
                    ))
                }
                other => other,
            })?;
        }
        if !(kappa.is_finite() && kappa > 0.0) || !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter(
                "kappa and eta must be positive and finite".into(),
            ));
        }
        let chol = nalgebra::Cholesky::new(sigma_g_mat.clone())
            .ok_or_else(|| Error::InvalidParameter("sigma_g_mat not SPD".into()))?;
        let mut sig_inv_h = hessian.clone();
        // solve Sigma_g X = H, then the quadratic-form matrix is H Sigma_g^-1 = X'
        chol.solve_mut(&mut sig_inv_h);
        let h_sig_inv = sig_inv_h.transpose();
        let scale = h_sig_inv.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let asym = (&h_sig_inv - h_sig_inv.transpose())
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if asym > 1e-10 * scale {
            return Err(Error::InvalidParameter(format!(
                "H Sigma_g^-1 must be symmetric (asymmetry {asym:.3e}); H and Sigma_g must share eigenvectors"
            )));
        }
        Ok(Self {
            sigma_g_mat,
            hessian,
            kappa,
            eta,
            center,
            h_sig_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn sigma_g_mat(&self) -> &DMatrix<f64> {
        &self.sigma_g_mat
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// (w - w*)' H Sigma_g^-1 (w - w*).
    pub fn quadratic_form(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        let q = DVector::from_column_slice(w) - &self.center;
        Ok((&self.h_sig_inv * &q).dot(&q))
    }

    /// The covariance matrix C(w).
    pub fn covariance_at(&self, w: &[f64]) -> Result<DMatrix<f64>> {
        let form = self.quadratic_form(w)?;
        Ok(&self.sigma_g_mat * (1.0 + form / (self.eta * self.kappa)))
    }
}

fn check_spd(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let asym = (m - m.transpose())
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if asym > 1e-10 * scale {
        return Err(Error::InvalidParameter(format!(
            "matrix must be symmetric (asymmetry {asym:.3e})"
        )));
    }
    if nalgebra::Cholesky::new(m.clone()).is_none() {
        let min_eig = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        });
    }
    Ok(())
}

/// Factor an SPD covariance as M M' = cov (Cholesky lower factor; any factor
/// with the right product is distributionally equivalent for driving noise).
pub fn diffusion_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_spd(cov)?;
    let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(|| {
        let min_eig = cov
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        Error::NotPositiveDefinite {
            min_eigenvalue: min_eig,
        }
    })?;
    Ok(chol.l())
}

/// Quadratic fit of a measured noise-trace curve along a scan ray.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseScanResult {
    pub offsets: Vec<f64>,
    pub traces: Vec<f64>,
    /// (c0, c1, c2) of c0 + c1 x + c2 x^2
    pub quad_coeffs: [f64; 3],
    pub r_squared: f64,
    /// location of the fitted parabola's minimum; 0.0 when degenerate
    pub argmin_offset: f64,
    /// set when the scan carries no usable curvature (zero noise or c2 <= 0)
    pub degenerate: bool,
}

/// Empirical covariance trace of `draws` minibatch gradients produced by
/// `sample_gradient` (a per-sample gradient oracle over `n` samples) at one
/// point. Unbiased (draws - 1) normalization, fixed summation order.
fn trace_at_point(
    sample_gradient: &(impl Fn(&[f64; 2], usize) -> [f64; 2] + Sync),
    n: usize,
    w: &[f64; 2],
    batch_size: usize,
    draws: usize,
    master_seed: u64,
    stream_base: u64,
) -> Result<f64> {
    if draws < 2 {
        return Err(Error::InvalidParameter(
            "draws must be >= 2 for a covariance estimate".into(),
        ));
    }
    if batch_size == 0 || batch_size > n {
        return Err(Error::InvalidParameter(format!(
            "batch_size must be in 1..={n}, got {batch_size}"
        )));
    }
    let mut grads = Vec::with_capacity(draws);
    for d in 0..draws {
        let mut rng = stream_rng(master_seed, stream_base + d as u64 + 1);
        let mut idx = rand::seq::index::sample(&mut rng, n, batch_size).into_vec();
        // fixed summation order: the full-batch trace is exactly zero
        idx.sort_unstable();
        let mut g = [0.0, 0.0];
        for i in idx {
            let gi = sample_gradient(w, i);
            g[0] += gi[0];
            g[1] += gi[1];
        }
        grads.push([g[0] / batch_size as f64, g[1] / batch_size as f64]);
    }
    // shifted two-pass variance: identical draws give a trace of exactly zero
    let shift = grads[0];
    let mut mean = [0.0, 0.0];
    for g in &grads {
        mean[0] += g[0] - shift[0];
        mean[1] += g[1] - shift[1];
    }
    mean[0] /= draws as f64;
    mean[1] /= draws as f64;
    let mut ss = 0.0;
    for g in &grads {
        ss += (g[0] - shift[0] - mean[0]).powi(2) + (g[1] - shift[1] - mean[1]).powi(2);
    }
    Ok(ss / (draws as f64 - 1.0))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn scan_trace_core(
    sample_gradient: &(impl Fn(&[f64; 2], usize) -> [f64; 2] + Sync),
    n: usize,
    center: &[f64; 2],
    direction: &[f64; 2],
    offsets: &[f64],
    batch_size: usize,
    draws: usize,
    master_seed: u64,
) -> Result<NoiseScanResult> {
    let norm = (direction[0] * direction[0] + direction[1] * direction[1]).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!(
            "direction must be a unit vector, got norm {norm}"
        )));
    }
    if offsets.len() < 3 {
        return Err(Error::InvalidParameter(
            "need at least 3 offsets for a quadratic fit".into(),
        ));
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "offsets must be strictly increasing".into(),
        ));
    }
    let traces: Vec<f64> = offsets
        .par_iter()
        .enumerate()
        .map(|(p, off)| {
            let w = [
                center[0] + off * direction[0],
                center[1] + off * direction[1],
            ];
            trace_at_point(
                sample_gradient,
                n,
                &w,
                batch_size,
                draws,
                master_seed,
                (p * draws) as u64,
            )
        })
        .collect::<Result<Vec<f64>>>()?;

    let (c0, c1, c2, r_squared) = fit_quadratic(offsets, &traces)?;
    let max_trace = traces.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let degenerate = max_trace == 0.0 || c2 <= 0.0;
    let argmin_offset = if degenerate { 0.0 } else { -c1 / (2.0 * c2) };
    Ok(NoiseScanResult {
        offsets: offsets.to_vec(),
        traces,
        quad_coeffs: [c0, c1, c2],
        r_squared: r_squared.clamp(0.0, 1.0),
        argmin_offset,
        degenerate,
    })
}

/// Scan the minibatch-gradient covariance trace along a ray through `center`
/// and fit a quadratic in the offset. Draw seeds derive from
/// (master_seed, point index, draw index), so the scan is deterministic and
/// parallel-safe.
pub fn scan_noise_trace(
    landscape: &EmpiricalToyLoss,
    center: &[f64; 2],
    direction: &[f64; 2],
    offsets: &[f64],
    batch_size: usize,
    draws: usize,
    master_seed: u64,
) -> Result<NoiseScanResult> {
    scan_trace_core(
        &|w: &[f64; 2], i: usize| landscape.sample_gradient(w, i),
        landscape.n(),
        center,
        direction,
        offsets,
        batch_size,
        draws,
        master_seed,
    )
}

/// Empirical minibatch covariance trace at a single point of the toy loss
/// (the quantity the noise-matching rule consumes).
pub fn minibatch_trace_estimate(
    landscape: &EmpiricalToyLoss,
    w: &[f64; 2],
    batch_size: usize,
    draws: usize,
    master_seed: u64,
) -> Result<f64> {
    trace_at_point(
        &|w: &[f64; 2], i: usize| landscape.sample_gradient(w, i),
        landscape.n(),
        w,
        batch_size,
        draws,
        master_seed,
        0,
    )
}
