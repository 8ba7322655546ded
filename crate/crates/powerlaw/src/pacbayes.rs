//! PAC-Bayes generalization bound with a heavy-tailed posterior.
//!
//! The posterior is the stationary power-law density around a minimum, the
//! prior is a Gaussian with covariance matched to the gradient noise. The
//! KL divergence between them admits a closed upper bound that is free of
//! Gamma functions; the exact Gamma-ratio form is kept alongside it so the
//! bound can be checked against what it bounds.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::numeric::ln_gamma_ratio;

/// Everything the bound needs. `hessian` and `sigma_g_mat` are the loss
/// curvature and gradient-noise covariance at the minimum, both SPD.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub hessian: DMatrix<f64>,
    pub sigma_g_mat: DMatrix<f64>,
    pub eta: f64,
    pub kappa: f64,
    pub dim: usize,
    pub n_samples: u64,
    pub delta: f64,
    pub empirical_risk: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidParameter("dim must be positive".to_string()));
        }
        for (name, m) in [("hessian", &self.hessian), ("sigma_g_mat", &self.sigma_g_mat)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: if m.nrows() != d { m.nrows() } else { m.ncols() },
                });
            }
            let scale = m.amax().max(1.0);
            if (m - m.transpose()).amax() > 1e-10 * scale {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be symmetric"
                )));
            }
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter("eta must be positive".to_string()));
        }
        if self.kappa.is_nan() || self.kappa <= d as f64 / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa = {} must exceed dim/2 = {}",
                self.kappa,
                d as f64 / 2.0
            )));
        }
        // kappa > d/2 already forces this; kept explicit because the
        // denominator below divides by it.
        if 1.0 - (d as f64 / 2.0 - 1.0) / self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(
                "1 - (dim/2 - 1)/kappa must be positive".to_string(),
            ));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter(
                "n_samples must be at least 2".to_string(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(
                "delta must lie in (0, 1)".to_string(),
            ));
        }
        if !(self.empirical_risk >= 0.0 && self.empirical_risk.is_finite()) {
            return Err(Error::InvalidParameter(
                "empirical_risk must be nonnegative".to_string(),
            ));
        }
        Ok(())
    }
}

/// Cholesky factor plus log-determinant of an SPD matrix. Reports the
/// smallest eigenvalue when the factorization fails.
fn spd_factor(m: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    match Cholesky::new(m.clone()) {
        Some(chol) => {
            let ln_det = 2.0 * chol.l().diagonal().iter().map(|l| l.ln()).sum::<f64>();
            Ok((chol, ln_det))
        }
        None => {
            let min_eigenvalue = m
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            Err(Error::NotPositiveDefinite { min_eigenvalue })
        }
    }
}

/// Shared middle term (Tr(eta Sigma_g H^-1) - 2 d) / (4 (1 - (d/2 - 1)/kappa)),
/// plus the two log-determinants. The trace goes through a solve, not an
/// explicit inverse.
fn kl_pieces(inputs: &BoundInputs) -> Result<(f64, f64, f64)> {
    inputs.validate()?;
    let d = inputs.dim as f64;
    let (chol_h, ln_det_h) = spd_factor(&inputs.hessian)?;
    let (_, ln_det_sg) = spd_factor(&inputs.sigma_g_mat)?;
    let trace = chol_h.solve(&inputs.sigma_g_mat).trace() * inputs.eta;
    let denom = 1.0 - (d / 2.0 - 1.0) / inputs.kappa;
    let middle = (trace - 2.0 * d) / (4.0 * denom);
    Ok((ln_det_h, ln_det_sg, middle))
}

/// Gamma-free upper bound on KL(posterior || prior):
///
/// ```text
/// (1/2) ln(det H / det Sigma_g)
///   + (Tr(eta Sigma_g H^-1) - 2 d) / (4 (1 - (d/2 - 1)/kappa))
///   + (d/2) ln(2 / eta)
/// ```
pub fn kl_upper_bound(inputs: &BoundInputs) -> Result<f64> {
    let (ln_det_h, ln_det_sg, middle) = kl_pieces(inputs)?;
    let d = inputs.dim as f64;
    Ok(0.5 * (ln_det_h - ln_det_sg) + middle + d / 2.0 * (2.0 / inputs.eta).ln())
}

/// Exact Gamma-ratio form the upper bound is derived from; replaces
/// (d/2) ln kappa with ln(Gamma(kappa) / Gamma(kappa - d/2)). Always at
/// most `kl_upper_bound`.
pub fn kl_exact_form(inputs: &BoundInputs) -> Result<f64> {
    let (ln_det_h, ln_det_sg, middle) = kl_pieces(inputs)?;
    let d = inputs.dim as f64;
    let ln_gamma_term = -ln_gamma_ratio(inputs.kappa, d / 2.0);
    Ok(0.5 * (ln_det_h - ln_det_sg) - d / 2.0 * (inputs.eta * inputs.kappa).ln()
        + ln_gamma_term
        + middle
        + d / 2.0 * 2f64.ln())
}

/// PAC-Bayes generalization bound
///
/// ```text
/// risk + sqrt((KL + ln(1/delta) + ln n + 2) / (n - 1))
/// ```
///
/// using the Gamma-free KL upper bound.
pub fn generalization_bound(inputs: &BoundInputs) -> Result<f64> {
    let kl = kl_upper_bound(inputs)?;
    let n = inputs.n_samples as f64;
    let radicand = (kl + (1.0 / inputs.delta).ln() + n.ln() + 2.0) / (n - 1.0);
    if radicand < 0.0 {
        return Err(Error::Numerical(format!(
            "bound radicand is negative: {radicand}"
        )));
    }
    Ok(inputs.empirical_risk + radicand.sqrt())
}
