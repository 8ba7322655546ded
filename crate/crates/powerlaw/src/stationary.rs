//! Stationary laws of the power-law dynamic: the kappa-power-law density in
//! one and many dimensions, the full first-order-corrected 1-d form, exact
//! sampling, and a Fokker-Planck residual checker.
//!
//! Convention note: these densities solve the stationarity equation in the
//! form d/dw(p g) + (eta/2) d/dw(C dp/dw) = 0, i.e. the diffusion derivative
//! acts outside C. `fokker_planck_residual` checks exactly that form, and the
//! escape validator in [`crate::escape`] integrates the matching process.

use crate::error::{Error, Result};
use crate::landscape::{LossSurface, QuadraticBasin};
use crate::noise::{MultivariateNoiseParams, ScalarNoiseParams};
use crate::numeric::{
    derivative4, integrate_finite, integrate_real_line, ln_beta_half, ln_gamma_ratio,
};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};

/// Density p(w) = (1/Z) (1 + (sigma_h/sigma_g)(w-w*)^2)^(-kappa), kappa > 1/2.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawKappa1D {
    kappa: f64,
    sigma_g: f64,
    sigma_h: f64,
    center: f64,
    log_z: f64,
}

impl PowerLawKappa1D {
    pub fn new(kappa: f64, sigma_g: f64, sigma_h: f64, center: f64) -> Result<Self> {
        if !(kappa.is_finite() && sigma_g.is_finite() && sigma_h.is_finite() && center.is_finite())
        {
            return Err(Error::InvalidParameter(
                "power-law parameters must be finite".into(),
            ));
        }
        if sigma_g <= 0.0 || sigma_h <= 0.0 {
            return Err(Error::InvalidParameter(
                "sigma_g and sigma_h must be positive".into(),
            ));
        }
        if kappa <= 0.5 {
            return Err(Error::NotNormalizable(format!(
                "kappa = {kappa} <= 1/2; the density integral diverges"
            )));
        }
        let log_z = 0.5 * (sigma_g.ln() - sigma_h.ln()) + ln_beta_half(kappa);
        Ok(Self {
            kappa,
            sigma_g,
            sigma_h,
            center,
            log_z,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn sigma_g(&self) -> f64 {
        self.sigma_g
    }

    pub fn sigma_h(&self) -> f64 {
        self.sigma_h
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Closed-form normalizer sqrt(sigma_g/sigma_h) B(1/2, kappa - 1/2).
    pub fn normalizer(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_density(&self, w: f64) -> f64 {
        let q = w - self.center;
        // ln1p keeps full precision in the Gaussian limit kappa -> infinity
        -self.kappa * (self.sigma_h / self.sigma_g * q * q).ln_1p() - self.log_z
    }

    pub fn density(&self, w: f64) -> f64 {
        self.log_density(w).exp()
    }

    /// Scale of the equivalent location-scale Student-t with nu = 2 kappa - 1.
    pub fn student_scale(&self) -> f64 {
        (self.sigma_g / (self.sigma_h * (2.0 * self.kappa - 1.0))).sqrt()
    }

    /// Draw i.i.d. samples via the Student-t reparameterization.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        let nu = 2.0 * self.kappa - 1.0;
        let t = StudentT::new(nu)
            .map_err(|e| Error::InvalidParameter(format!("bad degrees of freedom: {e}")))?;
        let s = self.student_scale();
        Ok((0..n).map(|_| self.center + s * t.sample(rng)).collect())
    }
}

/// See [`PowerLawKappa1D::density`].
pub fn density_1d(dist: &PowerLawKappa1D, w: f64) -> f64 {
    dist.density(w)
}

/// See [`PowerLawKappa1D::normalizer`].
pub fn normalizer_1d(dist: &PowerLawKappa1D) -> f64 {
    dist.normalizer()
}

/// See [`PowerLawKappa1D::sample`].
pub fn sample_1d(dist: &PowerLawKappa1D, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    dist.sample(n, rng)
}

/// Multivariate power-law density
/// p(w) = (1/Z) [1 + (1/(eta kappa)) (w-w*)' H Sigma_g^-1 (w-w*)]^(-kappa),
/// kappa > d/2.
#[derive(Debug, Clone)]
pub struct PowerLawKappaMulti {
    noise: MultivariateNoiseParams,
    log_z: f64,
}

impl PowerLawKappaMulti {
    pub fn new(
        hessian: DMatrix<f64>,
        sigma_g_mat: DMatrix<f64>,
        eta: f64,
        kappa: f64,
        center: DVector<f64>,
    ) -> Result<Self> {
        let d = center.len();
        if kappa <= d as f64 / 2.0 {
            return Err(Error::NotNormalizable(format!(
                "kappa = {kappa} <= d/2 = {}; the density integral diverges",
                d as f64 / 2.0
            )));
        }
        let noise = MultivariateNoiseParams::new(sigma_g_mat, hessian, kappa, eta, center)?;
        let log_z = Self::log_normalizer(&noise, d);
        Ok(Self { noise, log_z })
    }

    /// ln Z = (d/2) ln(eta kappa pi) + ln Gamma(kappa - d/2) - ln Gamma(kappa)
    ///        - (1/2) ln det(H Sigma_g^-1)
    fn log_normalizer(noise: &MultivariateNoiseParams, d: usize) -> f64 {
        let kappa = noise.kappa();
        let half_d = d as f64 / 2.0;
        let ln_det_h = ln_det_spd(noise.hessian());
        let ln_det_sg = ln_det_spd(noise.sigma_g_mat());
        half_d * (noise.eta() * kappa * std::f64::consts::PI).ln()
            + ln_gamma_ratio(kappa, half_d)
            - 0.5 * (ln_det_h - ln_det_sg)
    }

    pub fn dim(&self) -> usize {
        self.noise.dim()
    }

    pub fn kappa(&self) -> f64 {
        self.noise.kappa()
    }

    pub fn normalizer(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_density(&self, w: &[f64]) -> Result<f64> {
        let form = self.noise.quadratic_form(w)?;
        let kappa = self.noise.kappa();
        Ok(-kappa * (form / (self.noise.eta() * kappa)).ln_1p() - self.log_z)
    }

    pub fn density(&self, w: &[f64]) -> Result<f64> {
        Ok(self.log_density(w)?.exp())
    }
}

fn ln_det_spd(m: &DMatrix<f64>) -> f64 {
    let chol = nalgebra::Cholesky::new(m.clone()).expect("caller guarantees SPD");
    2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>()
}

/// See [`PowerLawKappaMulti::density`].
pub fn density_multi(dist: &PowerLawKappaMulti, w: &[f64]) -> Result<f64> {
    dist.density(w)
}

/// Stationary density of the full 1-d dynamic with the first-order noise term
/// retained (rho != 0 allowed):
/// p(w) = (1/Z) C(w)^(-H/(eta sigma_h))
///        exp(-H (4 rho arctan(C'(w)/sqrt(4 sigma_h sigma_g - 4 rho))) / (eta sigma_h)),
/// normalized numerically over [center - half_width, center + half_width].
///
/// The radicand is implemented exactly as printed (4 sigma_h sigma_g - 4 rho,
/// first power of rho); parameter sets that make it nonpositive are rejected
/// rather than reinterpreted.
#[derive(Debug, Clone)]
pub struct FullStationary1D {
    params: ScalarNoiseParams,
    half_width: f64,
    kappa: f64,
    radicand: f64,
    log_z: f64,
}

impl FullStationary1D {
    pub fn new(params: ScalarNoiseParams, half_width: f64) -> Result<Self> {
        if params.sigma_h <= 0.0 || params.sigma_g <= 0.0 {
            return Err(Error::InvalidParameter(
                "full stationary form needs sigma_g > 0 and sigma_h > 0".into(),
            ));
        }
        if params.rho_gh * params.rho_gh >= params.sigma_g * params.sigma_h {
            return Err(Error::InvalidParameter(
                "rho_gh^2 must be strictly below sigma_g * sigma_h so C(w) stays positive".into(),
            ));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(
                "half_width must be positive and finite".into(),
            ));
        }
        let kappa = params.kappa();
        if kappa <= 0.5 {
            return Err(Error::NotNormalizable(format!(
                "tail index H/(eta sigma_h) = {kappa} <= 1/2"
            )));
        }
        let radicand = 4.0 * params.sigma_h * params.sigma_g - 4.0 * params.rho_gh;
        if radicand <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "arctan radicand 4 sigma_h sigma_g - 4 rho_gh = {radicand:.6e} is nonpositive; \
                 the formula uses the first power of rho_gh as printed, so it requires \
                 rho_gh < sigma_h * sigma_g"
            )));
        }
        let mut dist = Self {
            params,
            half_width,
            kappa,
            radicand,
            log_z: 0.0,
        };
        let z = integrate_finite(
            |w| dist.unnormalized(w),
            params.center - half_width,
            params.center + half_width,
            1e-10,
        )?;
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::NotNormalizable(format!(
                "numeric normalizer came out {z}"
            )));
        }
        dist.log_z = z.ln();
        Ok(dist)
    }

    pub fn params(&self) -> &ScalarNoiseParams {
        &self.params
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn unnormalized(&self, w: f64) -> f64 {
        self.log_unnormalized(w).exp()
    }

    fn log_unnormalized(&self, w: f64) -> f64 {
        let c = self.params.variance_at(w);
        let angle = (self.params.dvariance_at(w) / self.radicand.sqrt()).atan();
        -self.kappa * c.ln()
            - self.params.curvature * 4.0 * self.params.rho_gh * angle
                / (self.params.eta * self.params.sigma_h)
    }

    pub fn log_density(&self, w: f64) -> f64 {
        self.log_unnormalized(w) - self.log_z
    }

    pub fn density(&self, w: f64) -> f64 {
        self.log_density(w).exp()
    }
}

/// See [`FullStationary1D::density`].
pub fn density_full_1d(dist: &FullStationary1D, w: f64) -> f64 {
    dist.density(w)
}

/// Max-norm residual of the stationarity equation
/// R(w) = d/dw[p(w) g(w)] + (eta/2) d/dw[C(w) p'(w)]
/// over the grid interior, normalized by max |p g|. Fourth-order central
/// stencils; the grid must be uniform and ascending with at least 9 points.
pub fn fokker_planck_residual(
    density_fn: &impl Fn(f64) -> f64,
    landscape: &QuadraticBasin,
    noise: &ScalarNoiseParams,
    grid: &[f64],
) -> Result<f64> {
    if landscape.center().len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: landscape.center().len(),
        });
    }
    if grid.len() < 9 {
        return Err(Error::InvalidParameter(format!(
            "grid too small: need at least 9 points for the nested stencil, got {}",
            grid.len()
        )));
    }
    let h = grid[1] - grid[0];
    if h <= 0.0 {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    for pair in grid.windows(2) {
        if ((pair[1] - pair[0]) - h).abs() > 1e-9 * h {
            return Err(Error::InvalidParameter(
                "grid must be uniformly spaced".into(),
            ));
        }
    }

    let p: Vec<f64> = grid.iter().map(|&w| density_fn(w)).collect();
    let g: Vec<f64> = grid.iter().map(|&w| landscape.gradient(&[w])[0]).collect();
    let drift_flux: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi * gi).collect();

    // (p g)' on indices 2..n-2
    let d_flux = derivative4(&drift_flux, h);
    // p' on indices 2..n-2, then C p' and its derivative on indices 4..n-4
    let dp = derivative4(&p, h);
    let c_dp: Vec<f64> = dp
        .iter()
        .enumerate()
        .map(|(i, dpi)| noise.variance_at(grid[i + 2]) * dpi)
        .collect();
    let d_c_dp = derivative4(&c_dp, h);

    let scale = drift_flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateSample(
            "p * g vanishes on the whole grid; residual scale undefined".into(),
        ));
    }
    let mut max_r = 0.0f64;
    for (j, dcd) in d_c_dp.iter().enumerate() {
        // d_c_dp[j] sits at original index j + 4; d_flux covers 2..n-2
        let r = d_flux[j + 2] + 0.5 * noise.eta * dcd;
        max_r = max_r.max(r.abs());
    }
    Ok(max_r / scale)
}

/// Quadrature value of the 1-d normalizer integral, used as the oracle for
/// the closed form.
pub fn normalizer_1d_quadrature(kappa: f64, sigma_g: f64, sigma_h: f64) -> Result<f64> {
    integrate_real_line(
        |x| (-kappa * (sigma_h / sigma_g * x * x).ln_1p()).exp(),
        1e-10,
    )
}
