//! Loss landscapes: a quadratic basin, an empirical two-parameter toy loss,
//! and a C1 piecewise-quadratic double well for escape experiments.

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Common surface interface used by the integrators.
pub trait LossSurface {
    fn dim(&self) -> usize;
    fn loss(&self, w: &[f64]) -> f64;
    fn gradient_into(&self, w: &[f64], out: &mut [f64]);

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(w, &mut g);
        g
    }
}

/// L(w) = base_loss + (w - center)' H (w - center) / 2 with H symmetric PSD.
#[derive(Debug, Clone)]
pub struct QuadraticBasin {
    center: DVector<f64>,
    hessian: DMatrix<f64>,
    base_loss: f64,
}

impl QuadraticBasin {
    pub fn new(center: DVector<f64>, hessian: DMatrix<f64>, base_loss: f64) -> Result<Self> {
        let d = center.len();
        if hessian.nrows() != d || hessian.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: hessian.nrows(),
            });
        }
        if !base_loss.is_finite()
            || center.iter().any(|x| !x.is_finite())
            || hessian.iter().any(|x| !x.is_finite())
        {
            return Err(Error::InvalidParameter(
                "quadratic basin parameters must be finite".into(),
            ));
        }
        let scale = hessian.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let asym = (&hessian - hessian.transpose())
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if asym > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "hessian must be symmetric (asymmetry {asym:.3e})"
            )));
        }
        let eigs = hessian.clone().symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 * scale {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self {
            center,
            hessian,
            base_loss,
        })
    }

    /// One-dimensional convenience constructor.
    pub fn scalar(center: f64, curvature: f64, base_loss: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, center),
            DMatrix::from_element(1, 1, curvature),
            base_loss,
        )
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn base_loss(&self) -> f64 {
        self.base_loss
    }
}

impl LossSurface for QuadraticBasin {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let q = DVector::from_column_slice(w) - &self.center;
        self.base_loss + 0.5 * (&self.hessian * &q).dot(&q)
    }

    fn gradient_into(&self, w: &[f64], out: &mut [f64]) {
        let q = DVector::from_column_slice(w) - &self.center;
        let g = &self.hessian * q;
        out.copy_from_slice(g.as_slice());
    }
}

/// Per-coordinate kernel of the toy loss: 15 |t-1|^2.5 |t+1|^3.
/// Two flat-bottomed wells of different sharpness around t = 1 and t = -1.
pub fn toy_kernel(t: f64) -> f64 {
    toy_kernel_both(t).0
}

/// Derivative of [`toy_kernel`].
pub fn toy_kernel_deriv(t: f64) -> f64 {
    toy_kernel_both(t).1
}

/// Kernel value and derivative in one evaluation. The half-integer powers
/// reduce to square roots, which keeps this on the hot path of every
/// simulated step.
pub fn toy_kernel_both(t: f64) -> (f64, f64) {
    let a = t - 1.0;
    let b = t + 1.0;
    let aa = a.abs();
    let ra = aa.sqrt();
    let a15 = aa * ra;
    let a25 = aa * a15;
    let b2 = b * b;
    let ab3 = b.abs() * b2;
    let value = 15.0 * a25 * ab3;
    let deriv = 15.0 * (2.5 * a.signum() * a15 * ab3 + 3.0 * a25 * b.signum() * b2);
    (value, deriv)
}

/// Empirical loss over two parameters: the kernel applied coordinate-wise and
/// averaged over a shifted sample cloud,
/// L(w) = scale * mean_i [ k(w1 - x_i1) + k(w2 - x_i2) ].
///
/// The gradient separates per coordinate, which the minimum finder exploits.
#[derive(Debug, Clone)]
pub struct EmpiricalToyLoss {
    data: Vec<[f64; 2]>,
    scale: f64,
}

impl EmpiricalToyLoss {
    pub fn from_data(data: Vec<[f64; 2]>, scale: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidParameter("toy loss needs data".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("data must be finite".into()));
        }
        Ok(Self { data, scale })
    }

    /// Draw `n` sample shifts from N(0, data_std^2 I_2) and build the loss.
    pub fn generate(n: usize, data_std: f64, data_seed: u64, scale: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(data_std.is_finite() && data_std >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "data_std must be nonnegative, got {data_std}"
            )));
        }
        let normal = Normal::new(0.0, data_std)
            .map_err(|e| Error::InvalidParameter(format!("bad data_std: {e}")))?;
        let mut rng: ChaCha8Rng = stream_rng(data_seed, 0);
        let data = (0..n)
            .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        Self::from_data(data, scale)
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn data(&self) -> &[[f64; 2]] {
        &self.data
    }

    /// Same data, different overall scale (flatter or sharper copy).
    pub fn rescaled(&self, scale: f64) -> Result<Self> {
        Self::from_data(self.data.clone(), scale)
    }

    /// Loss of a single sample term.
    pub fn sample_loss(&self, w: &[f64; 2], i: usize) -> f64 {
        let x = &self.data[i];
        self.scale * (toy_kernel(w[0] - x[0]) + toy_kernel(w[1] - x[1]))
    }

    /// Gradient of a single sample term.
    pub fn sample_gradient(&self, w: &[f64; 2], i: usize) -> [f64; 2] {
        let x = &self.data[i];
        [
            self.scale * toy_kernel_deriv(w[0] - x[0]),
            self.scale * toy_kernel_deriv(w[1] - x[1]),
        ]
    }

    /// Mean gradient over a uniformly chosen batch, sampled without
    /// replacement. `batch_size` must be in 1..=n.
    /// Full loss and gradient in a single pass over the data.
    pub fn loss_and_gradient(&self, w: &[f64; 2]) -> (f64, [f64; 2]) {
        let n = self.n() as f64;
        let mut loss = 0.0;
        let mut g = [0.0, 0.0];
        for x in &self.data {
            for j in 0..2 {
                let (v, d) = toy_kernel_both(w[j] - x[j]);
                loss += v;
                g[j] += d;
            }
        }
        (
            self.scale * loss / n,
            [self.scale * g[0] / n, self.scale * g[1] / n],
        )
    }

    pub fn minibatch_gradient(
        &self,
        w: &[f64; 2],
        batch_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<[f64; 2]> {
        let n = self.n();
        if batch_size == 0 || batch_size > n {
            return Err(Error::InvalidParameter(format!(
                "batch_size must be in 1..={n}, got {batch_size}"
            )));
        }
        let mut idx = rand::seq::index::sample(rng, n, batch_size).into_vec();
        // fixed summation order so the full batch reproduces the exact gradient
        idx.sort_unstable();
        let mut g = [0.0, 0.0];
        for i in idx {
            let gi = self.sample_gradient(w, i);
            g[0] += gi[0];
            g[1] += gi[1];
        }
        g[0] /= batch_size as f64;
        g[1] /= batch_size as f64;
        Ok(g)
    }

    /// Trace of the covariance of the minibatch gradient at `w`, exact for
    /// sampling without replacement:
    /// tr Cov_b = tr Cov_pop * (n - b) / (b (n - 1)).
    pub fn minibatch_covariance_trace(&self, w: &[f64; 2], batch_size: usize) -> Result<f64> {
        let n = self.n();
        if batch_size == 0 || batch_size > n {
            return Err(Error::InvalidParameter(format!(
                "batch_size must be in 1..={n}, got {batch_size}"
            )));
        }
        if n == 1 {
            return Ok(0.0);
        }
        let grads: Vec<[f64; 2]> = (0..n).map(|i| self.sample_gradient(w, i)).collect();
        let mean = grads.iter().fold([0.0, 0.0], |m, g| {
            [m[0] + g[0] / n as f64, m[1] + g[1] / n as f64]
        });
        let pop_trace: f64 = grads
            .iter()
            .map(|g| (g[0] - mean[0]).powi(2) + (g[1] - mean[1]).powi(2))
            .sum::<f64>()
            / n as f64;
        Ok(pop_trace * (n - batch_size) as f64 / (batch_size as f64 * (n - 1) as f64))
    }

    /// Coordinate-wise root of the mean kernel derivative inside [lo, hi];
    /// the empirical minimum near (1, 1) for the default data scale.
    pub fn empirical_minimum(&self, lo: f64, hi: f64) -> Result<[f64; 2]> {
        let mut w = [0.0, 0.0];
        for j in 0..2 {
            let g = |t: f64| -> f64 {
                self.data
                    .iter()
                    .map(|x| toy_kernel_deriv(t - x[j]))
                    .sum::<f64>()
            };
            let (mut a, mut b) = (lo, hi);
            let (ga, gb) = (g(a), g(b));
            if !(ga < 0.0 && gb > 0.0) {
                return Err(Error::Numerical(format!(
                    "no bracketed minimum in [{lo}, {hi}] for coordinate {j}"
                )));
            }
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if g(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            w[j] = 0.5 * (a + b);
        }
        Ok(w)
    }
}

impl LossSurface for EmpiricalToyLoss {
    fn dim(&self) -> usize {
        2
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let w = [w[0], w[1]];
        let n = self.n() as f64;
        (0..self.n()).map(|i| self.sample_loss(&w, i)).sum::<f64>() / n
    }

    fn gradient_into(&self, w: &[f64], out: &mut [f64]) {
        let w = [w[0], w[1]];
        let n = self.n() as f64;
        let mut g = [0.0, 0.0];
        for i in 0..self.n() {
            let gi = self.sample_gradient(&w, i);
            g[0] += gi[0];
            g[1] += gi[1];
        }
        out[0] = g[0] / n;
        out[1] = g[1] / n;
    }
}

/// C1 piecewise-quadratic double well on the line.
///
/// Basin a sits at `min_a` with curvature `curvature_a`; an inverted parabola
/// of curvature `-curvature_b_abs` caps the barrier at height `barrier`; the
/// mirror-image basin c has the same curvature as basin a, so the well is
/// symmetric and both minima sit at loss 0.
#[derive(Debug, Clone)]
pub struct DoubleWell1D {
    pub min_a: f64,
    pub saddle_b: f64,
    pub min_c: f64,
    pub curvature_a: f64,
    pub curvature_b_abs: f64,
    pub barrier: f64,
    join1: f64,
    join2: f64,
}

impl DoubleWell1D {
    pub fn new(min_a: f64, curvature_a: f64, curvature_b_abs: f64, barrier: f64) -> Result<Self> {
        for (name, v) in [
            ("curvature_a", curvature_a),
            ("curvature_b_abs", curvature_b_abs),
            ("barrier", barrier),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !min_a.is_finite() {
            return Err(Error::InvalidParameter("min_a must be finite".into()));
        }
        let (ha, hb) = (curvature_a, curvature_b_abs);
        // continuity and matched slopes at the joins fix the geometry
        let u = (2.0 * barrier * hb / (ha * (ha + hb))).sqrt();
        let v = ha * u / hb;
        let saddle_b = min_a + u + v;
        Ok(Self {
            min_a,
            saddle_b,
            min_c: saddle_b + v + u,
            curvature_a,
            curvature_b_abs,
            barrier,
            join1: min_a + u,
            join2: saddle_b + v,
        })
    }

    pub fn loss1(&self, w: f64) -> f64 {
        if w <= self.join1 {
            0.5 * self.curvature_a * (w - self.min_a).powi(2)
        } else if w < self.join2 {
            self.barrier - 0.5 * self.curvature_b_abs * (w - self.saddle_b).powi(2)
        } else {
            0.5 * self.curvature_a * (w - self.min_c).powi(2)
        }
    }

    pub fn gradient1(&self, w: f64) -> f64 {
        if w <= self.join1 {
            self.curvature_a * (w - self.min_a)
        } else if w < self.join2 {
            -self.curvature_b_abs * (w - self.saddle_b)
        } else {
            self.curvature_a * (w - self.min_c)
        }
    }

    /// Loss and gradient in one branch resolution (hot path of the
    /// first-passage sampler).
    pub fn loss_and_gradient1(&self, w: f64) -> (f64, f64) {
        if w <= self.join1 {
            let q = w - self.min_a;
            (0.5 * self.curvature_a * q * q, self.curvature_a * q)
        } else if w < self.join2 {
            let q = w - self.saddle_b;
            (
                self.barrier - 0.5 * self.curvature_b_abs * q * q,
                -self.curvature_b_abs * q,
            )
        } else {
            let q = w - self.min_c;
            (0.5 * self.curvature_a * q * q, self.curvature_a * q)
        }
    }

    /// Distance from basin a to the saddle.
    pub fn barrier_width(&self) -> f64 {
        self.saddle_b - self.min_a
    }
}

impl LossSurface for DoubleWell1D {
    fn dim(&self) -> usize {
        1
    }

    fn loss(&self, w: &[f64]) -> f64 {
        self.loss1(w[0])
    }

    fn gradient_into(&self, w: &[f64], out: &mut [f64]) {
        out[0] = self.gradient1(w[0]);
    }
}
