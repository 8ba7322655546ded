//! Randomized invariants of the numerical core. Each property encodes
//! something the rest of the crate silently relies on.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use powerlaw::escape::{ln_tau_langevin_1d, ln_tau_power_law_1d, EscapeProblem1D};
use powerlaw::experiment::{csv_document, fmt_float};
use powerlaw::landscape::{DoubleWell1D, QuadraticBasin};
use powerlaw::noise::{diffusion_factor, MultivariateNoiseParams, ScalarNoiseParams};
use powerlaw::pacbayes::{kl_exact_form, kl_upper_bound, BoundInputs};
use powerlaw::rng::stream_rng;
use powerlaw::stationary::{normalizer_1d_quadrature, PowerLawKappa1D};
use powerlaw::tailfit::ks_distance;

/// Log-uniform positive scale, spanning several decades.
fn scale(lo_exp: f64, hi_exp: f64) -> impl Strategy<Value = f64> {
    (lo_exp..hi_exp).prop_map(|e| 10f64.powf(e))
}

/// Rotation matrix from the QR factorization of a random square matrix.
/// Used to build commuting SPD pairs Q D Q' with shared eigenvectors.
fn rotation(d: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |i, j| entries[i * d + j]) + DMatrix::identity(d, d) * 0.05;
    a.qr().q()
}

fn spd_from(q: &DMatrix<f64>, spectrum: &[f64]) -> DMatrix<f64> {
    let diag = DMatrix::from_diagonal(&DVector::from_row_slice(spectrum));
    q * diag * q.transpose()
}

proptest! {
    // The scalar noise variance is a nonnegative quadratic whenever the
    // gradient/curvature noise correlation respects Cauchy-Schwarz.
    #[test]
    fn scalar_noise_variance_never_goes_negative(
        sigma_g in scale(-2.0, 2.0),
        sigma_h in scale(-2.0, 2.0),
        frac in -1.0f64..1.0,
        center in -5.0f64..5.0,
        w in -100.0f64..100.0,
    ) {
        let rho = frac * (sigma_g * sigma_h).sqrt();
        let noise = ScalarNoiseParams::new(sigma_g, sigma_h, rho, center, 1.0, 0.1).unwrap();
        prop_assert!(noise.variance_at(w) >= 0.0, "C({w}) = {}", noise.variance_at(w));
    }

    // The closed-form normalizer agrees with adaptive quadrature across the
    // whole admissible parameter box, not just the pinned test points.
    #[test]
    fn normalizer_matches_quadrature_everywhere(
        kappa in 0.6f64..30.0,
        sigma_g in scale(-2.0, 2.0),
        sigma_h in scale(-2.0, 2.0),
    ) {
        let dist = PowerLawKappa1D::new(kappa, sigma_g, sigma_h, 0.0).unwrap();
        let quad = normalizer_1d_quadrature(kappa, sigma_g, sigma_h).unwrap();
        let rel = (dist.normalizer() / quad - 1.0).abs();
        prop_assert!(rel < 1e-7, "rel err {rel:.3e} at kappa {kappa}");
    }

    // Sampling is a pure function of (master seed, stream index).
    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>(), kappa in 0.6f64..20.0) {
        let dist = PowerLawKappa1D::new(kappa, 1.0, 1.0, 0.0).unwrap();
        let a = dist.sample(64, &mut stream_rng(seed, 3)).unwrap();
        let b = dist.sample(64, &mut stream_rng(seed, 3)).unwrap();
        prop_assert_eq!(&a, &b);
        let c = dist.sample(64, &mut stream_rng(seed, 4)).unwrap();
        prop_assert_ne!(&a, &c);
    }

    // The state-dependent covariance stays SPD away from the center and its
    // Cholesky factor reconstructs it, so the integrator can always draw.
    #[test]
    fn covariance_factor_reconstructs(
        entries in proptest::collection::vec(-1.0f64..1.0, 9),
        h_spec in proptest::collection::vec(0.1f64..10.0, 3),
        g_spec in proptest::collection::vec(0.1f64..10.0, 3),
        kappa in 0.6f64..20.0,
        w in proptest::collection::vec(-8.0f64..8.0, 3),
    ) {
        let q = rotation(3, &entries);
        let noise = MultivariateNoiseParams::new(
            spd_from(&q, &g_spec),
            spd_from(&q, &h_spec),
            kappa,
            0.1,
            DVector::zeros(3),
        ).unwrap();
        let cov = noise.covariance_at(&w).unwrap();
        let factor = diffusion_factor(&cov).unwrap();
        let rebuilt = &factor * factor.transpose();
        let scale = cov.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = (&rebuilt - &cov).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(err <= 1e-10 * scale.max(1.0), "reconstruction error {err:.3e}");
    }

    // The quadratic form behind the covariance vanishes exactly at the
    // center and is positive anywhere else.
    #[test]
    fn quadratic_form_is_anchored_at_the_center(
        entries in proptest::collection::vec(-1.0f64..1.0, 4),
        h_spec in proptest::collection::vec(0.1f64..10.0, 2),
        g_spec in proptest::collection::vec(0.1f64..10.0, 2),
        center in proptest::collection::vec(-3.0f64..3.0, 2),
        offset in proptest::collection::vec(-4.0f64..4.0, 2),
    ) {
        let q = rotation(2, &entries);
        let noise = MultivariateNoiseParams::new(
            spd_from(&q, &g_spec),
            spd_from(&q, &h_spec),
            2.0,
            0.1,
            DVector::from_row_slice(&center),
        ).unwrap();
        prop_assert_eq!(noise.quadratic_form(&center).unwrap(), 0.0);
        if offset.iter().any(|x| x.abs() > 1e-9) {
            let w: Vec<f64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
            prop_assert!(noise.quadratic_form(&w).unwrap() > 0.0);
        }
    }

    // Mean escape time grows with the barrier, and the Langevin-to-power-law
    // ratio grows with it too: heavy tails help more the higher the wall.
    #[test]
    fn escape_time_and_ratio_grow_with_the_barrier(
        h_a in 0.2f64..5.0,
        h_b in 0.2f64..5.0,
        eta in 0.001f64..0.5,
        sigma in scale(-1.0, 1.0),
        kappa in 0.6f64..50.0,
        dl_lo in 0.01f64..2.0,
        bump in 0.1f64..4.0,
    ) {
        let dl_hi = dl_lo + bump;
        let lo = EscapeProblem1D::new(h_a, h_b, dl_lo, eta, sigma, kappa).unwrap();
        let hi = EscapeProblem1D::new(h_a, h_b, dl_hi, eta, sigma, kappa).unwrap();
        let (ln_lo, ln_hi) = (ln_tau_power_law_1d(&lo).unwrap(), ln_tau_power_law_1d(&hi).unwrap());
        prop_assert!(ln_hi > ln_lo, "tau not increasing: {ln_lo} -> {ln_hi}");
        let ratio_lo = ln_tau_langevin_1d(h_a, h_b, dl_lo, eta, sigma).unwrap() - ln_lo;
        let ratio_hi = ln_tau_langevin_1d(h_a, h_b, dl_hi, eta, sigma).unwrap() - ln_hi;
        prop_assert!(ratio_hi > ratio_lo, "ratio not increasing: {ratio_lo} -> {ratio_hi}");
    }

    // The double well exposes a consistent (loss, gradient) pair: central
    // differences of the loss match the analytic gradient everywhere,
    // including across the piecewise joins.
    #[test]
    fn double_well_gradient_matches_its_loss(
        min_a in -2.0f64..2.0,
        h_a in 0.2f64..20.0,
        h_b in 0.2f64..20.0,
        barrier in 0.1f64..5.0,
        t in 0.0f64..1.0,
    ) {
        let well = DoubleWell1D::new(min_a, h_a, h_b, barrier).unwrap();
        let span = 3.0 * well.barrier_width();
        let w = min_a - 0.5 * span + 2.0 * span * t;
        let h = 1e-5 * span.max(1e-3);
        let fd = (well.loss1(w + h) - well.loss1(w - h)) / (2.0 * h);
        let grad = well.gradient1(w);
        // C1 at the joins: central differences may straddle a curvature jump,
        // which costs at most max|L''| * h.
        let tol = h * (h_a.max(h_b)) * 1.5 + 1e-9;
        prop_assert!((fd - grad).abs() <= tol, "fd {fd} vs grad {grad} at {w}");
    }

    // A quadratic basin never dips below its base loss and is flat exactly
    // at its center.
    #[test]
    fn quadratic_basin_floors_at_its_center(
        center in -5.0f64..5.0,
        curvature in 0.01f64..100.0,
        base in -10.0f64..10.0,
        w in -50.0f64..50.0,
    ) {
        let basin = QuadraticBasin::scalar(center, curvature, base).unwrap();
        let q = DVector::from_row_slice(&[w]);
        let loss = 0.5 * curvature * (w - center).powi(2) + base;
        let got = basin.base_loss()
            + 0.5 * ((basin.hessian() * (&q - basin.center())).dot(&(&q - basin.center())));
        prop_assert!((got - loss).abs() <= 1e-9 * (1.0 + loss.abs()));
        prop_assert!(got >= base - 1e-12 * (1.0 + base.abs()));
    }

    // Float formatting round-trips every finite value bit for bit; the CSV
    // layer depends on this for cross-run determinism.
    #[test]
    fn float_formatting_round_trips(x in any::<f64>()) {
        prop_assume!(x.is_finite());
        let parsed: f64 = fmt_float(x).parse().unwrap();
        prop_assert_eq!(parsed.to_bits(), x.to_bits());
    }

    // CSV documents have exactly one line per row plus the header, LF only.
    #[test]
    fn csv_layout_is_stable(
        rows in proptest::collection::vec(
            proptest::collection::vec(-1e6f64..1e6, 3), 0..40),
    ) {
        let lines: Vec<String> = rows
            .iter()
            .map(|r| r.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(","))
            .collect();
        let doc = csv_document("a,b,c", &lines);
        prop_assert!(doc.ends_with('\n'));
        prop_assert!(!doc.contains('\r'));
        let got: Vec<&str> = doc.lines().collect();
        prop_assert_eq!(got.len(), rows.len() + 1);
        for line in got {
            prop_assert_eq!(line.matches(',').count(), 2);
        }
    }

    // The closed-form KL never exceeds its simplified upper bound on
    // commuting SPD inputs, whatever the conditioning.
    #[test]
    fn kl_exact_form_stays_below_the_upper_bound(
        entries in proptest::collection::vec(-1.0f64..1.0, 9),
        h_spec in proptest::collection::vec(0.05f64..20.0, 3),
        g_spec in proptest::collection::vec(0.05f64..20.0, 3),
        eta in 0.01f64..4.0,
        kappa_gap in 0.05f64..30.0,
    ) {
        let q = rotation(3, &entries);
        let inputs = BoundInputs {
            hessian: spd_from(&q, &h_spec),
            sigma_g_mat: spd_from(&q, &g_spec),
            eta,
            kappa: 1.5 + kappa_gap,
            dim: 3,
            n_samples: 500,
            delta: 0.05,
            empirical_risk: 0.0,
        };
        let upper = kl_upper_bound(&inputs).unwrap();
        let exact = kl_exact_form(&inputs).unwrap();
        prop_assert!(
            exact <= upper + 1e-10 * (1.0 + upper.abs()),
            "exact {exact} > upper {upper}"
        );
    }

    // KS distance is a proper statistic: always within [0, 1].
    #[test]
    fn ks_distance_is_bounded(
        samples in proptest::collection::vec(-50.0f64..50.0, 10..200),
        kappa in 0.6f64..20.0,
    ) {
        let dist = PowerLawKappa1D::new(kappa, 1.0, 1.0, 0.0).unwrap();
        let ks = ks_distance(&samples, &dist).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks), "ks = {ks}");
    }
}
