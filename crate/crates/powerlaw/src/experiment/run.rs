//! Experiment execution. Each kind validates and resolves its parameters,
//! computes everything in memory, and hands back finished artifacts; the
//! caller commits them atomically together with the manifest.

use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::{match_lambda2, run, IntegratorConfig, Mode, NoiseSpec, PowerLawNoise, RunTarget};
use crate::error::{Error, Result};
use crate::escape::{
    mc_passage_times, success_rate, tau_alpha_stable_1d, tau_langevin_1d, tau_power_law_1d,
    AbsorbAt, EscapeProblem1D, EscapeRegion, FirstPassageStats,
};
use crate::landscape::{DoubleWell1D, EmpiricalToyLoss, LossSurface, QuadraticBasin};
use crate::noise::{scan_noise_trace, ScalarNoiseParams};
use crate::pacbayes::{generalization_bound, kl_exact_form, kl_upper_bound, BoundInputs};
use crate::rng::{derive_seed, stream_rng};
use crate::stationary::{FullStationary1D, PowerLawKappa1D};
use crate::tailfit::fit_power_law_kappa;

use super::config::*;
use super::emit::{commit_artifacts, csv_document, fmt_float, json_document, Artifact};

// Phase labels for seed derivation. Distinct phases of one experiment must
// never share a stream family, or a calibration pass would correlate with
// the simulation it calibrates.
const PHASE_MATCH_LAMBDA2: u64 = 101;
const PHASE_SGD: u64 = 150;
const PHASE_SWEEP_BASE: u64 = 200;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// What a finished run wrote and what it wants printed to stderr.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Runs one experiment end to end: resolve, compute, then write all
/// artifacts plus `manifest.json` atomically into the output directory.
/// The manifest is itself a valid config reproducing the run byte for byte.
pub fn run_experiment(config: ExperimentConfig, overrides: &Overrides) -> Result<RunReport> {
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| config.out.clone())
        .ok_or_else(|| {
            Error::Config("no output directory: set `out` in the config or pass --out".to_string())
        })?;
    let master_seed = overrides
        .seed
        .or(config.master_seed)
        .unwrap_or_else(rand::random);

    let execute = || -> Result<(ResolvedConfig, Vec<Artifact>, Vec<String>)> {
        let (params, artifacts, warnings) = match config.params.clone() {
            Params::Simulate(p) => run_simulate(p, master_seed)?,
            Params::Density(p) => run_density(p)?,
            Params::EscapeAnalytic(p) => run_escape_analytic(p)?,
            Params::EscapeMc(p) => run_escape_mc(p, master_seed)?,
            Params::SuccessRate(p) => run_success_rate(p, master_seed)?,
            Params::NoiseScan(p) => run_noise_scan(p, master_seed)?,
            Params::Fit(p) => run_fit(p, master_seed)?,
            Params::Bound(p) => run_bound(p)?,
        };
        let resolved = ResolvedConfig {
            schema_version: SCHEMA_VERSION,
            kind: params.kind(),
            master_seed,
            params,
        };
        Ok((resolved, artifacts, warnings))
    };

    let (resolved, mut artifacts, warnings) = match overrides.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(execute)?
        }
        None => execute()?,
    };

    artifacts.push(Artifact::new("manifest.json", json_document(&resolved)?));
    let files = commit_artifacts(&out_dir, &artifacts)?;
    Ok(RunReport {
        out_dir,
        files,
        warnings,
    })
}

// ---------------------------------------------------------------------
// simulate

enum BuiltLandscape {
    Quadratic(QuadraticBasin),
    Toy(EmpiricalToyLoss),
    DoubleWell(DoubleWell1D),
}

impl BuiltLandscape {
    fn as_surface(&self) -> &dyn LossSurface {
        match self {
            BuiltLandscape::Quadratic(b) => b,
            BuiltLandscape::Toy(t) => t,
            BuiltLandscape::DoubleWell(w) => w,
        }
    }
}

fn build_landscape(spec: &LandscapeSpec) -> Result<BuiltLandscape> {
    Ok(match spec {
        LandscapeSpec::Quadratic(q) => {
            let d = q.center.len();
            if q.curvatures.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: q.curvatures.len(),
                });
            }
            let hessian = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
                q.curvatures.clone(),
            ));
            BuiltLandscape::Quadratic(QuadraticBasin::new(
                nalgebra::DVector::from_vec(q.center.clone()),
                hessian,
                q.base_loss,
            )?)
        }
        LandscapeSpec::Toy(t) => {
            BuiltLandscape::Toy(EmpiricalToyLoss::generate(t.n, t.data_std, t.data_seed, t.scale)?)
        }
        LandscapeSpec::DoubleWell(w) => BuiltLandscape::DoubleWell(DoubleWell1D::new(
            w.min_a,
            w.curvature_a,
            w.curvature_b_abs,
            w.barrier,
        )?),
    })
}

#[derive(Serialize)]
struct SimulateSummary {
    config_hash: String,
    records: usize,
    final_state: Vec<f64>,
    final_loss: f64,
}

fn run_simulate(mut p: SimulateParams, seed: u64) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    // a one-dimensional quadratic pins the noise center and curvature
    if let (Some(noise), LandscapeSpec::Quadratic(q)) = (&mut p.noise, &p.landscape) {
        if q.center.len() == 1 {
            noise.center.get_or_insert(q.center[0]);
            noise.curvature.get_or_insert(q.curvatures[0]);
        }
    }

    let built = build_landscape(&p.landscape)?;
    let surface = built.as_surface();
    let config = IntegratorConfig {
        eta: p.eta,
        steps: p.steps,
        mode: p.mode,
        master_seed: seed,
        record_every: p.record_every,
        lambda1: p.lambda1,
        lambda2: p.lambda2,
        batch_size: p.batch_size,
    };

    let scalar_noise = match (&p.mode, &p.noise) {
        (Mode::PowerLaw, Some(n)) => {
            let center = n.center.ok_or_else(|| {
                Error::Config("noise.center is required for this landscape".to_string())
            })?;
            let curvature = n.curvature.ok_or_else(|| {
                Error::Config("noise.curvature is required for this landscape".to_string())
            })?;
            Some(ScalarNoiseParams::new(
                n.sigma_g, n.sigma_h, n.rho_gh, center, curvature, p.eta,
            )?)
        }
        (Mode::PowerLaw, None) => {
            return Err(Error::Config(
                "POWER_LAW mode needs a noise block".to_string(),
            ))
        }
        _ => None,
    };
    let constant_cov = match (&p.mode, &p.noise) {
        (Mode::Langevin, Some(n)) => {
            Some(DMatrix::identity(surface.dim(), surface.dim()) * n.sigma_g)
        }
        (Mode::Langevin, None) => {
            return Err(Error::Config(
                "LANGEVIN mode needs a noise block".to_string(),
            ))
        }
        _ => None,
    };

    let trajectory = match p.mode {
        Mode::Sgd | Mode::ToyPowerLaw => {
            let toy = match &built {
                BuiltLandscape::Toy(t) => t,
                _ => {
                    return Err(Error::Config(format!(
                        "{} mode runs on the toy landscape",
                        p.mode
                    )))
                }
            };
            run(&config, RunTarget::Toy(toy), NoiseSpec::None, &p.w0)?
        }
        Mode::Langevin => run(
            &config,
            RunTarget::Surface(surface),
            NoiseSpec::Constant(constant_cov.as_ref().unwrap()),
            &p.w0,
        )?,
        Mode::PowerLaw => run(
            &config,
            RunTarget::Surface(surface),
            NoiseSpec::PowerLaw(PowerLawNoise::Scalar(scalar_noise.as_ref().unwrap())),
            &p.w0,
        )?,
    };

    let d = trajectory.states[0].len();
    let mut header = String::from("step");
    for i in 0..d {
        header.push_str(&format!(",w{i}"));
    }
    header.push_str(",loss");
    let losses = trajectory.losses.as_ref().expect("losses always recorded");
    let rows: Vec<String> = trajectory
        .states
        .iter()
        .zip(losses)
        .enumerate()
        .map(|(i, (state, loss))| {
            let mut row = (i as u64 * p.record_every).to_string();
            for w in state {
                row.push(',');
                row.push_str(&fmt_float(*w));
            }
            row.push(',');
            row.push_str(&fmt_float(*loss));
            row
        })
        .collect();

    let summary = SimulateSummary {
        config_hash: trajectory.config_hash.clone(),
        records: trajectory.states.len(),
        final_state: trajectory.states.last().unwrap().clone(),
        final_loss: *losses.last().unwrap(),
    };
    let artifacts = vec![
        Artifact::new("trajectory.csv", csv_document(&header, rows)),
        Artifact::new("simulate.json", json_document(&summary)?),
    ];
    Ok((Params::Simulate(p), artifacts, Vec::new()))
}

// ---------------------------------------------------------------------
// density

#[derive(Serialize)]
struct DensitySummary {
    form: &'static str,
    kappa: f64,
    normalizer: Option<f64>,
    half_width: Option<f64>,
}

fn run_density(mut p: DensityParams) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    // hi.is_nan() keeps the NaN rejection a bare `hi <= lo` would lose
    if p.grid.points < 2 || p.grid.hi.is_nan() || p.grid.lo.is_nan() || p.grid.hi <= p.grid.lo {
        return Err(Error::Config(
            "grid needs hi > lo and at least 2 points".to_string(),
        ));
    }
    let full_fields = [p.rho_gh.is_some(), p.eta.is_some(), p.curvature.is_some()];
    let summary;
    let density: Box<dyn Fn(f64) -> f64> = if let Some(kappa) = p.kappa {
        if full_fields.iter().any(|f| *f) {
            return Err(Error::Config(
                "give either kappa (simplified form) or rho_gh/eta/curvature (full form), not both"
                    .to_string(),
            ));
        }
        let dist = PowerLawKappa1D::new(kappa, p.sigma_g, p.sigma_h, p.center)?;
        summary = DensitySummary {
            form: "power-law",
            kappa,
            normalizer: Some(dist.normalizer()),
            half_width: None,
        };
        Box::new(move |w| dist.density(w))
    } else {
        if !full_fields.iter().all(|f| *f) {
            return Err(Error::Config(
                "full form needs rho_gh, eta and curvature together".to_string(),
            ));
        }
        let (rho, eta, curvature) = (p.rho_gh.unwrap(), p.eta.unwrap(), p.curvature.unwrap());
        let params = ScalarNoiseParams::new(p.sigma_g, p.sigma_h, rho, p.center, curvature, eta)?;
        let kappa = params.kappa();
        // default window: generous multiple of the tail scale, at least the grid
        let half_width = *p.half_width.get_or_insert_with(|| {
            let tail = 2000.0 * (p.sigma_g / p.sigma_h).sqrt();
            let grid_reach = (p.grid.hi - p.center).abs().max((p.grid.lo - p.center).abs());
            tail.max(4.0 * grid_reach)
        });
        let dist = FullStationary1D::new(params, half_width)?;
        summary = DensitySummary {
            form: "full",
            kappa,
            normalizer: None,
            half_width: Some(half_width),
        };
        Box::new(move |w| dist.density(w))
    };

    let rows: Vec<String> = linspace(p.grid.lo, p.grid.hi, p.grid.points)
        .into_iter()
        .map(|w| format!("{},{}", fmt_float(w), fmt_float(density(w))))
        .collect();
    let artifacts = vec![
        Artifact::new("density.csv", csv_document("w,density", rows)),
        Artifact::new("density.json", json_document(&summary)?),
    ];
    Ok((Params::Density(p), artifacts, Vec::new()))
}

// ---------------------------------------------------------------------
// escape-analytic

fn run_escape_analytic(p: EscapeAnalyticParams) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    let mut rows = Vec::new();
    let mut hot = 0usize;
    for &h_a in &p.h_a {
        for &h_b_abs in &p.h_b_abs {
            for &delta_l in &p.delta_l {
                let problem =
                    EscapeProblem1D::new(h_a, h_b_abs, delta_l, p.eta, p.sigma_g, p.kappa)?;
                let tau_pl = tau_power_law_1d(&problem)?;
                let tau_lv = tau_langevin_1d(h_a, h_b_abs, delta_l, p.eta, p.sigma_g)?;
                // the stable-noise formula needs the barrier width; take it
                // from the canonical double well with this geometry
                let width = DoubleWell1D::new(0.0, h_a, h_b_abs, delta_l)?.barrier_width();
                let tau_st = tau_alpha_stable_1d(p.alpha, p.eta, p.sigma_g, width)?;
                let ratio = problem.temperature_ratio();
                if !problem.low_temperature() {
                    hot += 1;
                }
                rows.push(format!(
                    "{},{},{},{},{},{},{},{},{}",
                    fmt_float(h_a),
                    fmt_float(h_b_abs),
                    fmt_float(delta_l),
                    fmt_float(width),
                    fmt_float(ratio),
                    problem.low_temperature(),
                    fmt_float(tau_pl),
                    fmt_float(tau_lv),
                    fmt_float(tau_st),
                ));
            }
        }
    }
    let mut warnings = Vec::new();
    if hot > 0 {
        warnings.push(format!(
            "{hot} of {} grid points lie outside the low-temperature regime \
             (eta*sigma_g/delta_l > 0.1); the closed-form escape times degrade there",
            rows.len()
        ));
    }
    let header = "h_a,h_b_abs,delta_l,barrier_width,temperature_ratio,low_temperature,\
                  tau_power_law,tau_langevin,tau_alpha_stable";
    let artifacts = vec![Artifact::new(
        "escape_analytic.csv",
        csv_document(header, rows),
    )];
    Ok((Params::EscapeAnalytic(p), artifacts, warnings))
}

// ---------------------------------------------------------------------
// escape-mc

#[derive(Serialize)]
struct EscapeMcSummary {
    mode: Mode,
    absorb: AbsorbAt,
    kappa: Option<f64>,
    temperature_ratio: f64,
    trials: usize,
    escaped: usize,
    censored: usize,
    mean_time: Option<f64>,
    ci95: Option<f64>,
    tau_power_law: Option<f64>,
    tau_langevin: f64,
}

fn run_escape_mc(p: EscapeMcParams, seed: u64) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    let well = DoubleWell1D::new(
        p.well.min_a,
        p.well.curvature_a,
        p.well.curvature_b_abs,
        p.well.barrier,
    )?;
    let noise = ScalarNoiseParams::new(
        p.sigma_g,
        p.sigma_h,
        0.0,
        well.min_a,
        well.curvature_a,
        p.eta,
    )?;
    let times = mc_passage_times(
        &well, &noise, p.eta, p.max_steps, p.trials, seed, p.mode, p.absorb,
    )?;
    let stats = FirstPassageStats::from_times(&times);

    let kappa = noise.kappa();
    let tau_pl = if kappa.is_finite() {
        Some(tau_power_law_1d(&EscapeProblem1D::new(
            well.curvature_a,
            well.curvature_b_abs,
            well.barrier,
            p.eta,
            p.sigma_g,
            kappa,
        )?)?)
    } else {
        None
    };
    let tau_lv = tau_langevin_1d(
        well.curvature_a,
        well.curvature_b_abs,
        well.barrier,
        p.eta,
        p.sigma_g,
    )?;
    let ratio = p.eta * p.sigma_g / well.barrier;

    let mut warnings = Vec::new();
    if ratio > 0.1 {
        warnings.push(format!(
            "eta*sigma_g/barrier = {ratio:.3} exceeds 0.1; closed-form escape \
             times are unreliable this far from the low-temperature regime"
        ));
    }
    if stats.censored > 0 {
        warnings.push(format!(
            "{} of {} trials were censored at max_steps; the mean passage time \
             is biased low",
            stats.censored, stats.trials
        ));
    }

    let summary = EscapeMcSummary {
        mode: p.mode,
        absorb: p.absorb,
        kappa: kappa.is_finite().then_some(kappa),
        temperature_ratio: ratio,
        trials: stats.trials,
        escaped: stats.escaped,
        censored: stats.censored,
        mean_time: stats.mean_time,
        ci95: stats.ci95,
        tau_power_law: tau_pl,
        tau_langevin: tau_lv,
    };
    let mut artifacts = vec![Artifact::new("escape_mc.json", json_document(&summary)?)];
    if p.emit_times {
        let rows: Vec<String> = times
            .iter()
            .enumerate()
            .map(|(i, t)| match t {
                Some(t) => format!("{i},{}", fmt_float(*t)),
                None => format!("{i},"),
            })
            .collect();
        artifacts.push(Artifact::new(
            "passage_times.csv",
            csv_document("trial,time", rows),
        ));
    }
    Ok((Params::EscapeMc(p), artifacts, warnings))
}

// ---------------------------------------------------------------------
// success-rate

#[derive(Serialize)]
struct RatePoint {
    lambda1: f64,
    rate: f64,
}

#[derive(Serialize)]
struct SuccessRateSummary {
    lambda2: f64,
    region: RegionSpec,
    rates: Vec<RatePoint>,
    sgd_rate: Option<f64>,
}

fn run_success_rate(
    mut p: SuccessRateParams,
    seed: u64,
) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    let toy = EmpiricalToyLoss::generate(p.toy.n, p.toy.data_std, p.toy.data_seed, p.toy.scale)?;
    let region_spec = *p.region.get_or_insert(RegionSpec {
        lo: [0.0, 0.0],
        hi: [2.0, 2.0],
    });
    let region = EscapeRegion::new(region_spec.lo, region_spec.hi)?;

    if (p.lambda2.is_none() || p.include_sgd) && p.batch_size.is_none() {
        return Err(Error::Config(
            "batch_size is required to match lambda2 or to run the SGD baseline".to_string(),
        ));
    }
    let lambda2 = match p.lambda2 {
        Some(l2) => l2,
        None => {
            // same interior search box success_rate uses for its start point
            let w_star =
                toy.empirical_minimum(region_spec.lo[0].max(0.5), region_spec.hi[0].min(1.5))?;
            match_lambda2(
                &toy,
                &w_star,
                p.batch_size.unwrap(),
                p.match_draws,
                derive_seed(seed, PHASE_MATCH_LAMBDA2),
            )?
        }
    };
    p.lambda2 = Some(lambda2);

    let mut rates = Vec::with_capacity(p.lambda1_values.len());
    for (i, &lambda1) in p.lambda1_values.iter().enumerate() {
        let rate = success_rate(
            &toy,
            lambda1,
            lambda2,
            p.eta,
            p.steps,
            p.runs,
            derive_seed(seed, PHASE_SWEEP_BASE + i as u64),
            Mode::ToyPowerLaw,
            None,
            &region,
        )?;
        rates.push(RatePoint { lambda1, rate });
    }
    let sgd_rate = if p.include_sgd {
        Some(success_rate(
            &toy,
            0.0,
            0.0,
            p.eta,
            p.steps,
            p.runs,
            derive_seed(seed, PHASE_SGD),
            Mode::Sgd,
            p.batch_size,
            &region,
        )?)
    } else {
        None
    };

    let mut rows: Vec<String> = rates
        .iter()
        .map(|r| format!("power-law,{},{}", fmt_float(r.lambda1), fmt_float(r.rate)))
        .collect();
    if let Some(rate) = sgd_rate {
        rows.push(format!("sgd,,{}", fmt_float(rate)));
    }
    let summary = SuccessRateSummary {
        lambda2,
        region: region_spec,
        rates,
        sgd_rate,
    };
    let artifacts = vec![
        Artifact::new("success_rate.json", json_document(&summary)?),
        Artifact::new(
            "success_rate.csv",
            csv_document("dynamic,lambda1,rate", rows),
        ),
    ];
    Ok((Params::SuccessRate(p), artifacts, Vec::new()))
}

// ---------------------------------------------------------------------
// noise-scan

#[derive(Serialize)]
struct NoiseScanSummary {
    center: [f64; 2],
    direction: [f64; 2],
    quad_coeffs: [f64; 3],
    r_squared: f64,
    argmin_offset: f64,
    degenerate: bool,
}

fn run_noise_scan(
    mut p: NoiseScanParams,
    seed: u64,
) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    if p.points < 3 {
        return Err(Error::Config(
            "noise scan needs at least 3 points for a quadratic fit".to_string(),
        ));
    }
    if p.half_width.is_nan() || p.half_width <= 0.0 {
        return Err(Error::Config("half_width must be positive".to_string()));
    }
    let toy = EmpiricalToyLoss::generate(p.toy.n, p.toy.data_std, p.toy.data_seed, p.toy.scale)?;
    let center = *p
        .center
        .get_or_insert(toy.empirical_minimum(0.5, 1.5)?);
    let offsets = linspace(-p.half_width, p.half_width, p.points);
    let scan = scan_noise_trace(
        &toy,
        &center,
        &p.direction,
        &offsets,
        p.batch_size,
        p.draws,
        seed,
    )?;

    let mut warnings = Vec::new();
    if scan.degenerate {
        warnings.push(
            "noise traces are numerically degenerate; the quadratic fit is meaningless"
                .to_string(),
        );
    }

    let point_rows: Vec<String> = scan
        .offsets
        .iter()
        .zip(&scan.traces)
        .map(|(o, t)| format!("{},{}", fmt_float(*o), fmt_float(*t)))
        .collect();
    let [c0, c1, c2] = scan.quad_coeffs;
    let curve_rows: Vec<String> = linspace(-p.half_width, p.half_width, 201)
        .into_iter()
        .map(|o| format!("{},{}", fmt_float(o), fmt_float(c0 + c1 * o + c2 * o * o)))
        .collect();
    let summary = NoiseScanSummary {
        center,
        direction: p.direction,
        quad_coeffs: scan.quad_coeffs,
        r_squared: scan.r_squared,
        argmin_offset: scan.argmin_offset,
        degenerate: scan.degenerate,
    };
    let artifacts = vec![
        Artifact::new("scan_points.csv", csv_document("offset,trace", point_rows)),
        Artifact::new(
            "scan_curve.csv",
            csv_document("offset,fitted_trace", curve_rows),
        ),
        Artifact::new("scan.json", json_document(&summary)?),
    ];
    Ok((Params::NoiseScan(p), artifacts, warnings))
}

// ---------------------------------------------------------------------
// fit

#[derive(Serialize)]
struct FitSummary {
    n_samples: usize,
    kappa_hat: f64,
    scale_hat: f64,
    center_hat: f64,
    log_likelihood: f64,
    ks_statistic: f64,
    converged: bool,
    iterations: u64,
}

fn run_fit(mut p: FitParams, seed: u64) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    if p.bins == 0 {
        return Err(Error::Config("bins must be positive".to_string()));
    }
    let samples: Vec<f64> = match &mut p.source {
        FitSource::Stationary(s) => {
            let dist = PowerLawKappa1D::new(s.kappa, s.sigma_g, s.sigma_h, s.center)?;
            let mut rng = stream_rng(seed, 0);
            dist.sample(s.n, &mut rng)?
        }
        FitSource::Chain(c) => {
            let w0 = *c.w0.get_or_insert(c.center);
            let basin = QuadraticBasin::scalar(c.center, c.curvature, 0.0)?;
            let noise =
                ScalarNoiseParams::simplified(c.sigma_g, c.sigma_h, c.center, c.curvature, c.eta)?;
            let config = IntegratorConfig {
                eta: c.eta,
                steps: c.steps,
                mode: Mode::PowerLaw,
                master_seed: seed,
                record_every: c.record_every,
                lambda1: None,
                lambda2: None,
                batch_size: None,
            };
            let trajectory = run(
                &config,
                RunTarget::Surface(&basin),
                NoiseSpec::PowerLaw(PowerLawNoise::Scalar(&noise)),
                &[w0],
            )?;
            let kept: Vec<f64> = trajectory
                .states
                .iter()
                .skip(c.burn_in_records)
                .map(|s| s[0])
                .collect();
            if kept.len() < 100 {
                return Err(Error::Config(format!(
                    "chain source kept {} records after burn-in; the fit needs at least 100",
                    kept.len()
                )));
            }
            kept
        }
    };

    let fit = fit_power_law_kappa(&samples)?;
    let mut warnings = Vec::new();
    if !fit.converged {
        warnings.push(format!(
            "tail fit hit the iteration cap ({} iterations); reporting the best iterate",
            fit.iterations
        ));
    }

    // histogram over the central 99% of the data, fixed bin count
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let lo = sorted[(0.005 * (n - 1) as f64).floor() as usize];
    let hi = sorted[(0.995 * (n - 1) as f64).ceil() as usize];
    // samples are finite here (the fit already rejected NaN), so <= is safe
    if hi <= lo {
        return Err(Error::DegenerateSample(
            "histogram range collapsed; data are nearly constant".to_string(),
        ));
    }
    let width = (hi - lo) / p.bins as f64;
    let mut counts = vec![0u64; p.bins];
    for &w in &sorted {
        if w < lo || w > hi {
            continue;
        }
        let b = (((w - lo) / width) as usize).min(p.bins - 1);
        counts[b] += 1;
    }
    let hist_rows: Vec<String> = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| {
            let (l, r) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
            let density = count as f64 / (n as f64 * width);
            format!(
                "{},{},{count},{}",
                fmt_float(l),
                fmt_float(r),
                fmt_float(density)
            )
        })
        .collect();

    // fitted density overlay on the same support; the same kappa cap the
    // fit itself uses to keep the normalizer finite
    let kappa_ks = fit.kappa_hat.min(1e10);
    let overlay_dist = PowerLawKappa1D::new(
        kappa_ks,
        fit.scale_hat * fit.scale_hat * (2.0 * kappa_ks - 1.0),
        1.0,
        fit.center_hat,
    )?;
    let overlay_rows: Vec<String> = linspace(lo, hi, 257)
        .into_iter()
        .map(|w| format!("{},{}", fmt_float(w), fmt_float(overlay_dist.density(w))))
        .collect();

    let summary = FitSummary {
        n_samples: n,
        kappa_hat: fit.kappa_hat,
        scale_hat: fit.scale_hat,
        center_hat: fit.center_hat,
        log_likelihood: fit.log_likelihood,
        ks_statistic: fit.ks_statistic,
        converged: fit.converged,
        iterations: fit.iterations,
    };
    let artifacts = vec![
        Artifact::new("fit.json", json_document(&summary)?),
        Artifact::new(
            "histogram.csv",
            csv_document("bin_lo,bin_hi,count,density", hist_rows),
        ),
        Artifact::new(
            "overlay.csv",
            csv_document("w,fitted_density", overlay_rows),
        ),
    ];
    Ok((Params::Fit(p), artifacts, warnings))
}

// ---------------------------------------------------------------------
// bound

#[derive(Serialize)]
struct BoundSummary {
    dim: usize,
    kl_upper_bound: f64,
    kl_exact_form: f64,
    generalization_bound: f64,
}

fn run_bound(p: BoundParams) -> Result<(Params, Vec<Artifact>, Vec<String>)> {
    let d = p.hessian.len();
    let to_matrix = |rows: &Vec<Vec<f64>>, name: &str| -> Result<DMatrix<f64>> {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Config(format!("{name} must be a {d}x{d} matrix")));
        }
        Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    };
    let inputs = BoundInputs {
        hessian: to_matrix(&p.hessian, "hessian")?,
        sigma_g_mat: to_matrix(&p.sigma_g_mat, "sigma_g_mat")?,
        eta: p.eta,
        kappa: p.kappa,
        dim: d,
        n_samples: p.n_samples,
        delta: p.delta,
        empirical_risk: p.empirical_risk,
    };
    let summary = BoundSummary {
        dim: d,
        kl_upper_bound: kl_upper_bound(&inputs)?,
        kl_exact_form: kl_exact_form(&inputs)?,
        generalization_bound: generalization_bound(&inputs)?,
    };
    let artifacts = vec![Artifact::new("bound.json", json_document(&summary)?)];
    Ok((Params::Bound(p), artifacts, Vec::new()))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * h).collect()
}
