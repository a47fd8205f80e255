//! Reproducible Monte Carlo experiments for the SRIVC estimator.
//!
//! Every trial draws its input and noise from its own ChaCha stream keyed by
//! `(seed, trial, role)`, so results do not depend on how trials are spread
//! over worker threads. Aggregation runs in trial order.

mod config;
mod excitation;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub use config::{ExperimentConfig, Parallelism, Samples, SrivcSettings};
pub use excitation::{check_excitation, ExcitationReport};

use crate::efficiency::{CovarianceKind, CovarianceReport, ReportMetadata};
use crate::error::{Error, Result};
use crate::lti::{FilterBank, Hold, ThetaVector};
use crate::srivc::{srivc_estimate, DataRecord, SrivcConfig};

/// Label for the standard-error method used in empirical reports.
pub const STDERR_METHOD: &str = "sem";

/// What a per-trial random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Input = 0,
    Noise = 1,
}

/// Independent generator for one `(seed, trial, role)` triple.
pub fn trial_stream(seed: u64, trial: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 2) | role as u64);
    rng
}

/// `n` i.i.d. zero-mean Gaussian samples with the given variance.
pub fn generate_input(n: usize, variance: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd = variance.sqrt();
    (0..n)
        .map(|_| sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

/// White measurement noise with variance `lambda`.
pub fn generate_noise(n: usize, lambda: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    generate_input(n, lambda, rng)
}

/// Noise-free response of `B*/A*` under `input_hold`, plus the noise drawn
/// from `rng`. Returns the record and the noise sequence.
pub fn simulate_with_noise(
    u: &[f64],
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    input_hold: Hold,
    rng: &mut ChaCha8Rng,
) -> Result<(DataRecord, Vec<f64>)> {
    let tf = theta_sys.to_tf()?;
    let bank = FilterBank::new(tf.den(), std::slice::from_ref(tf.num()), period, input_hold)?;
    let x = bank.apply(u);
    let e = generate_noise(u.len(), lambda, rng);
    let y = x.column(0).iter().zip(&e).map(|(x, e)| x + e).collect();
    Ok((DataRecord::new(u.to_vec(), y, period)?, e))
}

/// `y(t_k) = {B*/A* u}(t_k) + e(t_k)`, `e ~ N(0, lambda)` i.i.d.
pub fn simulate_system(
    u: &[f64],
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    input_hold: Hold,
    rng: &mut ChaCha8Rng,
) -> Result<DataRecord> {
    Ok(simulate_with_noise(u, theta_sys, lambda, period, input_hold, rng)?.0)
}

/// The data set trial `trial` of `cfg` sees at sample size `n`, and the
/// noise that produced it.
pub fn trial_data(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<(DataRecord, Vec<f64>)> {
    let total = n + cfg.warmup;
    let mut urng = trial_stream(cfg.seed, trial as u64, StreamRole::Input);
    let mut erng = trial_stream(cfg.seed, trial as u64, StreamRole::Noise);
    let u = generate_input(total, cfg.input_variance, &mut urng);
    let (data, e) = simulate_with_noise(&u, &cfg.theta, cfg.lambda, cfg.period, cfg.input_hold, &mut erng)?;
    if cfg.warmup == 0 {
        return Ok((data, e));
    }
    let w = cfg.warmup;
    Ok((
        DataRecord::new(data.u[w..].to_vec(), data.y[w..].to_vec(), cfg.period)?,
        e[w..].to_vec(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedRun {
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct McResult {
    /// `N/R sum (theta_r - theta*)(theta_r - theta*)^T` over converged runs.
    pub empirical_cov: CovarianceReport,
    /// Converged estimates, one row per run in trial order.
    pub per_run_estimates: Option<DMatrix<f64>>,
    pub convergence_rate: f64,
    pub failed_runs: Vec<FailedRun>,
    pub samples: usize,
    pub theta_true: ThetaVector,
    pub mean_iterations: f64,
}

impl McResult {
    /// Empirical covariance over the first `runs` converged trials. Needs the
    /// per-run estimates.
    pub fn covariance_over(&self, runs: usize) -> Result<CovarianceReport> {
        let est = self
            .per_run_estimates
            .as_ref()
            .ok_or_else(|| Error::Config("per-run estimates were not kept".into()))?;
        if runs == 0 || runs > est.nrows() {
            return Err(Error::InsufficientData(format!(
                "{runs} runs requested, {} available",
                est.nrows()
            )));
        }
        let mut report = aggregate(&est.rows(0, runs).into_owned(), &self.theta_true, self.samples);
        report.lambda = self.empirical_cov.lambda;
        report.metadata = ReportMetadata {
            runs: Some(runs),
            ..self.empirical_cov.metadata.clone()
        };
        Ok(report)
    }
}

/// Mean of the scaled outer products and their standard errors of the mean.
fn aggregate(estimates: &DMatrix<f64>, theta: &ThetaVector, samples: usize) -> CovarianceReport {
    let (r, d) = (estimates.nrows(), estimates.ncols());
    let truth = DVector::from_vec(theta.stacked());
    let scale = samples as f64;
    let mut sum = DMatrix::zeros(d, d);
    let mut sum_sq = DMatrix::zeros(d, d);
    for row in estimates.row_iter() {
        let dev = row.transpose() - &truth;
        let outer = &dev * dev.transpose() * scale;
        sum_sq += outer.component_mul(&outer);
        sum += outer;
    }
    let rf = r as f64;
    let mean = &sum / rf;
    let stderr = if r > 1 {
        let var = (sum_sq - mean.component_mul(&mean) * rf) / (rf - 1.0);
        var.map(|v| (v.max(0.0) / rf).sqrt())
    } else {
        DMatrix::from_element(d, d, f64::NAN)
    };
    let mut report = CovarianceReport::new(mean, CovarianceKind::Empirical, f64::NAN, ReportMetadata::default());
    report.stderr = Some(stderr);
    report
}

enum Outcome {
    Converged { theta: Vec<f64>, iterations: usize },
    Failed(String),
}

fn run_trial(cfg: &ExperimentConfig, scfg: &SrivcConfig, n: usize, trial: usize) -> Outcome {
    let data = match trial_data(cfg, n, trial) {
        Ok((d, _)) => d,
        Err(e) => return Outcome::Failed(format!("data generation: {e}")),
    };
    match srivc_estimate(&data, scfg) {
        Ok(est) if est.converged => Outcome::Converged {
            theta: est.theta.stacked(),
            iterations: est.iterations,
        },
        Ok(est) => Outcome::Failed(format!("no convergence after {} iterations", est.iterations)),
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

fn in_pool<T: Send>(parallelism: Parallelism, f: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        Parallelism::Auto => Ok(f()),
        Parallelism::Workers(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run_at(cfg: &ExperimentConfig, n: usize) -> Result<McResult> {
    let scfg = cfg.srivc_config()?;
    let outcomes: Vec<Outcome> = in_pool(cfg.parallelism, || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|trial| run_trial(cfg, &scfg, n, trial))
            .collect()
    })?;

    let d = cfg.theta.len();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let mut iterations = 0usize;
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Converged { theta, iterations: it } => {
                rows.extend(theta);
                iterations += it;
            }
            Outcome::Failed(reason) => failed.push(FailedRun { trial, reason }),
        }
    }
    let converged = rows.len() / d;
    if converged == 0 {
        return Err(Error::AllRunsFailed {
            runs: cfg.runs,
            first: failed.first().map(|f| f.reason.clone()).unwrap_or_default(),
        });
    }
    for f in &failed {
        log::warn!("trial {} excluded: {}", f.trial, f.reason);
    }
    let estimates = DMatrix::from_row_slice(converged, d, &rows);
    let mut report = aggregate(&estimates, &cfg.theta, n);
    report.lambda = cfg.lambda;
    report.metadata = ReportMetadata {
        theta: Some(cfg.theta.clone()),
        period: Some(cfg.period),
        input_hold: Some(cfg.input_hold),
        instrument_hold: Some(cfg.instrument_hold()),
        output_hold: Some(scfg.output_hold),
        input_variance: Some(cfg.input_variance),
        method: Some(STDERR_METHOD.into()),
        samples: Some(n),
        runs: Some(converged),
        condition_number: None,
    };
    Ok(McResult {
        empirical_cov: report,
        per_run_estimates: cfg.keep_estimates.then_some(estimates),
        convergence_rate: converged as f64 / cfg.runs as f64,
        failed_runs: failed,
        samples: n,
        theta_true: cfg.theta.clone(),
        mean_iterations: iterations as f64 / converged as f64,
    })
}

/// Runs `cfg.runs` independent trials at the configured sample size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<McResult> {
    cfg.validate()?;
    match cfg.samples {
        Samples::One(n) => run_at(cfg, n),
        Samples::Sweep(ref v) if v.len() == 1 => run_at(cfg, v[0]),
        Samples::Sweep(_) => Err(Error::Config(
            "run_experiment needs a single sample size; use sweep_sample_size for lists".into(),
        )),
    }
}

/// Runs the experiment at every configured sample size. Trial `r` uses the
/// same streams at every size, so shorter records are prefixes of longer ones.
pub fn sweep_sample_size(cfg: &ExperimentConfig) -> Result<Vec<McResult>> {
    cfg.validate()?;
    cfg.samples.values().into_iter().map(|n| run_at(cfg, n)).collect()
}
