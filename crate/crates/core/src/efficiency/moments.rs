//! Stationary second moments of filtered white noise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lti::StateSpace;

/// Above this many states the Kronecker system gets large; switch to doubling.
const KRONECKER_MAX_STATES: usize = 24;
const RESIDUAL_TOL: f64 = 1e-9;

/// Solves `A P A^T + Q = P` for Schur-stable `A`.
pub fn discrete_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let p = if n <= KRONECKER_MAX_STATES {
        // vec(A P A^T) = (A kron A) vec(P) for column-major vec
        let lhs = DMatrix::<f64>::identity(n * n, n * n) - a.kronecker(a);
        let rhs = nalgebra::DVector::from_column_slice(q.as_slice());
        let x = lhs.lu().solve(&rhs).ok_or(Error::LyapunovFailure)?;
        DMatrix::from_column_slice(n, n, x.as_slice())
    } else {
        doubling(a, q)?
    };
    let p = (&p + p.transpose()) * 0.5;
    let residual = (a * &p * a.transpose() + q - &p).amax();
    if !residual.is_finite() || residual > RESIDUAL_TOL * p.amax().max(q.amax()) {
        return Err(Error::LyapunovFailure);
    }
    Ok(p)
}

/// `P = sum_k A^(2^j) ...`: squared Smith iteration.
fn doubling(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut p = q.clone();
    let mut ak = a.clone();
    for _ in 0..64 {
        p += &ak * &p * ak.transpose();
        ak = &ak * &ak;
        if ak.amax() < f64::EPSILON * 1e-3 {
            return Ok(p);
        }
    }
    Err(Error::LyapunovFailure)
}

/// `E{y y^T}` for a discrete system driven by white input with the given
/// variance per input channel, in stationarity.
///
/// The state is uncorrelated with the contemporaneous input, so the result is
/// `C P C^T + sigma^2 D D^T` with `P` the stationary state covariance.
pub fn stationary_second_moment(ss: &StateSpace, input_variance: f64) -> Result<DMatrix<f64>> {
    if !ss.is_discrete() {
        return Err(Error::Dimension("stationary moments need a discrete-time system".into()));
    }
    if !(input_variance >= 0.0 && input_variance.is_finite()) {
        return Err(Error::Config(format!("input variance must be non-negative, got {input_variance}")));
    }
    let rho = ss.spectral_radius();
    if !(rho < 1.0) {
        return Err(Error::NotSchurStable { spectral_radius: rho });
    }
    let q = &ss.b * ss.b.transpose() * input_variance;
    let p = discrete_lyapunov(&ss.a, &q)?;
    let m = &ss.c * p * ss.c.transpose() + &ss.d * ss.d.transpose() * input_variance;
    Ok((&m + m.transpose()) * 0.5)
}

/// Sample average of `x_k x_k^T` over the rows of `x`, with batch-means
/// standard errors.
#[derive(Debug, Clone)]
pub struct TimeAverage {
    pub mean: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub samples: usize,
    pub batches: usize,
}

/// Averages `x_k x_k^T` over rows `skip..`, splitting the rows into `batches`
/// contiguous blocks to estimate the standard error under serial correlation.
pub fn time_average_second_moment(x: &DMatrix<f64>, skip: usize, batches: usize) -> Result<TimeAverage> {
    let rows = x.nrows().saturating_sub(skip);
    if batches < 2 || rows < batches {
        return Err(Error::InsufficientData(format!(
            "{rows} samples cannot be split into {batches} batches"
        )));
    }
    let d = x.ncols();
    let per = rows / batches;
    let used = per * batches;
    let mut batch_means = Vec::with_capacity(batches);
    for b in 0..batches {
        let block = x.rows(skip + b * per, per);
        batch_means.push(block.tr_mul(&block) / per as f64);
    }
    let mean = batch_means.iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m) / batches as f64;
    let mut var = DMatrix::zeros(d, d);
    for m in &batch_means {
        let dev = m - &mean;
        var += dev.component_mul(&dev);
    }
    let stderr = (var / ((batches - 1) * batches) as f64).map(f64::sqrt);
    Ok(TimeAverage {
        mean,
        stderr,
        samples: used,
        batches,
    })
}
