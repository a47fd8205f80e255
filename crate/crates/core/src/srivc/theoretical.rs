//! Simulation-only SRIVC variant that treats the noise-free output as a
//! continuous-time signal. The true system and the noise sequence must be
//! known separately, so this never runs on measured data.

use nalgebra::DMatrix;

use super::{hurwitz_denominator, instrument_from_input, iterate, solve_normal_equations, SrivcConfig, SrivcEstimate};
use crate::error::{Error, Result};
use crate::lti::{FilterBank, Hold, Polynomial, ThetaVector};

/// The noise term is always filtered with a ZOH on `e`.
const NOISE_HOLD: Hold = Hold::Zoh;

fn theoretical_parts(
    u: &[f64],
    e: &[f64],
    theta_sys: &ThetaVector,
    theta_j: &ThetaVector,
    period: f64,
    input_hold: Hold,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if u.len() != e.len() {
        return Err(Error::Dimension(format!("u has {} samples, e has {}", u.len(), e.len())));
    }
    let den_j = hurwitz_denominator(theta_j, crate::lti::ROOT_TOLERANCE)?;
    let den_sys = theta_sys.denominator();
    let b_sys = theta_sys.numerator();
    let (n, m) = (theta_j.n(), theta_j.m());
    let len = u.len();

    // {p^i B* / (A_j A*) u} for i = n..0 under the input hold
    let joint = den_j.mul(&den_sys);
    let nums: Vec<Polynomial> = (0..=n).rev().map(|i| b_sys.shift(i)).collect();
    let noise_free = FilterBank::new(&joint, &nums, period, input_hold)?.apply(u);
    // p^i / A_j e for i = n..0
    let monos: Vec<Polynomial> = (0..=n).rev().map(Polynomial::monomial).collect();
    let noise = FilterBank::new(&den_j, &monos, period, NOISE_HOLD)?.apply(e);
    // p^i / A_j u for i = m..0
    let umonos: Vec<Polynomial> = (0..=m).rev().map(Polynomial::monomial).collect();
    let uf = FilterBank::new(&den_j, &umonos, period, input_hold)?.apply(u);

    let mut reg = DMatrix::<f64>::zeros(len, n + m + 1);
    for i in 0..n {
        reg.column_mut(i).copy_from(&(-(noise_free.column(i) + noise.column(i))));
    }
    reg.columns_mut(n, m + 1).copy_from(&uf);
    let yf = (noise_free.column(n) + noise.column(n)).iter().copied().collect();
    Ok((reg, yf))
}

/// Regressor with the output derivatives taken on the continuous-time
/// noise-free output: entry `i` of the a-part is
/// `-{p^i B*/(A_j A*) u}(t_k) - p^i/A_j e(t_k)`.
pub fn theoretical_regressor(
    u: &[f64],
    e: &[f64],
    theta_sys: &ThetaVector,
    theta_j: &ThetaVector,
    period: f64,
    input_hold: Hold,
) -> Result<DMatrix<f64>> {
    Ok(theoretical_parts(u, e, theta_sys, theta_j, period, input_hold)?.0)
}

/// `{B*/(A_j A*) u}(t_k) + e(t_k)/A_j`.
pub fn theoretical_output(
    u: &[f64],
    e: &[f64],
    theta_sys: &ThetaVector,
    theta_j: &ThetaVector,
    period: f64,
    input_hold: Hold,
) -> Result<Vec<f64>> {
    Ok(theoretical_parts(u, e, theta_sys, theta_j, period, input_hold)?.1)
}

/// Iterates the theoretical estimator from `cfg.theta_init`, using the same
/// instrument as the practical estimator.
pub fn theoretical_estimate(u: &[f64], e: &[f64], theta_sys: &ThetaVector, cfg: &SrivcConfig) -> Result<SrivcEstimate> {
    iterate(cfg, |theta| {
        let (reg, yf) = theoretical_parts(u, e, theta_sys, theta, cfg.period, cfg.input_hold)?;
        let inst = instrument_from_input(u, cfg.period, theta, cfg)?;
        solve_normal_equations(&inst, &reg, &yf, cfg.condition_limit)
    })
}
