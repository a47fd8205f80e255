//! Asymptotic covariance of continuous-time output-error estimators.
//!
//! Every analytic quantity here is a stationary second moment of white
//! input filtered through hold-discretized sensitivity filters, obtained from
//! a discrete Lyapunov equation:
//!
//! * [`crlb_asymptotic`]: `lambda E{psi psi^T}^{-1}`, with
//!   `psi = [-p^n B/A^2, ..., -p B/A^2, p^m/A, ..., 1/A] u`;
//! * [`srivc_asymptotic_cov`]: the SRIVC covariance, including the sandwich
//!   form when the instrument assumes a different hold than the data;
//! * [`literature_crlb`]: the bound obtained by filtering an interpolated
//!   version of the sampled noise-free output, which depends on the
//!   interpolation and is generally wrong.

mod moments;
mod report;

use nalgebra::DMatrix;

pub use moments::{discrete_lyapunov, stationary_second_moment, time_average_second_moment, TimeAverage};
pub use report::{CovarianceKind, CovarianceReport, ReportMetadata};

use crate::error::{Error, Result};
use crate::lti::{
    c2d, realize_bank, FilterBank, Hold, Polynomial, StateSpace, ThetaVector, TransferFunction, ROOT_TOLERANCE,
};
use crate::srivc::DEFAULT_CONDITION_LIMIT;

/// The sensitivity filters `psi(t_k, theta*)` under a given input hold.
#[derive(Debug, Clone)]
pub struct SensitivityBank {
    /// `-p^i B*/A*^2` for `i = n..1`, then `p^i/A*` for `i = m..0`.
    pub filters: Vec<TransferFunction>,
    a_part: Option<FilterBank>,
    b_part: FilterBank,
    period: f64,
    input_hold: Hold,
}

impl SensitivityBank {
    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn input_hold(&self) -> Hold {
        self.input_hold
    }

    /// One discrete realization of the whole bank: the `A*^2` block followed
    /// by the `A*` block, both driven by `u`.
    pub fn discrete(&self) -> Result<StateSpace> {
        match &self.a_part {
            Some(a) => StateSpace::stack(&[a.discrete().clone(), self.b_part.discrete().clone()]),
            None => Ok(self.b_part.discrete().clone()),
        }
    }

    /// `psi(t_k)` for every sample of `u`, one row per sample.
    pub fn apply(&self, u: &[f64]) -> DMatrix<f64> {
        let b = self.b_part.apply(u);
        match &self.a_part {
            None => b,
            Some(a) => {
                let a = a.apply(u);
                let mut out = DMatrix::zeros(u.len(), a.ncols() + b.ncols());
                out.columns_mut(0, a.ncols()).copy_from(&a);
                out.columns_mut(a.ncols(), b.ncols()).copy_from(&b);
                out
            }
        }
    }
}

/// Checks stability, a nonzero numerator and coprimality of `theta_sys`.
fn check_system(theta_sys: &ThetaVector) -> Result<(Polynomial, Polynomial)> {
    theta_sys.validate()?;
    let den = theta_sys.denominator();
    let num = theta_sys.numerator();
    if !den.is_hurwitz(ROOT_TOLERANCE)? {
        return Err(Error::NotHurwitz {
            coeffs: den.coeffs().to_vec(),
        });
    }
    if num.is_zero() {
        return Err(Error::Unidentifiable("numerator is identically zero".into()));
    }
    if num.degree() > 0 && den.degree() > 0 && !num.is_coprime_with(&den, ROOT_TOLERANCE)? {
        return Err(Error::Unidentifiable(format!(
            "numerator {num} and denominator {den} share a root"
        )));
    }
    Ok((den, num))
}

pub fn build_sensitivity_bank(theta_sys: &ThetaVector, period: f64, input_hold: Hold) -> Result<SensitivityBank> {
    let (den, num) = check_system(theta_sys)?;
    let (n, m) = (theta_sys.n(), theta_sys.m());
    let den2 = den.mul(&den);
    let a_nums: Vec<Polynomial> = (1..=n).rev().map(|i| num.shift(i).scale(-1.0)).collect();
    let b_nums: Vec<Polynomial> = (0..=m).rev().map(Polynomial::monomial).collect();
    let mut filters = Vec::with_capacity(n + m + 1);
    for p in &a_nums {
        filters.push(TransferFunction::new(p.clone(), den2.clone())?);
    }
    for p in &b_nums {
        filters.push(TransferFunction::new(p.clone(), den.clone())?);
    }
    let a_part = if n > 0 {
        Some(FilterBank::new(&den2, &a_nums, period, input_hold)?)
    } else {
        None
    };
    Ok(SensitivityBank {
        filters,
        a_part,
        b_part: FilterBank::new(&den, &b_nums, period, input_hold)?,
        period,
        input_hold,
    })
}

/// Inverts a symmetric positive-definite matrix, returning the inverse and
/// its 2-norm condition number.
fn spd_inverse(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let eig = m.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < DEFAULT_CONDITION_LIMIT) {
        return Err(Error::SingularInformation { condition });
    }
    let chol = m.clone().cholesky().ok_or(Error::SingularInformation { condition })?;
    let inv = chol.inverse();
    Ok(((&inv + inv.transpose()) * 0.5, condition))
}

fn check_scalars(lambda: f64, input_variance: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("noise variance must be non-negative, got {lambda}")));
    }
    if !(input_variance > 0.0 && input_variance.is_finite()) {
        return Err(Error::Config(format!("input variance must be positive, got {input_variance}")));
    }
    Ok(())
}

fn metadata(theta: &ThetaVector, period: f64, input_variance: f64, condition: f64) -> ReportMetadata {
    ReportMetadata {
        theta: Some(theta.clone()),
        period: Some(period),
        input_variance: Some(input_variance),
        condition_number: Some(condition),
        method: Some("lyapunov".into()),
        ..Default::default()
    }
}

/// Asymptotic CRLB for white input of the given variance interpolated with
/// `input_hold`. There is deliberately no output-hold argument: the bound
/// does not depend on how the noise-free output behaves between samples.
pub fn crlb_asymptotic(
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    input_hold: Hold,
    input_variance: f64,
) -> Result<CovarianceReport> {
    check_scalars(lambda, input_variance)?;
    let bank = build_sensitivity_bank(theta_sys, period, input_hold)?;
    let info = stationary_second_moment(&bank.discrete()?, input_variance)?;
    let (inv, condition) = spd_inverse(&info)?;
    let mut md = metadata(theta_sys, period, input_variance, condition);
    md.input_hold = Some(input_hold);
    Ok(CovarianceReport::new(inv * lambda, CovarianceKind::Crlb, lambda, md))
}

/// CRLB from a long sample average of `psi psi^T` over an arbitrary
/// (e.g. coloured) stationary input record. The first `skip` samples are
/// dropped to remove the filter transient.
pub fn crlb_time_average(
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    input_hold: Hold,
    u: &[f64],
    skip: usize,
) -> Result<(CovarianceReport, TimeAverage)> {
    check_scalars(lambda, 1.0)?;
    let bank = build_sensitivity_bank(theta_sys, period, input_hold)?;
    let avg = time_average_second_moment(&bank.apply(u), skip, 50)?;
    let (inv, condition) = spd_inverse(&avg.mean)?;
    let md = ReportMetadata {
        theta: Some(theta_sys.clone()),
        period: Some(period),
        input_hold: Some(input_hold),
        condition_number: Some(condition),
        method: Some("time-average".into()),
        samples: Some(avg.samples),
        ..Default::default()
    };
    Ok((CovarianceReport::new(inv * lambda, CovarianceKind::Crlb, lambda, md), avg))
}

/// Noise-free regressor `phi(t_k, theta*)` realized as the continuous-time
/// cascade `B*/A*` followed by `-p^i/A*`, discretized as a whole under
/// `hold`, stacked with `p^i/A*`. Transfer-function-wise it equals the
/// sensitivity bank, but the realization is independent of it.
fn regressor_realization(theta_sys: &ThetaVector, period: f64, hold: Hold) -> Result<StateSpace> {
    let (den, num) = check_system(theta_sys)?;
    let (n, m) = (theta_sys.n(), theta_sys.m());
    let b_part = c2d(
        &realize_bank(&den, &(0..=m).rev().map(Polynomial::monomial).collect::<Vec<_>>())?,
        period,
        hold,
    )?;
    if n == 0 {
        return Ok(b_part);
    }
    let plant = realize_bank(&den, &[num])?;
    let derivs = realize_bank(&den, &(1..=n).rev().map(|i| Polynomial::monomial(i).scale(-1.0)).collect::<Vec<_>>())?;
    let a_part = c2d(&plant.series(&derivs)?, period, hold)?;
    StateSpace::stack(&[a_part, b_part])
}

/// SRIVC asymptotic covariance when the data were generated with the input
/// interpolated by `regressor_input_hold` but the instrument assumes
/// `instrument_input_hold`.
///
/// Matching holds give `lambda E{phi phi^T}^{-1}`, which coincides with the
/// CRLB. Otherwise the sandwich
/// `lambda E{inst phi^T}^{-1} E{inst inst^T} E{phi inst^T}^{-1}` is evaluated
/// from one joint realization driven by the same white input.
pub fn srivc_asymptotic_cov(
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    regressor_input_hold: Hold,
    instrument_input_hold: Hold,
    input_variance: f64,
) -> Result<CovarianceReport> {
    check_scalars(lambda, input_variance)?;
    let reg = regressor_realization(theta_sys, period, regressor_input_hold)?;
    let mut md = ReportMetadata {
        input_hold: Some(regressor_input_hold),
        instrument_hold: Some(instrument_input_hold),
        ..metadata(theta_sys, period, input_variance, f64::NAN)
    };
    if regressor_input_hold == instrument_input_hold {
        let (inv, condition) = spd_inverse(&stationary_second_moment(&reg, input_variance)?)?;
        md.condition_number = Some(condition);
        return Ok(CovarianceReport::new(inv * lambda, CovarianceKind::SrivcAnalytic, lambda, md));
    }
    let inst = build_sensitivity_bank(theta_sys, period, instrument_input_hold)?.discrete()?;
    let d = theta_sys.len();
    let joint = stationary_second_moment(&StateSpace::stack(&[inst, reg])?, input_variance)?;
    let e_ii = joint.view((0, 0), (d, d)).into_owned();
    let e_ip = joint.view((0, d), (d, d)).into_owned();
    let lu = e_ip.clone().full_piv_lu();
    let sv = e_ip.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition < DEFAULT_CONDITION_LIMIT) {
        return Err(Error::SingularInformation { condition });
    }
    let left = lu.try_inverse().ok_or(Error::SingularInformation { condition })?;
    let cov = &left * e_ii * left.transpose() * lambda;
    md.condition_number = Some(condition);
    Ok(CovarianceReport::new(
        (&cov + cov.transpose()) * 0.5,
        CovarianceKind::SrivcMismatched,
        lambda,
        md,
    ))
}

/// The bound obtained by first sampling the noise-free output
/// `x = B*/A* u` (under `input_hold`), then filtering those samples with
/// `-p^i/A*` as if `x` were held by `output_hold_assumption`.
///
/// `p^i/A* u` entries are unaffected, so the input-only block matches the
/// CRLB, but the output-derivative block depends on the assumed
/// interpolation of a signal whose true intersample behaviour is smooth.
pub fn literature_crlb(
    theta_sys: &ThetaVector,
    lambda: f64,
    period: f64,
    input_hold: Hold,
    output_hold_assumption: Hold,
    input_variance: f64,
) -> Result<CovarianceReport> {
    check_scalars(lambda, input_variance)?;
    let (den, num) = check_system(theta_sys)?;
    let (n, m) = (theta_sys.n(), theta_sys.m());
    let b_part = FilterBank::new(&den, &(0..=m).rev().map(Polynomial::monomial).collect::<Vec<_>>(), period, input_hold)?
        .discrete()
        .clone();
    let ss = if n == 0 {
        b_part
    } else {
        let sampled = FilterBank::new(&den, &[num], period, input_hold)?.discrete().clone();
        let nums: Vec<Polynomial> = (1..=n).rev().map(|i| Polynomial::monomial(i).scale(-1.0)).collect();
        let derivs = FilterBank::new(&den, &nums, period, output_hold_assumption)?
            .discrete()
            .clone();
        StateSpace::stack(&[sampled.series(&derivs)?, b_part])?
    };
    let (inv, condition) = spd_inverse(&stationary_second_moment(&ss, input_variance)?)?;
    let mut md = metadata(theta_sys, period, input_variance, condition);
    md.input_hold = Some(input_hold);
    md.output_hold = Some(output_hold_assumption);
    Ok(CovarianceReport::new(inv * lambda, CovarianceKind::LiteratureCrlb, lambda, md))
}
