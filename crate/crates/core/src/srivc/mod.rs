//! Simplified refined instrumental variable estimation of continuous-time
//! output-error models from sampled data.
//!
//! Each iteration prefilters the data with the current denominator estimate
//! `1/A_j(p)` and solves the instrumental-variable normal equations
//!
//! ```text
//! theta_{j+1} = [ sum inst_k reg_k^T ]^{-1} [ sum inst_k y_f,k ]
//! ```
//!
//! where the instrument is built from the current model's noise-free output,
//! realized as single composite filters of `u` (`p^i B_j / A_j^2`) so that
//! the hold assumed on `u` is applied exactly once.

mod data;
mod theoretical;

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use data::DataRecord;
pub use theoretical::{theoretical_estimate, theoretical_output, theoretical_regressor};

use crate::error::{Error, Result};
use crate::lti::{FilterBank, Hold, Polynomial, ThetaVector, TransferFunction, ROOT_TOLERANCE};

/// Default guard on the normal-matrix condition number, `1 / (100 eps)`.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1.0 / (100.0 * f64::EPSILON);

#[derive(Debug, Clone, PartialEq)]
pub struct SrivcConfig {
    pub max_iter: usize,
    /// Relative-change stopping threshold; `f64::INFINITY` stops after one step.
    pub epsilon: f64,
    /// Hold on `u` in the regressor and in the model output.
    pub input_hold: Hold,
    /// Hold assumed on `y` when filtering it.
    pub output_hold: Hold,
    /// Hold on `u` inside the instrument.
    pub instrument_input_hold: Hold,
    pub theta_init: ThetaVector,
    pub period: f64,
    pub condition_limit: f64,
    pub stability_tol: f64,
}

impl SrivcConfig {
    /// ZOH everywhere, 200 iterations, `epsilon = 1e-12`.
    pub fn new(theta_init: ThetaVector, period: f64) -> Self {
        Self {
            max_iter: 200,
            epsilon: 1e-12,
            input_hold: Hold::Zoh,
            output_hold: Hold::Zoh,
            instrument_input_hold: Hold::Zoh,
            theta_init,
            period,
            condition_limit: DEFAULT_CONDITION_LIMIT,
            stability_tol: ROOT_TOLERANCE,
        }
    }

    pub fn with_input_hold(mut self, hold: Hold) -> Self {
        self.input_hold = hold;
        self.instrument_input_hold = hold;
        self
    }

    pub fn with_output_hold(mut self, hold: Hold) -> Self {
        self.output_hold = hold;
        self
    }

    pub fn with_instrument_hold(mut self, hold: Hold) -> Self {
        self.instrument_input_hold = hold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidSamplePeriod(self.period));
        }
        self.theta_init.validate()?;
        hurwitz_denominator(&self.theta_init, self.stability_tol)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrivcEstimate {
    pub theta: ThetaVector,
    pub converged: bool,
    pub iterations: usize,
    /// `||theta_{j+1} - theta_j|| / ||theta_{j+1}||` per iteration.
    pub relative_errors: Vec<f64>,
    /// Condition number of the normal matrix per iteration.
    pub condition_numbers: Vec<f64>,
    /// Accepted iterates, starting with the initial value.
    pub history: Vec<ThetaVector>,
    /// Number of iterates whose unstable roots were reflected.
    pub stabilized: usize,
}

pub(crate) fn hurwitz_denominator(theta: &ThetaVector, tol: f64) -> Result<Polynomial> {
    let den = theta.denominator();
    if !den.is_hurwitz(tol)? {
        return Err(Error::NotHurwitz {
            coeffs: den.coeffs().to_vec(),
        });
    }
    Ok(den)
}

/// `y_f = y / A_j(p)` under the given hold on `y`.
pub fn prefilter_output(y: &[f64], a_j: &Polynomial, period: f64, output_hold: Hold) -> Result<Vec<f64>> {
    if !a_j.is_hurwitz(ROOT_TOLERANCE)? {
        return Err(Error::NotHurwitz {
            coeffs: a_j.coeffs().to_vec(),
        });
    }
    let bank = FilterBank::new(a_j, &[Polynomial::constant(1.0)], period, output_hold)?;
    Ok(bank.apply(y).column(0).iter().copied().collect())
}

/// `[p^n, ..., p, 1]` or any other descending run of monomials.
fn monomials(top: usize) -> Vec<Polynomial> {
    (0..=top).rev().map(Polynomial::monomial).collect()
}

/// Filtered regressor (N x (n+m+1)) and the prefiltered output.
fn regressor_and_output(
    data: &DataRecord,
    theta_j: &ThetaVector,
    cfg: &SrivcConfig,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let den = hurwitz_denominator(theta_j, cfg.stability_tol)?;
    let (n, m) = (theta_j.n(), theta_j.m());
    let len = data.len();
    let ybank = FilterBank::new(&den, &monomials(n), data.period, cfg.output_hold)?;
    let ubank = FilterBank::new(&den, &monomials(m), data.period, cfg.input_hold)?;
    let yout = ybank.apply(&data.y);
    let uout = ubank.apply(&data.u);
    let mut reg = DMatrix::<f64>::zeros(len, n + m + 1);
    for i in 0..n {
        reg.column_mut(i).copy_from(&(-yout.column(i)));
    }
    for i in 0..=m {
        reg.column_mut(n + i).copy_from(&uout.column(i));
    }
    let yf = yout.column(n).iter().copied().collect();
    Ok((reg, yf))
}

/// `phi_f(t_k) = [-p^n y, ..., -p y, p^m u, ..., u]^T / A_j(p)`, one row per
/// sample.
pub fn build_regressor(data: &DataRecord, theta_j: &ThetaVector, cfg: &SrivcConfig) -> Result<DMatrix<f64>> {
    Ok(regressor_and_output(data, theta_j, cfg)?.0)
}

/// Instrument rows `[-p^n B_j/A_j^2 u, ..., -p B_j/A_j^2 u, p^m/A_j u, ..., u/A_j]`,
/// each realized as one composite filter under the instrument hold.
pub fn build_instrument(data: &DataRecord, theta_j: &ThetaVector, cfg: &SrivcConfig) -> Result<DMatrix<f64>> {
    instrument_from_input(&data.u, data.period, theta_j, cfg)
}

pub(crate) fn instrument_from_input(
    u: &[f64],
    period: f64,
    theta_j: &ThetaVector,
    cfg: &SrivcConfig,
) -> Result<DMatrix<f64>> {
    let den = hurwitz_denominator(theta_j, cfg.stability_tol)?;
    let (n, m) = (theta_j.n(), theta_j.m());
    let num = theta_j.numerator();
    let mut inst = DMatrix::<f64>::zeros(u.len(), n + m + 1);
    if n > 0 {
        let den2 = den.mul(&den);
        let nums: Vec<Polynomial> = (1..=n).rev().map(|i| num.shift(i).scale(-1.0)).collect();
        let bank = FilterBank::new(&den2, &nums, period, cfg.instrument_input_hold)?;
        inst.columns_mut(0, n).copy_from(&bank.apply(u));
    }
    let bank = FilterBank::new(&den, &monomials(m), period, cfg.instrument_input_hold)?;
    inst.columns_mut(n, m + 1).copy_from(&bank.apply(u));
    Ok(inst)
}

/// Solves `(inst^T reg) theta = inst^T rhs`, returning the solution and the
/// condition number of the normal matrix. Symmetry is not assumed.
pub(crate) fn solve_normal_equations(
    inst: &DMatrix<f64>,
    reg: &DMatrix<f64>,
    rhs: &[f64],
    condition_limit: f64,
) -> Result<(Vec<f64>, f64)> {
    let scale = 1.0 / inst.nrows() as f64;
    let normal = inst.tr_mul(reg) * scale;
    let b = inst.tr_mul(&DVector::from_column_slice(rhs)) * scale;
    let condition = condition_number(&normal);
    if !(condition < condition_limit) {
        return Err(Error::SingularNormalMatrix { condition });
    }
    let x = normal
        .full_piv_lu()
        .solve(&b)
        .ok_or(Error::SingularNormalMatrix { condition })?;
    Ok((x.iter().copied().collect(), condition))
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn practical_step(data: &DataRecord, theta_j: &ThetaVector, cfg: &SrivcConfig) -> Result<(Vec<f64>, f64)> {
    let (reg, yf) = regressor_and_output(data, theta_j, cfg)?;
    let inst = build_instrument(data, theta_j, cfg)?;
    solve_normal_equations(&inst, &reg, &yf, cfg.condition_limit)
}

/// One SRIVC iteration. Fails with [`Error::NonHurwitzIterate`] when the new
/// denominator is not Hurwitz.
pub fn srivc_step(data: &DataRecord, theta_j: &ThetaVector, cfg: &SrivcConfig) -> Result<ThetaVector> {
    let (x, _) = practical_step(data, theta_j, cfg)?;
    let next = ThetaVector::from_stacked(&x, theta_j.n(), theta_j.m())?;
    if !next.denominator().is_hurwitz(cfg.stability_tol)? {
        return Err(Error::NonHurwitzIterate { theta: x });
    }
    Ok(next)
}

/// Reflects roots with nonnegative real part into the open left half-plane
/// and rebuilds the denominator with unit constant term.
pub fn reflect_unstable(theta: &ThetaVector, tol: f64) -> Result<ThetaVector> {
    let den = theta.denominator();
    if den.degree() < theta.n() {
        return Err(Error::NonHurwitzIterate { theta: theta.stacked() });
    }
    let roots: Vec<Complex64> = den
        .roots()?
        .into_iter()
        .map(|r| {
            if r.re >= -tol {
                Complex64::new(-r.re.abs().max(2.0 * tol), r.im)
            } else {
                r
            }
        })
        .collect();
    let rebuilt = Polynomial::from_roots_unit_dc(&roots)?;
    let c = rebuilt.coeffs();
    if c.len() != theta.n() + 1 {
        return Err(Error::NonHurwitzIterate { theta: theta.stacked() });
    }
    let out = ThetaVector::new(c[..theta.n()].to_vec(), theta.b.clone())?;
    if !out.denominator().is_hurwitz(tol)? {
        return Err(Error::NonHurwitzIterate { theta: theta.stacked() });
    }
    Ok(out)
}

/// Runs the fixed-point loop shared by the practical and theoretical
/// estimators. `step` maps the current iterate to the raw new parameters and
/// the normal-matrix condition number.
pub(crate) fn iterate<F>(cfg: &SrivcConfig, mut step: F) -> Result<SrivcEstimate>
where
    F: FnMut(&ThetaVector) -> Result<(Vec<f64>, f64)>,
{
    cfg.validate()?;
    let (n, m) = (cfg.theta_init.n(), cfg.theta_init.m());
    let mut theta = cfg.theta_init.clone();
    let mut est = SrivcEstimate {
        theta: theta.clone(),
        converged: false,
        iterations: 0,
        relative_errors: Vec::new(),
        condition_numbers: Vec::new(),
        history: vec![theta.clone()],
        stabilized: 0,
    };
    for j in 0..cfg.max_iter {
        let (x, condition) = step(&theta)?;
        let mut next = ThetaVector::from_stacked(&x, n, m)?;
        if !next.denominator().is_hurwitz(cfg.stability_tol)? {
            warn!("iteration {}: unstable denominator {:?}, reflecting roots", j + 1, next.a);
            next = reflect_unstable(&next, cfg.stability_tol)?;
            est.stabilized += 1;
        }
        let diff: f64 = next
            .stacked()
            .iter()
            .zip(theta.stacked())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm = next.norm();
        let rel = if diff == 0.0 { 0.0 } else { diff / norm };
        debug!("iteration {}: relative change {rel:.3e}, condition {condition:.3e}", j + 1);
        est.relative_errors.push(rel);
        est.condition_numbers.push(condition);
        est.history.push(next.clone());
        est.iterations = j + 1;
        theta = next;
        // stop at the first iteration that satisfies the criterion
        if rel < cfg.epsilon {
            est.converged = true;
            break;
        }
    }
    est.theta = theta;
    Ok(est)
}

/// Iterates [`srivc_step`] until the relative change drops below `epsilon`
/// or `max_iter` is reached. Running out of iterations is reported through
/// `converged = false`, not as an error.
pub fn srivc_estimate(data: &DataRecord, cfg: &SrivcConfig) -> Result<SrivcEstimate> {
    if data.len() < cfg.theta_init.len() {
        return Err(Error::InsufficientData(format!(
            "{} samples for {} parameters",
            data.len(),
            cfg.theta_init.len()
        )));
    }
    iterate(cfg, |theta| practical_step(data, theta, cfg))
}

/// `r = (1/N) sum inst_k (y_k - B/A u_k)` at `theta_bar`.
///
/// Zero at every converging point of the iteration; `y` enters unfiltered, so
/// the residual does not depend on the hold assumed for `y`.
pub fn verify_converging_point(data: &DataRecord, theta_bar: &ThetaVector, cfg: &SrivcConfig) -> Result<Vec<f64>> {
    let den = hurwitz_denominator(theta_bar, cfg.stability_tol)?;
    let model = TransferFunction::new(theta_bar.numerator(), den)?;
    let x = FilterBank::new(model.den(), std::slice::from_ref(model.num()), data.period, cfg.input_hold)?
        .apply(&data.u);
    let inst = build_instrument(data, theta_bar, cfg)?;
    let resid = DVector::from_iterator(data.len(), data.y.iter().zip(x.column(0).iter()).map(|(y, x)| y - x));
    let r = inst.tr_mul(&resid) / data.len() as f64;
    Ok(r.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::filter_ct;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn first_order() -> ThetaVector {
        ThetaVector::new(vec![0.1], vec![10.0]).unwrap()
    }

    fn second_order() -> ThetaVector {
        ThetaVector::new(vec![0.04, 0.2], vec![1.0]).unwrap()
    }

    fn noise_free(theta: &ThetaVector, n: usize, period: f64, hold: Hold, seed: u64) -> DataRecord {
        let u = gaussian(n, seed);
        let y = filter_ct(&theta.to_tf().unwrap(), &u, period, hold).unwrap();
        DataRecord::new(u, y, period).unwrap()
    }

    fn noisy(theta: &ThetaVector, n: usize, period: f64, seed: u64) -> DataRecord {
        let mut d = noise_free(theta, n, period, Hold::Zoh, seed);
        for (y, e) in d.y.iter_mut().zip(gaussian(n, seed + 1000)) {
            *y += e;
        }
        d
    }

    fn rel_err(a: &ThetaVector, b: &ThetaVector) -> f64 {
        let d: f64 = a.stacked().iter().zip(b.stacked()).map(|(x, y)| (x - y).powi(2)).sum();
        d.sqrt() / b.norm()
    }

    #[test]
    fn prefilter_examples() {
        let y = gaussian(100, 1);
        assert_eq!(prefilter_output(&y, &Polynomial::constant(1.0), 0.01, Hold::Zoh).unwrap(), y);
        let step = vec![1.0; 100];
        let yf = prefilter_output(&step, &Polynomial::new(vec![0.1, 1.0]), 0.01, Hold::Zoh).unwrap();
        for (k, v) in yf.iter().enumerate() {
            assert!((v - (1.0 - (-0.1 * k as f64).exp())).abs() < 1e-12);
        }
        let unstable = Polynomial::new(vec![-0.1, 1.0]);
        assert!(matches!(
            prefilter_output(&y, &unstable, 0.01, Hold::Zoh),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn prefilter_is_linear() {
        let a = Polynomial::new(vec![0.04, 0.2, 1.0]);
        let (y1, y2) = (gaussian(300, 2), gaussian(300, 3));
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| 2.0 * a - b).collect();
        let f1 = prefilter_output(&y1, &a, 0.1, Hold::Foh).unwrap();
        let f2 = prefilter_output(&y2, &a, 0.1, Hold::Foh).unwrap();
        let fs = prefilter_output(&sum, &a, 0.1, Hold::Foh).unwrap();
        for k in 0..300 {
            assert!((fs[k] - 2.0 * f1[k] + f2[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn regressor_structure() {
        let theta = first_order();
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let zero_y = DataRecord::new(vec![1.0; 200], vec![0.0; 200], 0.01).unwrap();
        let reg = build_regressor(&zero_y, &theta, &cfg).unwrap();
        assert!(reg.column(0).iter().all(|&v| v == 0.0));
        for k in 0..200 {
            let expected = 1.0 - (-0.1 * k as f64).exp();
            assert!((reg[(k, 1)] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn regressor_reconstructs_output() {
        // a_1 * (-reg_0) + y_f = (a_1 p + 1)/A y = y
        let theta = first_order();
        let data = noisy(&theta, 5000, 0.01, 7);
        for hold in [Hold::Zoh, Hold::Foh] {
            let cfg = SrivcConfig::new(theta.clone(), 0.01).with_output_hold(hold);
            let (reg, yf) = regressor_and_output(&data, &theta, &cfg).unwrap();
            for k in 0..data.len() {
                assert!((0.1 * (-reg[(k, 0)]) + yf[k] - data.y[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn instrument_degenerate_cases() {
        let theta = first_order();
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let zero_u = DataRecord::new(vec![0.0; 100], gaussian(100, 1), 0.01).unwrap();
        let inst = build_instrument(&zero_u, &theta, &cfg).unwrap();
        assert!(inst.iter().all(|&v| v == 0.0));
        let zero_b = ThetaVector::new(vec![0.1], vec![0.0]).unwrap();
        let data = noisy(&theta, 100, 0.01, 3);
        let inst = build_instrument(&data, &zero_b, &cfg).unwrap();
        assert!(inst.column(0).iter().all(|&v| v == 0.0));
        assert!(inst.column(1).iter().any(|&v| v != 0.0));
    }

    #[test]
    fn composite_instrument_differs_from_two_pass_cascade() {
        let theta = first_order();
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let data = noisy(&theta, 4000, 0.01, 11);
        let inst = build_instrument(&data, &theta, &cfg).unwrap();
        // two separately discretized passes: x = B/A u, then -p/A x
        let tf = theta.to_tf().unwrap();
        let x = filter_ct(&tf, &data.u, 0.01, Hold::Zoh).unwrap();
        let deriv = TransferFunction::new(Polynomial::new(vec![-1.0, 0.0]), tf.den().clone()).unwrap();
        let cascade = filter_ct(&deriv, &x, 0.01, Hold::Zoh).unwrap();
        // continuous-time series connection discretized once with shared state
        let series = crate::lti::tf_to_ss(&tf)
            .unwrap()
            .series(&crate::lti::tf_to_ss(&deriv).unwrap())
            .unwrap();
        let joint = crate::lti::simulate(
            &crate::lti::c2d(&series, 0.01, Hold::Zoh).unwrap(),
            &data.u,
            &[0.0, 0.0],
        )
        .unwrap();
        let scale = inst.column(0).amax();
        let two_pass = (0..data.len()).map(|k| (inst[(k, 0)] - cascade[k]).abs()).fold(0.0, f64::max);
        let shared = (0..data.len()).map(|k| (inst[(k, 0)] - joint[(k, 0)]).abs()).fold(0.0, f64::max);
        assert!(two_pass > 1e-3 * scale, "two-pass difference {two_pass}");
        assert!(shared < 1e-10 * scale, "shared-state difference {shared}");
    }

    #[test]
    fn noise_free_fixed_point() {
        for (theta, period) in [(first_order(), 0.01), (second_order(), 0.1)] {
            let data = noise_free(&theta, 5000, period, Hold::Zoh, 5);
            let cfg = SrivcConfig::new(theta.clone(), period);
            let next = srivc_step(&data, &theta, &cfg).unwrap();
            assert!(rel_err(&next, &theta) < 1e-10);
            let est = srivc_estimate(&data, &cfg).unwrap();
            assert!(est.converged);
            assert!(est.iterations <= 2, "{} iterations", est.iterations);
            assert!(rel_err(&est.theta, &theta) < 1e-10);
        }
    }

    #[test]
    fn noise_free_recovery_from_perturbed_start() {
        let theta = second_order();
        let data = noise_free(&theta, 10_000, 0.1, Hold::Foh, 5);
        let init = ThetaVector::new(vec![0.05, 0.17], vec![1.2]).unwrap();
        let cfg = SrivcConfig::new(init, 0.1).with_input_hold(Hold::Foh);
        let est = srivc_estimate(&data, &cfg).unwrap();
        assert!(est.converged);
        assert!(rel_err(&est.theta, &theta) < 1e-8);
    }

    #[test]
    fn zero_output_is_singular() {
        // the output columns of the regressor vanish identically
        let theta = first_order();
        let u = gaussian(2000, 9);
        let data = DataRecord::new(u, vec![0.0; 2000], 0.01).unwrap();
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        assert!(matches!(
            srivc_step(&data, &theta, &cfg),
            Err(Error::SingularNormalMatrix { .. })
        ));
    }

    #[test]
    fn one_noisy_step_stays_close() {
        let theta = first_order();
        let data = noisy(&theta, 20_000, 0.01, 21);
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let next = srivc_step(&data, &theta, &cfg).unwrap();
        assert!(next.stacked().iter().all(|v| v.is_finite()));
        assert!(rel_err(&next, &theta) < 1.0);
        assert!(rel_err(&next, &theta) > 0.0);
    }

    #[test]
    fn infinite_epsilon_stops_after_one_step() {
        let theta = first_order();
        let data = noisy(&theta, 2000, 0.01, 4);
        let mut cfg = SrivcConfig::new(theta, 0.01);
        cfg.epsilon = f64::INFINITY;
        let est = srivc_estimate(&data, &cfg).unwrap();
        assert!(est.converged);
        assert_eq!(est.iterations, 1);
        assert_eq!(est.history.len(), 2);
    }

    #[test]
    fn estimate_invariants() {
        let theta = second_order();
        let data = noisy(&theta, 5000, 0.1, 8);
        let mut cfg = SrivcConfig::new(theta, 0.1);
        cfg.max_iter = 3;
        cfg.epsilon = 1e-300;
        let est = srivc_estimate(&data, &cfg).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 3);
        assert_eq!(est.relative_errors.len(), 3);
        assert!(est.history.iter().all(|t| t.denominator().is_hurwitz(ROOT_TOLERANCE).unwrap()));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SrivcConfig::new(first_order(), 0.01);
        cfg.max_iter = 0;
        assert!(cfg.validate().is_err());
        let cfg = SrivcConfig::new(ThetaVector::new(vec![-0.1], vec![1.0]).unwrap(), 0.01);
        assert!(matches!(cfg.validate(), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn reflection_restores_stability() {
        // roots +2 and -5
        let theta = ThetaVector::new(vec![-0.1, 0.3], vec![1.0]).unwrap();
        let fixed = reflect_unstable(&theta, ROOT_TOLERANCE).unwrap();
        let mut roots: Vec<f64> = fixed.denominator().roots().unwrap().iter().map(|r| r.re).collect();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] + 5.0).abs() < 1e-9 && (roots[1] + 2.0).abs() < 1e-9);
        assert_eq!(fixed.b, theta.b);
    }

    #[test]
    fn residual_vanishes_for_exact_model() {
        let theta = first_order();
        let data = noise_free(&theta, 3000, 0.01, Hold::Zoh, 12);
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let r = verify_converging_point(&data, &theta, &cfg).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn residual_small_at_convergence_and_large_elsewhere() {
        let theta = first_order();
        let data = noisy(&theta, 10_000, 0.01, 13);
        let cfg = SrivcConfig::new(theta.clone(), 0.01);
        let est = srivc_estimate(&data, &cfg).unwrap();
        assert!(est.converged);
        let ynorm = data.y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = 1e-8 * ynorm / (data.len() as f64).sqrt();
        let r = verify_converging_point(&data, &est.theta, &cfg).unwrap();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rn < bound, "{rn} >= {bound}");
        let far = ThetaVector::new(vec![0.3], vec![4.0]).unwrap();
        let r = verify_converging_point(&data, &far, &cfg).unwrap();
        let rn_far = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rn_far > 1e3 * bound);
    }
}
