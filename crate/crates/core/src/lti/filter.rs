//! Hold-aware filtering of sampled signals through continuous-time transfer
//! functions.

use nalgebra::DMatrix;

use super::discretize::{discretize, Hold};
use super::polynomial::Polynomial;
use super::state_space::{realize_bank, StateSpace};
use super::transfer::TransferFunction;
use crate::error::{Error, Result};

/// Relative coefficient tolerance for treating two denominators as identical.
const SHARED_DENOMINATOR_TOL: f64 = 1e-14;

/// Runs a single-input discrete system from state `x0`.
///
/// Returns an `N x outputs` matrix; row `k` is the output at sample `k`.
pub fn simulate(ss: &StateSpace, u: &[f64], x0: &[f64]) -> Result<DMatrix<f64>> {
    if !ss.is_discrete() {
        return Err(Error::Dimension("simulate expects a discrete-time system".into()));
    }
    if ss.inputs() != 1 {
        return Err(Error::Dimension(format!(
            "simulate supports a single input, system has {}",
            ss.inputs()
        )));
    }
    if x0.len() != ss.states() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, system has {} states",
            x0.len(),
            ss.states()
        )));
    }
    Ok(Kernel::from_ss(ss).run(u, x0))
}

/// Flat copy of a single-input discrete realization for the inner loop.
#[derive(Debug, Clone)]
struct Kernel {
    n: usize,
    p: usize,
    a: Vec<f64>, // row-major n x n
    b: Vec<f64>,
    c: Vec<f64>, // row-major p x n
    d: Vec<f64>,
}

impl Kernel {
    fn from_ss(ss: &StateSpace) -> Self {
        let (n, p) = (ss.states(), ss.outputs());
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(ss.a[(i, j)]);
            }
        }
        let mut c = Vec::with_capacity(p * n);
        for i in 0..p {
            for j in 0..n {
                c.push(ss.c[(i, j)]);
            }
        }
        Self {
            n,
            p,
            a,
            b: (0..n).map(|i| ss.b[(i, 0)]).collect(),
            c,
            d: (0..p).map(|i| ss.d[(i, 0)]).collect(),
        }
    }

    fn run(&self, u: &[f64], x0: &[f64]) -> DMatrix<f64> {
        let (n, p) = (self.n, self.p);
        let len = u.len();
        let mut out = DMatrix::<f64>::zeros(len, p);
        let mut x = x0.to_vec();
        let mut next = vec![0.0; n];
        let data = out.as_mut_slice();
        for (k, &uk) in u.iter().enumerate() {
            for i in 0..p {
                let row = &self.c[i * n..(i + 1) * n];
                let mut acc = self.d[i] * uk;
                for j in 0..n {
                    acc += row[j] * x[j];
                }
                // column-major: column i, row k
                data[i * len + k] = acc;
            }
            for i in 0..n {
                let row = &self.a[i * n..(i + 1) * n];
                let mut acc = self.b[i] * uk;
                for j in 0..n {
                    acc += row[j] * x[j];
                }
                next[i] = acc;
            }
            std::mem::swap(&mut x, &mut next);
        }
        out
    }
}

/// A set of transfer functions `num_i / den` sharing one denominator,
/// discretized once for a given hold and sampling period.
///
/// Filtering starts from a zero physical state. Under FOH the discrete state
/// is offset by the first input sample so that the continuous state is zero
/// at `t_0`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    kernel: Kernel,
    offset: Vec<f64>,
    hold: Hold,
    period: f64,
    discrete: StateSpace,
}

impl FilterBank {
    pub fn new(den: &Polynomial, nums: &[Polynomial], period: f64, hold: Hold) -> Result<Self> {
        if den.constant_term() == 0.0 || den.is_zero() {
            return Err(Error::ZeroDcDenominator);
        }
        if nums.is_empty() {
            return Err(Error::Dimension("filter bank needs at least one numerator".into()));
        }
        let ct = realize_bank(den, nums)?;
        let disc = discretize(&ct, period, hold)?;
        Ok(Self {
            kernel: Kernel::from_ss(&disc.ss),
            offset: disc.offset,
            hold,
            period,
            discrete: disc.ss,
        })
    }

    /// Builds a bank from transfer functions that must share a denominator.
    pub fn from_tfs(tfs: &[TransferFunction], period: f64, hold: Hold) -> Result<Self> {
        let first = tfs
            .first()
            .ok_or_else(|| Error::Dimension("filter bank needs at least one filter".into()))?;
        let den = first.den();
        if tfs
            .iter()
            .any(|t| t.den().max_relative_difference(den) > SHARED_DENOMINATOR_TOL)
        {
            return Err(Error::DenominatorMismatch);
        }
        let nums: Vec<Polynomial> = tfs.iter().map(|t| t.num().clone()).collect();
        Self::new(den, &nums, period, hold)
    }

    pub fn len(&self) -> usize {
        self.kernel.p
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.p == 0
    }

    pub fn hold(&self) -> Hold {
        self.hold
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The causal discrete realization used for filtering.
    pub fn discrete(&self) -> &StateSpace {
        &self.discrete
    }

    /// Filters `u`; row `k` of the result holds every bank output at `t_k`.
    pub fn apply(&self, u: &[f64]) -> DMatrix<f64> {
        let u0 = u.first().copied().unwrap_or(0.0);
        let x0: Vec<f64> = self.offset.iter().map(|g| -g * u0).collect();
        self.kernel.run(u, &x0)
    }
}

/// Filters a sampled signal through `tf` assuming `hold` between samples,
/// starting from rest.
///
/// The denominator need not be Hurwitz; unstable filters simply grow.
pub fn filter_ct(tf: &TransferFunction, u: &[f64], period: f64, hold: Hold) -> Result<Vec<f64>> {
    let bank = FilterBank::new(tf.den(), std::slice::from_ref(tf.num()), period, hold)?;
    Ok(bank.apply(u).column(0).iter().copied().collect())
}

/// Filters one signal through several transfer functions sharing a
/// denominator, using a single shared-state realization.
pub fn filter_bank(
    tfs: &[TransferFunction],
    u: &[f64],
    period: f64,
    hold: Hold,
) -> Result<DMatrix<f64>> {
    Ok(FilterBank::from_tfs(tfs, period, hold)?.apply(u))
}
