use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::polynomial::Polynomial;
use super::transfer::TransferFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timing {
    Continuous,
    Discrete { period: f64 },
}

/// State-space realization `x' = A x + B u`, `y = C x + D u` (continuous) or
/// `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k] + D u[k]` (discrete).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub timing: Timing,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        timing: Timing,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A is {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B has {} rows, A has {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C has {} columns, A has {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        if let Timing::Discrete { period } = timing {
            if !(period > 0.0 && period.is_finite()) {
                return Err(Error::InvalidSamplePeriod(period));
            }
        }
        Ok(Self { a, b, c, d, timing })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.timing, Timing::Discrete { .. })
    }

    /// Parallel connection of systems sharing their input: block-diagonal
    /// dynamics, outputs stacked in order.
    pub fn stack(systems: &[StateSpace]) -> Result<Self> {
        let first = systems
            .first()
            .ok_or_else(|| Error::Dimension("cannot stack zero systems".into()))?;
        let inputs = first.inputs();
        let timing = first.timing;
        if systems.iter().any(|s| s.inputs() != inputs || s.timing != timing) {
            return Err(Error::Dimension("stacked systems must share inputs and timing".into()));
        }
        let n: usize = systems.iter().map(|s| s.states()).sum();
        let p: usize = systems.iter().map(|s| s.outputs()).sum();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, inputs);
        let mut c = DMatrix::zeros(p, n);
        let mut d = DMatrix::zeros(p, inputs);
        let (mut xi, mut yi) = (0, 0);
        for s in systems {
            let (ns, ps) = (s.states(), s.outputs());
            a.view_mut((xi, xi), (ns, ns)).copy_from(&s.a);
            b.view_mut((xi, 0), (ns, inputs)).copy_from(&s.b);
            c.view_mut((yi, xi), (ps, ns)).copy_from(&s.c);
            d.view_mut((yi, 0), (ps, inputs)).copy_from(&s.d);
            xi += ns;
            yi += ps;
        }
        Self::new(a, b, c, d, timing)
    }

    /// Series connection: the outputs of `self` drive the inputs of `next`.
    pub fn series(&self, next: &StateSpace) -> Result<Self> {
        if self.outputs() != next.inputs() || self.timing != next.timing {
            return Err(Error::Dimension("series connection: output/input or timing mismatch".into()));
        }
        let (n1, n2) = (self.states(), next.states());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        let mut b = DMatrix::zeros(n1 + n2, self.inputs());
        b.view_mut((0, 0), (n1, self.inputs())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.inputs())).copy_from(&(&next.b * &self.d));
        let mut c = DMatrix::zeros(next.outputs(), n1 + n2);
        c.view_mut((0, 0), (next.outputs(), n1)).copy_from(&(&next.d * &self.c));
        c.view_mut((0, n1), (next.outputs(), n2)).copy_from(&next.c);
        let d = &next.d * &self.d;
        Self::new(a, b, c, d, self.timing)
    }

    /// Frequency response `C (zI - A)^{-1} B + D` at a complex point, for a
    /// single-input system; returns one value per output.
    pub fn response_at(&self, z: Complex64) -> Result<Vec<Complex64>> {
        if self.inputs() != 1 {
            return Err(Error::Dimension("response_at needs a single input".into()));
        }
        let n = self.states();
        let p = self.outputs();
        let mut out: Vec<Complex64> = (0..p).map(|i| Complex64::new(self.d[(i, 0)], 0.0)).collect();
        if n == 0 {
            return Ok(out);
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
            diag - Complex64::new(self.a[(i, j)], 0.0)
        });
        let rhs = DVector::<Complex64>::from_fn(n, |i, _| Complex64::new(self.b[(i, 0)], 0.0));
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Dimension("evaluation point is a pole".into()))?;
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..n {
                *o += self.c[(i, j)] * x[j];
            }
        }
        Ok(out)
    }

    /// Spectral radius of `A` (0 for a static system).
    pub fn spectral_radius(&self) -> f64 {
        if self.states() == 0 {
            return 0.0;
        }
        self.a
            .complex_eigenvalues()
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Controllable canonical realization of a proper transfer function.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpace> {
    realize_bank(tf.den(), std::slice::from_ref(tf.num()))
}

/// Single-input, multi-output controllable canonical realization of
/// `num_i / den` for every numerator. All outputs share one state vector.
pub fn realize_bank(den: &Polynomial, nums: &[Polynomial]) -> Result<StateSpace> {
    if den.is_zero() {
        return Err(Error::ZeroPolynomial("realization denominator"));
    }
    let n = den.degree();
    let lead = den.leading();
    let monic: Vec<f64> = den.coeffs().iter().map(|c| c / lead).collect();
    let p = nums.len();

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    if n > 0 {
        for j in 0..n {
            // last row: -[a_n .. a_1] of the monic polynomial, ascending powers
            a[(n - 1, j)] = -monic[n - j];
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    if n > 0 {
        b[(n - 1, 0)] = 1.0;
    }
    let mut c = DMatrix::zeros(p, n);
    let mut d = DMatrix::zeros(p, 1);
    for (row, num) in nums.iter().enumerate() {
        if !num.is_zero() && num.degree() > n {
            return Err(Error::Improper {
                num_degree: num.degree(),
                den_degree: n,
            });
        }
        let scaled: Vec<f64> = num.padded(n + 1).iter().map(|c| c / lead).collect();
        let direct = scaled[0];
        d[(row, 0)] = direct;
        // remainder after removing the direct feedthrough, ascending powers into C
        for j in 0..n {
            let k = n - j; // coefficient index of p^j
            c[(row, j)] = scaled[k] - direct * monic[k];
        }
    }
    StateSpace::new(a, b, c, d, Timing::Continuous)
}
