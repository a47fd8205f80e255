//! Real polynomials in the differential operator `p`, stored in descending
//! powers.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance used for root clustering and stability margins.
pub const ROOT_TOLERANCE: f64 = 1e-8;

/// A real polynomial `c[0] p^d + c[1] p^(d-1) + ... + c[d]`.
///
/// Leading zeros are stripped on construction, so the leading coefficient is
/// nonzero unless the polynomial is identically zero (stored as `[0.0]`).
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs: Vec<f64> = coeffs.into();
        let first = coeffs.iter().position(|&c| c != 0.0);
        match first {
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `p^power`.
    pub fn monomial(power: usize) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    /// Constant term, i.e. the value at `p = 0`.
    pub fn constant_term(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    /// Coefficients in descending order, left-padded with zeros to `len`.
    pub(crate) fn padded(&self, len: usize) -> Vec<f64> {
        assert!(len >= self.coeffs.len());
        let mut out = vec![0.0; len - self.coeffs.len()];
        out.extend_from_slice(&self.coeffs);
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    /// Multiplies by `p^power`.
    pub fn shift(&self, power: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.extend(std::iter::repeat_n(0.0, power));
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let a = self.padded(len);
        let b = other.padded(len);
        Self::new(a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>())
    }

    /// Substitutes `p -> p + delta` (Taylor shift by repeated synthetic division).
    pub fn shift_argument(&self, delta: f64) -> Self {
        let mut c = self.coeffs.clone();
        let d = c.len();
        for i in 0..d {
            for j in 1..d - i {
                c[j] += delta * c[j - 1];
            }
        }
        Self::new(c)
    }

    /// Roots as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial("root extraction"));
        }
        let d = self.degree();
        match d {
            0 => Ok(Vec::new()),
            1 => Ok(vec![Complex64::new(-self.coeffs[1] / self.coeffs[0], 0.0)]),
            _ => {
                let lead = self.coeffs[0];
                let mut companion = DMatrix::<f64>::zeros(d, d);
                for j in 0..d {
                    companion[(0, j)] = -self.coeffs[j + 1] / lead;
                }
                for i in 1..d {
                    companion[(i, i - 1)] = 1.0;
                }
                let eig = companion.complex_eigenvalues();
                Ok(eig.iter().map(|z| self.polish(*z)).collect())
            }
        }
    }

    fn polish(&self, mut z: Complex64) -> Complex64 {
        let deriv = self.derivative();
        for _ in 0..3 {
            let f = self.eval_complex(z);
            let df = deriv.eval_complex(z);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            let next = z - step;
            if !next.re.is_finite() || !next.im.is_finite() {
                break;
            }
            if self.eval_complex(next).norm() >= f.norm() {
                break;
            }
            z = next;
        }
        z
    }

    pub fn derivative(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[..d]
                .iter()
                .enumerate()
                .map(|(i, c)| c * (d - i) as f64)
                .collect::<Vec<_>>(),
        )
    }

    /// Builds the real polynomial with the given roots and constant term 1.
    ///
    /// Complex roots must come in conjugate pairs; zero roots are rejected
    /// because the constant term would vanish.
    pub fn from_roots_unit_dc(roots: &[Complex64]) -> Result<Self> {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            if r.norm() == 0.0 {
                return Err(Error::ZeroDcDenominator);
            }
            // multiply by (1 - p / r) = (-1/r) p + 1
            let lead = -1.0 / r;
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, c) in acc.iter().enumerate() {
                next[i] += c * lead;
                next[i + 1] += c;
            }
            acc = next;
        }
        Ok(Self::new(acc.iter().map(|c| c.re).collect::<Vec<_>>()))
    }

    /// True iff every root has real part strictly below `-tol`.
    ///
    /// Uses the Routh array of `a(p - tol)`, so no roots are extracted.
    pub fn is_hurwitz(&self, tol: f64) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial("stability test"));
        }
        let shifted = self.shift_argument(-tol);
        Ok(routh_stable(shifted.coeffs()))
    }

    /// True iff the two polynomials share no root within `tol` (relative to
    /// root magnitude, floored at 1).
    pub fn is_coprime_with(&self, other: &Self, tol: f64) -> Result<bool> {
        if self.is_zero() || other.is_zero() {
            return Err(Error::ZeroPolynomial("coprimality test"));
        }
        let ra = self.roots()?;
        let rb = other.roots()?;
        let shared = ra.iter().any(|r| {
            rb.iter()
                .any(|s| (r - s).norm() <= tol * r.norm().max(s.norm()).max(1.0))
        });
        Ok(!shared)
    }

    /// Largest relative coefficient difference, used to compare denominators.
    pub(crate) fn max_relative_difference(&self, other: &Self) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        let a = self.padded(len);
        let b = other.padded(len);
        let scale = a
            .iter()
            .chain(&b)
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        a.iter()
            .zip(&b)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }
}

/// `are_coprime` with the crate's default root tolerance semantics.
pub fn are_coprime(a: &Polynomial, b: &Polynomial, tol: f64) -> Result<bool> {
    a.is_coprime_with(b, tol)
}

pub fn is_hurwitz(a: &Polynomial, tol: f64) -> Result<bool> {
    a.is_hurwitz(tol)
}

fn routh_stable(coeffs: &[f64]) -> bool {
    let d = coeffs.len() - 1;
    if d == 0 {
        return true;
    }
    let sign = coeffs[0].signum();
    let c: Vec<f64> = coeffs.iter().map(|x| x * sign).collect();
    if c.iter().any(|&x| x <= 0.0) {
        return false;
    }
    let width = d / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|j| *c.get(2 * j).unwrap_or(&0.0)).collect();
    let mut cur: Vec<f64> = (0..width)
        .map(|j| *c.get(2 * j + 1).unwrap_or(&0.0))
        .collect();
    for _ in 1..d {
        if cur[0] <= 0.0 {
            return false;
        }
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0];
        }
        prev = cur;
        cur = next;
    }
    cur[0] > 0.0
}

impl From<Vec<f64>> for Polynomial {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({:?})", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 && d > 0 {
                continue;
            }
            let power = d - i;
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let mag = c.abs();
            match power {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}p")?,
                _ => write!(f, "{mag}p^{power}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn strips_leading_zeros() {
        let p = Polynomial::new(vec![0.0, 0.0, 2.0, 1.0]);
        assert_eq!(p.coeffs(), &[2.0, 1.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn arithmetic() {
        let a = Polynomial::new(vec![0.1, 1.0]);
        assert_eq!(a.mul(&a).coeffs(), &[0.1 * 0.1, 0.2, 1.0]);
        assert_eq!(a.shift(2).coeffs(), &[0.1, 1.0, 0.0, 0.0]);
        assert_eq!(a.add(&Polynomial::monomial(2)).coeffs(), &[1.0, 0.1, 1.0]);
        assert_eq!(a.derivative().coeffs(), &[0.1]);
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let a = Polynomial::new(vec![2.0, -3.0, 0.5, 7.0]);
        let s = a.shift_argument(0.75);
        for x in [-2.0, -0.3, 0.0, 1.1, 4.0] {
            assert_relative_eq!(s.eval(x), a.eval(x + 0.75), epsilon = 1e-12);
        }
    }

    #[test]
    fn hurwitz_examples() {
        assert!(Polynomial::new(vec![0.1, 1.0]).is_hurwitz(ROOT_TOLERANCE).unwrap());
        assert!(!Polynomial::new(vec![1.0, 0.0, -1.0]).is_hurwitz(ROOT_TOLERANCE).unwrap());
        assert!(Polynomial::new(vec![0.04, 0.2, 1.0]).is_hurwitz(ROOT_TOLERANCE).unwrap());
        // marginal: roots on the imaginary axis
        assert!(!Polynomial::new(vec![1.0, 0.0, 1.0]).is_hurwitz(ROOT_TOLERANCE).unwrap());
        assert!(Polynomial::constant(3.0).is_hurwitz(ROOT_TOLERANCE).unwrap());
        assert!(Polynomial::zero().is_hurwitz(ROOT_TOLERANCE).is_err());
    }

    #[test]
    fn hurwitz_tolerance_is_a_margin() {
        // root at -1e-3
        let a = Polynomial::new(vec![1.0, 1e-3]);
        assert!(a.is_hurwitz(1e-4).unwrap());
        assert!(!a.is_hurwitz(1e-2).unwrap());
    }

    #[test]
    fn second_order_roots() {
        let roots = Polynomial::new(vec![0.04, 0.2, 1.0]).roots().unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert_relative_eq!(r.re, -2.5, epsilon = 1e-12);
            assert_relative_eq!(r.im.abs(), 4.330127018922193, epsilon = 1e-12);
        }
    }

    #[test]
    fn coprimality_examples() {
        let p1 = Polynomial::new(vec![1.0, 1.0]);
        let p2 = Polynomial::new(vec![1.0, 2.0]);
        assert!(are_coprime(&p1, &p2, ROOT_TOLERANCE).unwrap());
        let q = Polynomial::new(vec![1.0, 3.0, 2.0]);
        assert!(!are_coprime(&q, &p1, ROOT_TOLERANCE).unwrap());
        let lag = Polynomial::new(vec![0.1, 1.0]);
        assert!(are_coprime(&lag, &Polynomial::constant(10.0), ROOT_TOLERANCE).unwrap());
        assert!(are_coprime(&lag, &Polynomial::zero(), ROOT_TOLERANCE).is_err());
    }

    #[test]
    fn unit_dc_from_roots() {
        let a = Polynomial::new(vec![0.04, 0.2, 1.0]);
        let rebuilt = Polynomial::from_roots_unit_dc(&a.roots().unwrap()).unwrap();
        for (x, y) in a.coeffs().iter().zip(rebuilt.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn display() {
        assert_eq!(Polynomial::new(vec![0.1, 0.0, -1.0]).to_string(), "0.1p^2 - 1");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    fn max_real_part_by_eigenvalues(coeffs: &[f64]) -> f64 {
        let d = coeffs.len() - 1;
        let mut m = DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            m[(0, j)] = -coeffs[j + 1] / coeffs[0];
        }
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        m.complex_eigenvalues()
            .iter()
            .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re))
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(coeffs in prop::collection::vec(-5.0f64..5.0, 1..8), x in -3.0f64..3.0) {
            let p = Polynomial::new(coeffs.clone());
            let d = coeffs.len() - 1;
            let direct: f64 = coeffs.iter().enumerate().map(|(i, c)| c * x.powi((d - i) as i32)).sum();
            prop_assert!((p.eval(x) - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        }

        #[test]
        fn routh_agrees_with_companion_eigenvalues(
            re in prop::collection::vec(-3.0f64..1.0, 1..=6),
            im in prop::collection::vec(0.0f64..3.0, 6),
            pair in prop::collection::vec(any::<bool>(), 6),
        ) {
            // build from roots so that both stable and unstable cases appear
            let mut roots = Vec::new();
            let mut i = 0;
            while roots.len() < re.len() {
                if pair[i] && roots.len() + 2 <= re.len() {
                    roots.push(Complex64::new(re[i], im[i]));
                    roots.push(Complex64::new(re[i], -im[i]));
                } else {
                    roots.push(Complex64::new(re[i], 0.0));
                }
                i += 1;
            }
            prop_assume!(roots.iter().all(|r| r.re.abs() > 1e-3));
            let mut acc = Polynomial::constant(1.0);
            for pair in roots.chunks(1) {
                let r = pair[0];
                if r.im == 0.0 {
                    acc = acc.mul(&Polynomial::new(vec![1.0, -r.re]));
                } else if r.im > 0.0 {
                    acc = acc.mul(&Polynomial::new(vec![1.0, -2.0 * r.re, r.norm_sqr()]));
                }
            }
            let max_re = max_real_part_by_eigenvalues(acc.coeffs());
            prop_assert_eq!(acc.is_hurwitz(ROOT_TOLERANCE).unwrap(), max_re < -ROOT_TOLERANCE);
        }
    }
}
