use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// A proper rational transfer function in `p` whose denominator does not
/// vanish at `p = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TransferFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroPolynomial("transfer function denominator"));
        }
        if den.constant_term() == 0.0 {
            return Err(Error::ZeroDcDenominator);
        }
        if !num.is_zero() && num.degree() > den.degree() {
            return Err(Error::Improper {
                num_degree: num.degree(),
                den_degree: den.degree(),
            });
        }
        Ok(Self { num, den })
    }

    pub fn gain(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_biproper(&self) -> bool {
        !self.num.is_zero() && self.num.degree() == self.den.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }
}

/// Model parameters `[a_1 .. a_n, b_0 .. b_m]`.
///
/// The denominator is `a_1 p^n + ... + a_n p + 1`; its unit constant term is
/// implied and never stored. The numerator is `b_0 p^m + ... + b_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ThetaVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let theta = Self { a, b };
        theta.validate()?;
        Ok(theta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.is_empty() {
            return Err(Error::Config("numerator needs at least one coefficient".into()));
        }
        if self.n() < self.m() {
            return Err(Error::Improper {
                num_degree: self.m(),
                den_degree: self.n(),
            });
        }
        if self.a.iter().chain(&self.b).any(|x| !x.is_finite()) {
            return Err(Error::Config("parameters must be finite".into()));
        }
        Ok(())
    }

    /// Rebuilds a vector of the same shape from stacked values.
    pub fn from_stacked(values: &[f64], n: usize, m: usize) -> Result<Self> {
        if values.len() != n + m + 1 {
            return Err(Error::Dimension(format!(
                "expected {} parameters for n={n}, m={m}, got {}",
                n + m + 1,
                values.len()
            )));
        }
        Self::new(values[..n].to_vec(), values[n..].to_vec())
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.b.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn denominator(&self) -> Polynomial {
        let mut c = self.a.clone();
        c.push(1.0);
        Polynomial::new(c)
    }

    pub fn numerator(&self) -> Polynomial {
        Polynomial::new(self.b.clone())
    }

    pub fn to_tf(&self) -> Result<TransferFunction> {
        theta_to_tf(self)
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn theta_to_tf(theta: &ThetaVector) -> Result<TransferFunction> {
    theta.validate()?;
    TransferFunction::new(theta.numerator(), theta.denominator())
}

/// Inverse of [`theta_to_tf`]: normalizes the denominator to unit constant
/// term and reads the orders off the polynomial degrees.
pub fn tf_to_theta(tf: &TransferFunction) -> Result<ThetaVector> {
    let dc = tf.den().constant_term();
    let den = tf.den().coeffs();
    let a: Vec<f64> = den[..den.len() - 1].iter().map(|c| c / dc).collect();
    let b: Vec<f64> = tf.num().coeffs().iter().map(|c| c / dc).collect();
    ThetaVector::new(a, b)
}
