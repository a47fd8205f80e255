//! Exact sampled-data equivalents of continuous-time systems under a
//! zero-order or first-order (triangle) hold on the input.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::state_space::{StateSpace, Timing};
use crate::error::{Error, Result};

/// Intersample behaviour assumed for a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hold {
    /// Piecewise constant between samples.
    Zoh,
    /// Piecewise linear between successive samples.
    Foh,
}

impl Hold {
    pub fn as_str(self) -> &'static str {
        match self {
            Hold::Zoh => "zoh",
            Hold::Foh => "foh",
        }
    }
}

impl std::fmt::Display for Hold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Hold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zoh" => Ok(Hold::Zoh),
            "foh" => Ok(Hold::Foh),
            other => Err(Error::Config(format!("unknown hold `{other}` (expected zoh or foh)"))),
        }
    }
}

/// A discretized system together with the FOH input offset.
///
/// Under FOH the physical state is `x[k] = xi[k] + offset * u[k]`, where `xi`
/// is the state of the returned causal realization. For ZOH the offset is zero.
#[derive(Debug, Clone)]
pub(crate) struct Discretized {
    pub ss: StateSpace,
    pub offset: Vec<f64>,
}

/// Continuous-to-discrete conversion with the given input hold.
pub fn c2d(ss: &StateSpace, period: f64, hold: Hold) -> Result<StateSpace> {
    Ok(discretize(ss, period, hold)?.ss)
}

pub(crate) fn discretize(ss: &StateSpace, period: f64, hold: Hold) -> Result<Discretized> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidSamplePeriod(period));
    }
    if ss.is_discrete() {
        return Err(Error::Dimension("c2d expects a continuous-time system".into()));
    }
    let n = ss.states();
    let m = ss.inputs();
    let timing = Timing::Discrete { period };
    if n == 0 {
        return Ok(Discretized {
            ss: StateSpace::new(ss.a.clone(), ss.b.clone(), ss.c.clone(), ss.d.clone(), timing)?,
            offset: Vec::new(),
        });
    }
    match hold {
        Hold::Zoh => {
            let mut aug = DMatrix::zeros(n + m, n + m);
            aug.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * period));
            aug.view_mut((0, n), (n, m)).copy_from(&(&ss.b * period));
            let e = aug.exp();
            let ad = e.view((0, 0), (n, n)).into_owned();
            let bd = e.view((0, n), (n, m)).into_owned();
            Ok(Discretized {
                ss: StateSpace::new(ad, bd, ss.c.clone(), ss.d.clone(), timing)?,
                offset: vec![0.0; n],
            })
        }
        Hold::Foh => {
            if m != 1 {
                return Err(Error::Dimension("FOH discretization supports a single input".into()));
            }
            // [A B 0; 0 0 1/T; 0 0 0] * T
            let mut aug = DMatrix::zeros(n + 2, n + 2);
            aug.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * period));
            aug.view_mut((0, n), (n, 1)).copy_from(&(&ss.b * period));
            aug[(n, n + 1)] = 1.0;
            let e = aug.exp();
            let phi = e.view((0, 0), (n, n)).into_owned();
            let gamma1 = e.view((0, n), (n, 1)).into_owned();
            let gamma2 = e.view((0, n + 1), (n, 1)).into_owned();
            let identity = DMatrix::<f64>::identity(n, n);
            let bd = &gamma1 + (&phi - identity) * &gamma2;
            let dd = &ss.d + &ss.c * &gamma2;
            Ok(Discretized {
                ss: StateSpace::new(phi, bd, ss.c.clone(), dd, timing)?,
                offset: gamma2.iter().copied().collect(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lag() -> StateSpace {
        StateSpace::new(
            DMatrix::from_element(1, 1, -10.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 10.0),
            DMatrix::zeros(1, 1),
            Timing::Continuous,
        )
        .unwrap()
    }

    #[test]
    fn zoh_first_order_closed_form() {
        let d = c2d(&lag(), 0.01, Hold::Zoh).unwrap();
        assert_relative_eq!(d.a[(0, 0)], (-0.1f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(d.b[(0, 0)], (1.0 - (-0.1f64).exp()) / 10.0, epsilon = 1e-15);
        assert_eq!(d.timing, Timing::Discrete { period: 0.01 });
    }

    #[test]
    fn zoh_integrator() {
        let integ = StateSpace::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
            Timing::Continuous,
        )
        .unwrap();
        for t in [0.001, 0.37, 5.0] {
            let d = c2d(&integ, t, Hold::Zoh).unwrap();
            assert_relative_eq!(d.a[(0, 0)], 1.0);
            assert_relative_eq!(d.b[(0, 0)], t, epsilon = 1e-14);
        }
    }

    #[test]
    fn foh_first_order_closed_form() {
        // x' = -a x + u; Gamma1 = (1 - e)/a, Gamma2 = (e - 1 + aT)/(a^2 T) with e = exp(-aT)
        let (a, t) = (10.0f64, 0.01f64);
        let e = (-a * t).exp();
        let zoh = c2d(&lag(), t, Hold::Zoh).unwrap();
        let foh = discretize(&lag(), t, Hold::Foh).unwrap();
        let g1 = (1.0 - e) / a;
        let g2 = (e - 1.0 + a * t) / (a * a * t);
        assert_eq!(foh.ss.a, zoh.a);
        assert_relative_eq!(foh.offset[0], g2, epsilon = 1e-14);
        assert_relative_eq!(foh.ss.b[(0, 0)], g1 + (e - 1.0) * g2, epsilon = 1e-14);
        assert_relative_eq!(foh.ss.d[(0, 0)], 10.0 * g2, epsilon = 1e-14);
        assert!((foh.ss.b[(0, 0)] - zoh.b[(0, 0)]).abs() > 1e-6);
    }

    #[test]
    fn rejects_nonpositive_period() {
        for t in [0.0, -1.0, f64::NAN] {
            assert!(matches!(c2d(&lag(), t, Hold::Zoh), Err(Error::InvalidSamplePeriod(_))));
        }
    }

    #[test]
    fn discretization_is_linear_in_output_map() {
        let base = lag();
        let mut scaled = base.clone();
        scaled.c *= 3.0;
        scaled.d[(0, 0)] = 2.0;
        for hold in [Hold::Zoh, Hold::Foh] {
            let d0 = c2d(&base, 0.05, hold).unwrap();
            let d1 = c2d(&scaled, 0.05, hold).unwrap();
            assert_eq!(d0.a, d1.a);
            assert_eq!(d0.b, d1.b);
            assert_relative_eq!(d1.c[(0, 0)], 3.0 * d0.c[(0, 0)]);
            assert_relative_eq!(d1.d[(0, 0)] - 2.0, 3.0 * d0.d[(0, 0)], epsilon = 1e-14);
        }
    }

    #[test]
    fn hold_parses() {
        assert_eq!("ZOH".parse::<Hold>().unwrap(), Hold::Zoh);
        assert_eq!("foh".parse::<Hold>().unwrap(), Hold::Foh);
        assert!("triangle".parse::<Hold>().is_err());
    }
}
