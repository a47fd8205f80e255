//! Sampled-data equivalents of a continuous-time lag under ZOH and FOH, and
//! filtering of a sampled signal through a shared-denominator filter bank.
//!
//!     cargo run --example discretization

use srivc::lti::{c2d, filter_bank, tf_to_ss, Hold, Polynomial, TransferFunction};

fn main() -> srivc::Result<()> {
    // G(p) = 10 / (0.1 p + 1)
    let g = TransferFunction::new(Polynomial::constant(10.0), Polynomial::new(vec![0.1, 1.0]))?;
    let ct = tf_to_ss(&g)?;
    for hold in [Hold::Zoh, Hold::Foh] {
        let d = c2d(&ct, 0.01, hold)?;
        println!(
            "{hold}: Ad = {:.6}, Bd = {:.6e}, Cd = {:.3}, Dd = {:.6e}",
            d.a[(0, 0)],
            d.b[(0, 0)],
            d.c[(0, 0)],
            d.d[(0, 0)]
        );
    }

    // p/A and 1/A share a denominator; 0.1 * p/A + 1/A = 1 reconstructs the input.
    let den = Polynomial::new(vec![0.1, 1.0]);
    let bank = [
        TransferFunction::new(Polynomial::monomial(1), den.clone())?,
        TransferFunction::new(Polynomial::constant(1.0), den)?,
    ];
    let u: Vec<f64> = (0..1000).map(|k| (0.05 * k as f64).sin() + 0.3 * (0.7 * k as f64).cos()).collect();
    for hold in [Hold::Zoh, Hold::Foh] {
        let out = filter_bank(&bank, &u, 0.01, hold)?;
        let err = (0..u.len())
            .map(|k| (0.1 * out[(k, 0)] + out[(k, 1)] - u[k]).abs())
            .fold(0.0, f64::max);
        println!("{hold}: max input reconstruction error {err:.2e}");
    }
    Ok(())
}
