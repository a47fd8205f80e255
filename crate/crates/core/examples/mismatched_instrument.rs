//! SRIVC asymptotic covariance when the instrument assumes a FOH input while
//! the data were generated with a ZOH input. The matched case attains the
//! CRLB; the mismatched sandwich covariance exceeds it.
//!
//!     cargo run --example mismatched_instrument

use srivc::efficiency::{crlb_asymptotic, srivc_asymptotic_cov};
use srivc::lti::{Hold, ThetaVector};

fn main() -> srivc::Result<()> {
    let theta = ThetaVector::new(vec![0.04, 0.2], vec![1.0])?;
    let crlb = crlb_asymptotic(&theta, 1.0, 0.1, Hold::Zoh, 1.0)?;
    let matched = srivc_asymptotic_cov(&theta, 1.0, 0.1, Hold::Zoh, Hold::Zoh, 1.0)?;
    let foh = srivc_asymptotic_cov(&theta, 1.0, 0.1, Hold::Zoh, Hold::Foh, 1.0)?;

    println!("{:>10} {:>14} {:>14} {:>14} {:>8}", "entry", "CRLB", "matched", "FOH instr.", "ratio");
    for (i, name) in ["a1", "a2", "b0"].iter().enumerate() {
        println!(
            "{name:>10} {:>14.6e} {:>14.6e} {:>14.6e} {:>8.4}",
            crlb.matrix[(i, i)],
            matched.matrix[(i, i)],
            foh.matrix[(i, i)],
            foh.matrix[(i, i)] / crlb.matrix[(i, i)]
        );
    }
    let excess = &foh.matrix - &crlb.matrix;
    println!(
        "smallest eigenvalue of (FOH - CRLB): {:.3e}",
        excess.symmetric_eigenvalues().min()
    );
    Ok(())
}
