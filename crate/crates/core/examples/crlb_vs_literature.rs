//! The asymptotic CRLB of a first-order system next to the bound obtained
//! by interpolating the sampled noise-free output, which depends on the
//! assumed interpolation and underestimates the achievable covariance.
//!
//!     cargo run --example crlb_vs_literature

use srivc::efficiency::{crlb_asymptotic, literature_crlb};
use srivc::lti::{Hold, ThetaVector};

fn main() -> srivc::Result<()> {
    let theta = ThetaVector::new(vec![0.1], vec![10.0])?;
    let crlb = crlb_asymptotic(&theta, 1.0, 0.01, Hold::Zoh, 1.0)?;
    println!("CRLB:\n{}", crlb.matrix);
    for hold in [Hold::Zoh, Hold::Foh] {
        let lit = literature_crlb(&theta, 1.0, 0.01, Hold::Zoh, hold, 1.0)?;
        println!(
            "interpolated output ({hold}):{}(1,1) is {:.1}% below the CRLB",
            lit.matrix,
            100.0 * (1.0 - lit.matrix[(0, 0)] / crlb.matrix[(0, 0)])
        );
    }
    Ok(())
}
