//! Variance of the second-order estimates against the sample size for the
//! matched instrument and for an instrument that assumes a FOH input, on
//! identical data.
//!
//!     cargo run --release --example sample_size_sweep

use srivc::efficiency::{crlb_asymptotic, srivc_asymptotic_cov};
use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::{sweep_sample_size, ExperimentConfig, Samples};

fn main() -> srivc::Result<()> {
    let theta = ThetaVector::new(vec![0.04, 0.2], vec![1.0])?;
    let mut matched = ExperimentConfig::new(theta.clone(), 0.1, 0, 200, 1.0);
    matched.samples = Samples::Sweep(vec![1000, 4000, 16_000]);
    matched.seed = 3;
    let mut foh = matched.clone();
    foh.srivc.instrument_hold = Some(Hold::Foh);

    let crlb = crlb_asymptotic(&theta, 1.0, 0.1, Hold::Zoh, 1.0)?;
    let sandwich = srivc_asymptotic_cov(&theta, 1.0, 0.1, Hold::Zoh, Hold::Foh, 1.0)?;
    println!("analytic AsCov diagonal: CRLB {:?}", crlb.diagonal());
    println!("                         FOH instrument {:?}", sandwich.diagonal());
    for (name, cfg) in [("matched", &matched), ("FOH instrument", &foh)] {
        for res in sweep_sample_size(cfg)? {
            let ratios: Vec<String> = res
                .empirical_cov
                .diagonal()
                .iter()
                .zip(crlb.diagonal())
                .map(|(e, c)| format!("{:.3}", e / c))
                .collect();
            println!("{name:>15} N = {:>6}: empirical / CRLB = [{}]", res.samples, ratios.join(", "));
        }
    }
    Ok(())
}
