//! Saving a covariance report as CSV plus TOML sidecar and loading it back;
//! experiment configs round-trip the same way.
//!
//!     cargo run --example reports

use srivc::efficiency::{crlb_asymptotic, CovarianceReport};
use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::ExperimentConfig;

fn main() -> srivc::Result<()> {
    let theta = ThetaVector::new(vec![0.1], vec![10.0])?;
    let dir = std::env::temp_dir().join("srivc-reports");
    std::fs::create_dir_all(&dir)?;

    let crlb = crlb_asymptotic(&theta, 1.0, 0.01, Hold::Zoh, 1.0)?;
    let (csv, toml) = crlb.save(&dir, "crlb")?;
    println!("{}:\n{}", csv.display(), std::fs::read_to_string(&csv)?);
    println!("{}:\n{}", toml.display(), std::fs::read_to_string(&toml)?);
    assert_eq!(CovarianceReport::load(&dir, "crlb")?, crlb);

    let cfg = ExperimentConfig::new(theta, 0.01, 50_000, 2000, 1.0);
    let text = cfg.to_toml();
    println!("experiment config:\n{text}");
    assert_eq!(ExperimentConfig::from_toml_str(&text)?, cfg);
    Ok(())
}
