//! Simulates data from a second-order system, writes it to CSV, reads it
//! back and estimates the model from a deliberately wrong starting point.
//!
//!     cargo run --release --example estimate

use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::{generate_input, simulate_system, trial_stream, StreamRole};
use srivc::srivc::{srivc_estimate, DataRecord, SrivcConfig};

fn main() -> srivc::Result<()> {
    let truth = ThetaVector::new(vec![0.04, 0.2], vec![1.0])?;
    let u = generate_input(20_000, 1.0, &mut trial_stream(42, 0, StreamRole::Input));
    let data = simulate_system(&u, &truth, 0.1, 0.1, Hold::Zoh, &mut trial_stream(42, 0, StreamRole::Noise))?;

    let dir = std::env::temp_dir().join("srivc-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("data.csv");
    data.save(&path)?;
    let data = DataRecord::load(&path)?;
    println!("read {} samples at T = {} from {}", data.len(), data.period, path.display());

    let init = ThetaVector::new(vec![0.06, 0.3], vec![0.8])?;
    let cfg = SrivcConfig::new(init, data.period);
    let est = srivc_estimate(&data, &cfg)?;
    for (j, (theta, err)) in est.history.iter().skip(1).zip(&est.relative_errors).enumerate() {
        println!("iteration {:>2}: theta = {:?}  relative change {err:.2e}", j + 1, theta.stacked());
    }
    println!("true theta      = {:?}", truth.stacked());
    println!("converged = {} after {} iterations", est.converged, est.iterations);
    Ok(())
}
