//! The practical estimator (filtering sampled y) and the simulation-only
//! theoretical estimator (filtering the continuous noise-free output) share
//! their converging point, where the instrument is orthogonal to the output
//! error.
//!
//!     cargo run --release --example converging_point

use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::{generate_input, simulate_with_noise, trial_stream, StreamRole};
use srivc::srivc::{srivc_estimate, theoretical_estimate, verify_converging_point, SrivcConfig};

fn main() -> srivc::Result<()> {
    let truth = ThetaVector::new(vec![0.1], vec![10.0])?;
    let n = 10_000;
    let u = generate_input(n, 1.0, &mut trial_stream(5, 0, StreamRole::Input));
    let (data, e) = simulate_with_noise(&u, &truth, 1.0, 0.01, Hold::Zoh, &mut trial_stream(5, 0, StreamRole::Noise))?;

    let cfg = SrivcConfig::new(truth.clone(), 0.01);
    let practical = srivc_estimate(&data, &cfg)?;
    let theoretical = theoretical_estimate(&u, &e, &truth, &cfg)?;
    println!("practical   {:?} ({} iterations)", practical.theta.stacked(), practical.iterations);
    println!("theoretical {:?} ({} iterations)", theoretical.theta.stacked(), theoretical.iterations);

    let resid = verify_converging_point(&data, &practical.theta, &cfg)?;
    let norm = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    let ynorm = data.y.iter().map(|y| y * y).sum::<f64>().sqrt();
    println!("residual {norm:.3e}  (||y||/sqrt(N) = {:.3e})", ynorm / (n as f64).sqrt());

    let off = verify_converging_point(&data, &truth, &cfg)?;
    println!("residual at the true parameters: {:?}", off);
    Ok(())
}
