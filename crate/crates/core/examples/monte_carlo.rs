//! A small Monte Carlo study of the first-order system: the empirical
//! asymptotic covariance with standard errors against the analytic CRLB.
//!
//!     cargo run --release --example monte_carlo [runs]

use srivc::efficiency::crlb_asymptotic;
use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::{run_experiment, ExperimentConfig};

fn main() -> srivc::Result<()> {
    let runs = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let theta = ThetaVector::new(vec![0.1], vec![10.0])?;
    let mut cfg = ExperimentConfig::new(theta.clone(), 0.01, 20_000, runs, 1.0);
    cfg.seed = 7;

    let res = run_experiment(&cfg)?;
    let crlb = crlb_asymptotic(&theta, 1.0, 0.01, Hold::Zoh, 1.0)?;
    let se = res.empirical_cov.stderr.as_ref().expect("empirical stderr");
    println!("{} runs, N = {}, convergence rate {:.3}", runs, res.samples, res.convergence_rate);
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        println!(
            "P{}{}: empirical {:.5e} +- {:.1e}   CRLB {:.5e}",
            i + 1,
            j + 1,
            res.empirical_cov.matrix[(i, j)],
            se[(i, j)],
            crlb.matrix[(i, j)]
        );
    }
    for r in [runs / 10, runs / 2, runs] {
        let partial = res.covariance_over(r.max(2))?;
        println!("after {:>5} runs: diagonal {:?}", r.max(2), partial.diagonal());
    }
    Ok(())
}
