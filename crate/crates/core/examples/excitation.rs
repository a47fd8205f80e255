//! Persistent excitation of white noise, a constant and a sinusoid.
//!
//!     cargo run --example excitation

use srivc::montecarlo::{check_excitation, generate_input, trial_stream, StreamRole};

fn main() -> srivc::Result<()> {
    let n = 5000;
    let white = generate_input(n, 1.0, &mut trial_stream(0, 0, StreamRole::Input));
    let constant = vec![1.0; n];
    let sine: Vec<f64> = (0..n).map(|k| (0.2 * k as f64).sin()).collect();
    for (name, u) in [("white noise", &white), ("constant", &constant), ("sinusoid", &sine)] {
        for order in [1, 2, 3, 5] {
            let rep = check_excitation(u, order)?;
            println!(
                "{name:>12} order {order}: rank {} -> {}",
                rep.rank,
                if rep.persistently_exciting { "exciting" } else { "deficient" }
            );
        }
    }
    Ok(())
}
