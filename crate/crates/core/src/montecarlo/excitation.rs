use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative eigenvalue threshold for counting a direction as excited.
const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct ExcitationReport {
    pub order: usize,
    pub rank: usize,
    pub persistently_exciting: bool,
    /// Eigenvalues of the lag covariance matrix, descending.
    pub eigenvalues: Vec<f64>,
}

/// Tests whether `u` is persistently exciting of the given order: the
/// `order x order` covariance of the windows `[u_k, u_{k-1}, ..., u_{k-order+1}]`
/// must have full rank.
///
/// Windows are taken from the record only (no zero padding), so a constant
/// or a single sinusoid has exactly rank 1 or 2.
pub fn check_excitation(u: &[f64], order: usize) -> Result<ExcitationReport> {
    if order == 0 {
        return Err(Error::Config("excitation order must be at least 1".into()));
    }
    if u.len() < 10 * order {
        return Err(Error::InsufficientData(format!(
            "{} samples are too few to test excitation of order {order}",
            u.len()
        )));
    }
    let windows = u.len() - order + 1;
    let mut r = DMatrix::zeros(order, order);
    for i in 0..order {
        for j in i..order {
            // lags i and j relative to the window's newest sample
            let top = order - 1;
            let s: f64 = (top..u.len()).map(|k| u[k - i] * u[k - j]).sum();
            r[(i, j)] = s / windows as f64;
            r[(j, i)] = r[(i, j)];
        }
    }
    let mut eig: Vec<f64> = r.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let threshold = RANK_TOL * eig[0].max(0.0);
    let rank = if eig[0] > 0.0 {
        eig.iter().filter(|&&v| v > threshold).count()
    } else {
        0
    };
    Ok(ExcitationReport {
        order,
        rank,
        persistently_exciting: rank == order,
        eigenvalues: eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{generate_input, trial_stream, StreamRole};

    #[test]
    fn white_noise_excites_every_order() {
        let u = generate_input(20_000, 1.0, &mut trial_stream(4, 0, StreamRole::Input));
        for order in [1, 2, 5, 11, 20] {
            let rep = check_excitation(&u, order).unwrap();
            assert!(rep.persistently_exciting, "order {order}");
        }
    }

    #[test]
    fn constant_has_rank_one() {
        let rep = check_excitation(&vec![3.0; 500], 2).unwrap();
        assert_eq!(rep.rank, 1);
        assert!(!rep.persistently_exciting);
        assert!(check_excitation(&vec![3.0; 500], 1).unwrap().persistently_exciting);
    }

    #[test]
    fn sinusoid_has_rank_two() {
        let u: Vec<f64> = (0..5000).map(|k| (0.3 * k as f64).sin()).collect();
        assert!(check_excitation(&u, 2).unwrap().persistently_exciting);
        let rep = check_excitation(&u, 3).unwrap();
        assert_eq!(rep.rank, 2);
        assert!(!rep.persistently_exciting);
    }

    #[test]
    fn degenerate_requests() {
        assert!(matches!(check_excitation(&[1.0; 15], 2), Err(Error::InsufficientData(_))));
        assert!(check_excitation(&[1.0; 15], 0).is_err());
        assert_eq!(check_excitation(&[0.0; 100], 2).unwrap().rank, 0);
    }
}
