//! Continuous-time LTI building blocks: operator polynomials, transfer
//! functions, state-space realizations, hold-equivalent discretization and
//! filtering of sampled signals.

mod discretize;
mod filter;
mod polynomial;
mod state_space;
mod transfer;

pub use discretize::{c2d, Hold};
pub use filter::{filter_bank, filter_ct, simulate, FilterBank};
pub use polynomial::{are_coprime, is_hurwitz, Polynomial, ROOT_TOLERANCE};
pub use state_space::{realize_bank, tf_to_ss, StateSpace, Timing};
pub use transfer::{theta_to_tf, tf_to_theta, ThetaVector, TransferFunction};
