pub mod error;
pub mod cli;
pub mod efficiency;
pub mod lti;
pub mod montecarlo;
pub mod srivc;

pub use error::{Error, Result};
