//! Numerical laboratory for suspension semiflows over uniformly expanding
//! Markov maps: twisted transfer operators, cone transversality and decay of
//! correlations.

pub mod error;
pub mod holder;
pub mod lab;
pub mod linalg;
pub mod phase_space;
pub mod transfer;
pub mod transversality;

pub use error::{Error, Result};
