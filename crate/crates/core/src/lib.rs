//! Penalized B-spline backfitting for `y = f1(x1) + f2(x2) + ε`.

pub mod backfit;
pub mod bandmat;
pub mod basis;
pub mod error;
pub mod estimator;
pub mod inference;
pub mod io;
pub mod penalty;
pub mod sim;

pub use error::{Error, Result};
