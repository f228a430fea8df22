pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod pair1d;
pub mod wavefield;

pub use error::{Error, Result};
