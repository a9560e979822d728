pub mod cli;
pub mod clifford;
pub mod cone;
pub mod error;
pub mod exterior;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod models;
pub mod sampling;
pub mod svforms;

pub use error::{Error, Result};
