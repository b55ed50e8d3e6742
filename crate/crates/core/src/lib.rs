pub mod cli;
pub mod error;
mod linalg;
pub mod nyquist;
pub mod polyrat;
pub mod passivity;
pub mod robustness;
pub mod smith_mcmillan;
mod sweep;
pub mod tfmatrix;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
