pub mod annulus;
pub mod bump;
pub mod cli;
pub mod diophantine;
pub mod envelope;
pub mod error;
pub mod fm;
pub mod gauss;
pub mod measure;
pub mod nufft;
pub mod primes;
pub mod quadrature;
pub mod report;
pub mod search;
pub mod stats;
pub mod tiling;
pub mod weight;
pub mod window;

pub use error::{Error, Result};
pub use gauss::GaussInt;
