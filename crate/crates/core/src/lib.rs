pub mod dataset;
pub mod error;
pub mod gof;
pub mod lfit;
pub mod mlefit;
pub mod models;
pub mod montecarlo;
pub mod numerics;
pub mod quadrature;
pub mod sample;
pub mod unit;
pub mod weights;

pub use error::{Error, Result};
pub use sample::SortedSample;
