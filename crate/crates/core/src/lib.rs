pub mod dense;
pub mod error;
pub mod rbm;
pub mod samplers;
pub mod estimators;
pub mod experiment;
pub mod optimizer;
pub mod stats;

pub use error::{Error, Result};
