//! Complex restricted Boltzmann machine ansatz for mixed states.

pub mod amplitude;
mod config;
pub mod dmatrix;
mod params;

pub use amplitude::{
    amplitude_matrix, amplitude_ratio, exact_density_matrix, log_2cosh, log_amplitude, stable_tanh,
    AmplitudeTable, LogPsi, TABLE_MAX_VISIBLE,
};
pub use config::{Partition, SpinConfig};
pub use dmatrix::{d_matrix_entry, d_vector, log_derivatives};
pub use params::{ParamCoord, RbmCheckpoint, RbmParams, PARAM_BOUND};
