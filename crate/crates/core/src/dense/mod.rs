//! Dense state-vector and density-matrix engine.
//!
//! Everything here is exponential in the qubit count and exists to produce
//! targets and exact reference values for small systems. Sizes are capped at
//! [`DEFAULT_MAX_QUBITS`] unless a caller passes an explicit limit.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index,
//! and bit 0 corresponds to spin +1.

mod circuit;
mod density;
mod export;
mod gibbs;
mod pauli;
mod state;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use circuit::{haar_unitary, random_circuit_state, CircuitSpec};
pub use density::{
    entropy_exact, pauli_expectation_exact, trace_distance, trace_of_power, DensityMatrix,
    EntropyOrder, PartialTrace,
};
pub use export::{read_amplitudes, write_amplitudes, ObservableTarget, TargetDocument};
pub use gibbs::{gibbs_maxent_solve, GibbsSolution};
pub use pauli::{random_pauli_strings, Pauli, PauliString};
pub use state::{apply_gate, gates, StateVector};

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the oracle.
pub type CMatrix = DMatrix<Complex64>;

/// Default ceiling on the number of qubits held densely.
pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Tolerance for Hermiticity, trace, norm and unitarity checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Smallest eigenvalue accepted as positive semi-definite.
pub const PSD_TOL: f64 = -1e-9;

pub(crate) fn check_dense_size(qubits: usize, limit: usize) -> Result<()> {
    if qubits > limit {
        Err(Error::SizeOverCap { qubits, limit })
    } else {
        Ok(())
    }
}

/// Kronecker product with the first factor on the most significant qubits.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
