use num_complex::Complex64;

use super::{check_dense_size, CMatrix, DEFAULT_MAX_QUBITS, STRUCTURE_TOL};
use crate::error::{invalid, Error, Result};

/// Pure state over `qubit_count` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubit_count: usize,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero(qubit_count: usize) -> Result<Self> {
        Self::zero_with_limit(qubit_count, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_limit(qubit_count: usize, limit: usize) -> Result<Self> {
        if qubit_count == 0 {
            return invalid("state needs at least one qubit");
        }
        check_dense_size(qubit_count, limit)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            qubit_count,
        })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return invalid(format!("amplitude count {len} is not a power of two"));
        }
        let qubit_count = len.trailing_zeros() as usize;
        check_dense_size(qubit_count, DEFAULT_MAX_QUBITS)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonFinite("state norm is zero or not finite".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
            qubit_count,
        })
    }

    /// Tensor product `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let qubits = self.qubit_count + other.qubit_count;
        check_dense_size(qubits, DEFAULT_MAX_QUBITS)?;
        let mut amplitudes = Vec::with_capacity(1 << qubits);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            amplitudes,
            qubit_count: qubits,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies a 2x2 or 4x4 unitary to the given target qubits in place.
    /// For two targets, `targets[0]` is the more significant gate index bit.
    pub fn apply(&mut self, gate: &CMatrix, targets: &[usize]) -> Result<()> {
        let k = targets.len();
        if k == 0 || k > 2 {
            return invalid("gates act on one or two qubits");
        }
        let dim = 1usize << k;
        if gate.nrows() != dim || gate.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: gate.nrows(),
            });
        }
        for &t in targets {
            if t >= self.qubit_count {
                return Err(Error::IndexOutOfRange {
                    index: t,
                    qubits: self.qubit_count,
                });
            }
        }
        if k == 2 && targets[0] == targets[1] {
            return invalid("gate targets must be distinct");
        }
        let deviation = unitarity_deviation(gate);
        if deviation > STRUCTURE_TOL {
            return Err(Error::NonUnitary { deviation });
        }

        let n = self.qubit_count;
        let masks: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
        let all_targets: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|local| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| local & (1 << (k - 1 - j)) != 0)
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect();

        let mut buf = [Complex64::new(0.0, 0.0); 4];
        for base in 0..self.amplitudes.len() {
            if base & all_targets != 0 {
                continue;
            }
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base + off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, v) in buf.iter().take(dim).enumerate() {
                    acc += gate[(row, col)] * v;
                }
                self.amplitudes[base + off] = acc;
            }
        }
        Ok(())
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate(state: &StateVector, gate: &CMatrix, targets: &[usize]) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, targets)?;
    Ok(out)
}

fn unitarity_deviation(gate: &CMatrix) -> f64 {
    let product = gate.adjoint() * gate;
    let identity = CMatrix::identity(gate.nrows(), gate.ncols());
    super::max_abs_diff(&product, &identity)
}

/// Standard gate matrices.
pub mod gates {
    use num_complex::Complex64;

    use crate::dense::CMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn h() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
    }

    /// CNOT with the control on the first target.
    pub fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        m[(2, 3)] = c(1.0, 0.0);
        m[(3, 2)] = c(1.0, 0.0);
        m
    }
}
