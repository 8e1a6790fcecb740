use std::f64::consts::LN_2;

use num_complex::Complex64;

use super::{check_dense_size, CMatrix, PauliString, StateVector, DEFAULT_MAX_QUBITS, PSD_TOL, STRUCTURE_TOL};
use crate::error::{invalid, Error, Result};

/// Hermitian, unit-trace, positive semi-definite matrix over `qubit_count` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    elements: CMatrix,
    qubit_count: usize,
}

impl DensityMatrix {
    /// Validates and wraps a matrix.
    pub fn new(elements: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(elements)?;
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(elements: CMatrix) -> Result<Self> {
        let dim = elements.nrows();
        if dim != elements.ncols() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: elements.ncols(),
            });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return invalid(format!("matrix dimension {dim} is not a power of two"));
        }
        let qubit_count = dim.trailing_zeros() as usize;
        check_dense_size(qubit_count, DEFAULT_MAX_QUBITS)?;
        Ok(Self {
            elements,
            qubit_count,
        })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = CMatrix::from_column_slice(state.amplitudes().len(), 1, state.amplitudes());
        Self {
            elements: &v * v.adjoint(),
            qubit_count: state.qubit_count(),
        }
    }

    pub fn maximally_mixed(qubit_count: usize) -> Result<Self> {
        check_dense_size(qubit_count, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << qubit_count;
        Ok(Self {
            elements: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            qubit_count,
        })
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let diag: Vec<Complex64> = probabilities.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        Self::new(m)
    }

    pub fn elements(&self) -> &CMatrix {
        &self.elements
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.elements)
    }

    /// `Tr(rho^2)`, computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = super::max_abs_diff(&self.elements, &self.elements.adjoint());
        if !herm.is_finite() || herm > STRUCTURE_TOL {
            return invalid(format!("density matrix not Hermitian (deviation {herm:.3e})"));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STRUCTURE_TOL {
            return invalid(format!("density matrix trace {tr} is not 1"));
        }
        let min_eig = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < PSD_TOL {
            return invalid(format!("density matrix has negative eigenvalue {min_eig:.3e}"));
        }
        Ok(())
    }
}

pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    values
}

/// Reduction onto a subset of qubits.
pub trait PartialTrace {
    /// Traces out every qubit not listed in `keep`. Kept qubits stay in ascending order.
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

fn split_indices(qubits: usize, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if keep.is_empty() {
        return invalid("partial trace needs a nonempty keep set");
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return invalid("duplicate qubits in keep set");
    }
    if let Some(&bad) = kept.iter().find(|&&q| q >= qubits) {
        return Err(Error::IndexOutOfRange { index: bad, qubits });
    }
    let traced: Vec<usize> = (0..qubits).filter(|q| !kept.contains(q)).collect();
    Ok((kept, traced))
}

/// Basis index assembled from the bits of `full` at positions `qubits`.
fn gather_bits(full: usize, total: usize, qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |acc, &q| (acc << 1) | ((full >> (total - 1 - q)) & 1))
}

impl PartialTrace for StateVector {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.qubit_count();
        let (kept, traced) = split_indices(n, keep)?;
        let mut m = CMatrix::zeros(1 << kept.len(), 1 << traced.len());
        for (idx, amp) in self.amplitudes().iter().enumerate() {
            m[(gather_bits(idx, n, &kept), gather_bits(idx, n, &traced))] = *amp;
        }
        Ok(DensityMatrix {
            elements: &m * m.adjoint(),
            qubit_count: kept.len(),
        })
    }
}

impl PartialTrace for DensityMatrix {
    fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.qubit_count;
        let (kept, traced) = split_indices(n, keep)?;
        let dim = 1usize << kept.len();
        let mut out = CMatrix::zeros(dim, dim);
        for row in 0..self.dim() {
            let (rk, rt) = (gather_bits(row, n, &kept), gather_bits(row, n, &traced));
            for col in 0..self.dim() {
                if gather_bits(col, n, &traced) == rt {
                    out[(rk, gather_bits(col, n, &kept))] += self.elements[(row, col)];
                }
            }
        }
        Ok(DensityMatrix {
            elements: out,
            qubit_count: kept.len(),
        })
    }
}

/// `Tr(rho P)` using the single nonzero entry per column of a Pauli string.
pub fn pauli_expectation_exact(rho: &DensityMatrix, obs: &PauliString) -> Result<f64> {
    if obs.len() != rho.qubit_count {
        return Err(Error::DimensionMismatch {
            expected: rho.qubit_count,
            actual: obs.len(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..rho.dim() {
        let (row, phase) = obs.apply_to_index(b);
        acc += rho.elements[(b, row)] * phase;
    }
    debug_assert!(acc.im.abs() < 1e-9, "imaginary expectation residue {}", acc.im);
    Ok(acc.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyOrder {
    /// Rényi entropy of integer order >= 2.
    Renyi(u32),
    VonNeumann,
}

/// Entropy in bits.
pub fn entropy_exact(rho: &DensityMatrix, order: EntropyOrder) -> Result<f64> {
    match order {
        EntropyOrder::Renyi(a) if a < 2 => invalid(format!("Rényi order {a} must be at least 2")),
        EntropyOrder::Renyi(2) => Ok(-rho.purity().log2()),
        EntropyOrder::Renyi(a) => {
            let tr: f64 = rho.eigenvalues().iter().map(|l| l.max(0.0).powi(a as i32)).sum();
            Ok(tr.log2() / (1.0 - a as f64))
        }
        EntropyOrder::VonNeumann => {
            let s: f64 = rho
                .eigenvalues()
                .iter()
                .filter(|&&l| l > 0.0)
                .map(|&l| -l * l.ln())
                .sum();
            Ok(s / LN_2)
        }
    }
}

/// `Tr(rho^n)` by repeated matrix products.
pub fn trace_of_power(rho: &DensityMatrix, n: u32) -> f64 {
    let mut acc = rho.elements.clone();
    for _ in 1..n {
        acc = &acc * &rho.elements;
    }
    acc.trace().re
}

/// `0.5 * ||a - b||_1`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let diff = &a.elements - &b.elements;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}
