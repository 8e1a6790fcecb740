use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{gates, CMatrix, StateVector};
use crate::error::{invalid, Result};

/// Layered random circuit: each layer applies an independent Haar-random
/// single-qubit unitary to every qubit, then the CNOT chain
/// `CNOT(0,1), CNOT(1,2), ..., CNOT(q-2,q-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub qubit_count: usize,
    pub layers: usize,
    pub seed: u64,
}

impl CircuitSpec {
    pub fn new(qubit_count: usize, layers: usize, seed: u64) -> Self {
        Self {
            qubit_count,
            layers,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return invalid("circuit needs at least one layer");
        }
        if self.qubit_count == 0 {
            return invalid("circuit needs at least one qubit");
        }
        Ok(())
    }
}

/// Haar-random `dim x dim` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Runs the circuit on `|0...0>`. Deterministic for a fixed seed.
pub fn random_circuit_state(spec: &CircuitSpec) -> Result<StateVector> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = StateVector::zero(spec.qubit_count)?;
    let cnot = gates::cnot();
    for _ in 0..spec.layers {
        for q in 0..spec.qubit_count {
            state.apply(&haar_unitary(2, &mut rng), &[q])?;
        }
        for q in 0..spec.qubit_count.saturating_sub(1) {
            state.apply(&cnot, &[q, q + 1])?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{entropy_exact, EntropyOrder, PartialTrace};

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 4] {
            let u = haar_unitary(dim, &mut rng);
            let id = CMatrix::identity(dim, dim);
            assert!(crate::dense::max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_amplitudes() {
        let spec = CircuitSpec::new(4, 3, 42);
        let a = random_circuit_state(&spec).unwrap();
        let b = random_circuit_state(&spec).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c = random_circuit_state(&CircuitSpec::new(4, 3, 43)).unwrap();
        assert_ne!(a.amplitudes(), c.amplitudes());
    }

    #[test]
    fn zero_layers_rejected() {
        assert!(random_circuit_state(&CircuitSpec::new(3, 0, 1)).is_err());
    }

    #[test]
    fn five_qubit_circuit_entangles_system() {
        let s = random_circuit_state(&CircuitSpec::new(5, 4, 42)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-10);
        let rho = s.partial_trace(&[0, 1, 2]).unwrap();
        rho.validate().unwrap();
        let s2 = entropy_exact(&rho, EntropyOrder::Renyi(2)).unwrap();
        assert!(s2 > 0.1, "S2 = {s2}");
    }
}
