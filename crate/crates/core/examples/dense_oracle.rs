//! Random circuit state, reduced density matrix, Pauli expectations and entropies.

use maxent_rbm::dense::{
    entropy_exact, pauli_expectation_exact, random_circuit_state, trace_of_power, CircuitSpec, EntropyOrder,
    PartialTrace, PauliString,
};

fn main() -> maxent_rbm::Result<()> {
    let state = random_circuit_state(&CircuitSpec::new(5, 4, 7))?;
    let rho = state.partial_trace(&[0, 1, 2])?;
    println!("reduced state: {} qubits, purity {:.4}", rho.qubit_count(), rho.purity());
    println!("eigenvalues: {:.4?}", rho.eigenvalues());
    for order in [EntropyOrder::Renyi(2), EntropyOrder::Renyi(3), EntropyOrder::VonNeumann] {
        println!("{order:?}: {:.4} bits", entropy_exact(&rho, order)?);
    }
    println!("Tr rho^3 = {:.6}", trace_of_power(&rho, 3));
    for s in ["ZII", "XZI", "YYX"] {
        let p: PauliString = s.parse()?;
        println!("<{s}> = {:+.5}", pauli_expectation_exact(&rho, &p)?);
    }
    Ok(())
}
