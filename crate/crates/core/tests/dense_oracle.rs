use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxent_rbm::dense::{
    entropy_exact, gibbs_maxent_solve, pauli_expectation_exact, random_circuit_state, trace_distance,
    CircuitSpec, DensityMatrix, EntropyOrder, PartialTrace, PauliString, StateVector,
};
use maxent_rbm::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn paulis(ids: &[&str]) -> Vec<PauliString> {
    ids.iter().map(|s| s.parse().unwrap()).collect()
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&g + g.adjoint()) * c(0.5)
}

#[test]
fn bell_pair_reduces_to_maximally_mixed() {
    let s = 0.5f64.sqrt();
    let bell = StateVector::from_amplitudes(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
    let rho = bell.partial_trace(&[0]).unwrap();
    assert!((rho.purity() - 0.5).abs() < 1e-14);
    for order in [EntropyOrder::Renyi(2), EntropyOrder::Renyi(3), EntropyOrder::VonNeumann] {
        assert!((entropy_exact(&rho, order).unwrap() - 1.0).abs() < 1e-12);
    }
    let full = DensityMatrix::from_pure(&bell);
    assert!((pauli_expectation_exact(&full, &"ZZ".parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);
    assert!((pauli_expectation_exact(&full, &"XX".parse().unwrap()).unwrap() - 1.0).abs() < 1e-14);
    assert!((pauli_expectation_exact(&full, &"YY".parse().unwrap()).unwrap() + 1.0).abs() < 1e-14);
}

#[test]
fn circuit_states_are_deterministic_and_normalized() {
    let a = random_circuit_state(&CircuitSpec::new(5, 3, 9)).unwrap();
    let b = random_circuit_state(&CircuitSpec::new(5, 3, 9)).unwrap();
    let other = random_circuit_state(&CircuitSpec::new(5, 3, 10)).unwrap();
    assert_eq!(a.amplitudes(), b.amplitudes());
    assert_ne!(a.amplitudes(), other.amplitudes());
    assert!((a.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn reductions_of_a_pure_state_share_their_spectrum() {
    let psi = random_circuit_state(&CircuitSpec::new(5, 4, 1)).unwrap();
    let a = psi.partial_trace(&[0, 1]).unwrap();
    let b = psi.partial_trace(&[2, 3, 4]).unwrap();
    for order in [EntropyOrder::Renyi(2), EntropyOrder::VonNeumann] {
        let (sa, sb) = (entropy_exact(&a, order).unwrap(), entropy_exact(&b, order).unwrap());
        assert!((sa - sb).abs() < 1e-10, "{order:?}: {sa} vs {sb}");
    }
}

#[test]
fn renyi_entropies_are_ordered() {
    for seed in 0..10 {
        let rho = random_circuit_state(&CircuitSpec::new(5, 4, seed)).unwrap().partial_trace(&[0, 1, 2]).unwrap();
        let s1 = entropy_exact(&rho, EntropyOrder::VonNeumann).unwrap();
        let s2 = entropy_exact(&rho, EntropyOrder::Renyi(2)).unwrap();
        let s3 = entropy_exact(&rho, EntropyOrder::Renyi(3)).unwrap();
        assert!(s1 >= s2 - 1e-12 && s2 >= s3 - 1e-12, "{s1} {s2} {s3}");
        assert!(s1 <= 3.0 + 1e-12);
    }
}

#[test]
fn gibbs_state_matches_single_qubit_closed_form() {
    let sol = gibbs_maxent_solve(&paulis(&["Z"]), &[0.6]).unwrap();
    let expected = DensityMatrix::diagonal(&[0.8, 0.2]).unwrap();
    assert!(trace_distance(&sol.rho, &expected).unwrap() < 1e-9);
}

#[test]
fn gibbs_state_is_the_entropy_maximizer() {
    let obs = paulis(&["ZII", "IZZ", "ZZI"]);
    let targets = [0.3, -0.4, 0.2];
    let sol = gibbs_maxent_solve(&obs, &targets).unwrap();
    let s_me = entropy_exact(&sol.rho, EntropyOrder::VonNeumann).unwrap();
    let dim = 8;
    let mut basis = vec![PauliString::identity(3).matrix()];
    basis.extend(obs.iter().map(|o| o.matrix()));
    let floor = sol.rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let mut delta = random_hermitian(dim, &mut rng);
        for p in &basis {
            let coeff = (&delta * p).trace() / c(dim as f64);
            delta -= p * coeff;
        }
        let norm = delta.clone().symmetric_eigenvalues().amax();
        delta /= c(norm);
        for eps in [1e-4, 1e-2 * floor, 0.9 * floor] {
            let perturbed = DensityMatrix::new(sol.rho.elements() + &delta * c(eps)).unwrap();
            for (o, t) in obs.iter().zip(targets) {
                assert!((pauli_expectation_exact(&perturbed, o).unwrap() - t).abs() < 1e-9);
            }
            let s = entropy_exact(&perturbed, EntropyOrder::VonNeumann).unwrap();
            assert!(s <= s_me + 1e-6, "perturbation raised entropy {s_me} -> {s}");
        }
    }
}

#[test]
fn gibbs_rejects_bad_inputs() {
    assert!(matches!(
        gibbs_maxent_solve(&paulis(&["XI", "ZI"]), &[0.1, 0.1]),
        Err(Error::NonCommuting { .. })
    ));
    assert!(matches!(gibbs_maxent_solve(&paulis(&["ZI"]), &[1.5]), Err(Error::Infeasible(_))));
}

#[test]
fn trace_distance_is_a_metric_on_samples() {
    let r: Vec<DensityMatrix> = (0..4)
        .map(|s| random_circuit_state(&CircuitSpec::new(4, 3, s)).unwrap().partial_trace(&[0, 1]).unwrap())
        .collect();
    for a in &r {
        assert!(trace_distance(a, a).unwrap() < 1e-12);
        for b in &r {
            let ab = trace_distance(a, b).unwrap();
            assert!((ab - trace_distance(b, a).unwrap()).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&ab));
            for m in &r {
                assert!(ab <= trace_distance(a, m).unwrap() + trace_distance(m, b).unwrap() + 1e-12);
            }
        }
    }
}
