//! Reduced density matrix of an RBM purification, amplitudes and log-derivatives.

use maxent_rbm::dense::{entropy_exact, EntropyOrder};
use maxent_rbm::rbm::{exact_density_matrix, log_amplitude, log_derivatives, Partition, RbmParams, SpinConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> maxent_rbm::Result<()> {
    let partition = Partition::new(2, 2)?;
    let params = RbmParams::random(partition.n_visible(), 3, 0.4, &mut ChaCha8Rng::seed_from_u64(3));
    let v = SpinConfig::new(vec![1, -1, -1, 1])?;
    println!("log psi{:?} = {:.5}", v.spins(), log_amplitude(&params, &v)?);
    let derivs: Vec<String> = log_derivatives(&params, v.spins()).iter().take(4).map(|d| format!("{d:.3}")).collect();
    println!("{} packed coordinates, first log-derivatives [{}]", params.coordinate_count(), derivs.join(", "));

    let rho = exact_density_matrix(&params, partition)?;
    rho.validate()?;
    println!("rho: trace {:.6}, eigenvalues {:.4?}", rho.trace().re, rho.eigenvalues());
    println!("S_2 = {:.4} bits (bound {} bits)", entropy_exact(&rho, EntropyOrder::Renyi(2))?, partition.n_sys.min(partition.n_env));

    let pure = exact_density_matrix(&RbmParams::random(2, 2, 0.4, &mut ChaCha8Rng::seed_from_u64(4)), Partition::new(2, 0)?)?;
    println!("no environment: purity {:.12}", pure.purity());
    Ok(())
}
