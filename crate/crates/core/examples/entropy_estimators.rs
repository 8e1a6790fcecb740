//! Replica SWAP estimate of S_2 against exact summation, plus the polynomial von Neumann entropy.

use maxent_rbm::dense::{entropy_exact, EntropyOrder};
use maxent_rbm::estimators::{estimate_renyi_n, estimate_swap, vne_from_powers, ReplicaSource};
use maxent_rbm::rbm::{exact_density_matrix, Partition, RbmParams};
use maxent_rbm::samplers::{sample_replicas, Proposal, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> maxent_rbm::Result<()> {
    let partition = Partition::new(3, 2)?;
    let params = RbmParams::random(5, 3, 0.3, &mut ChaCha8Rng::seed_from_u64(11));
    let rho = exact_density_matrix(&params, partition)?;

    let exact = estimate_swap(&params, partition, ReplicaSource::ExactSum)?;
    println!("exact sum: <SWAP> {:.5}, S_2 {:.4} bits; dense oracle S_2 {:.4}",
        exact.swap.value, exact.s2_bits, entropy_exact(&rho, EntropyOrder::Renyi(2))?);

    let config = SamplerConfig { n_samples: 100_000, ..SamplerConfig::default() };
    let streams: Vec<_> = sample_replicas(&params, &config, &Proposal::LocalFlip, 2)?.into_iter().map(|(s, _)| s).collect();
    let sampled = estimate_swap(&params, partition, ReplicaSource::Samples(&streams))?;
    println!("sampled:   <SWAP> {:.5} +- {:.5}, S_2 {:.4} +- {:.4} bits",
        sampled.swap.value, sampled.swap.std_error, sampled.s2_bits, sampled.s2_std_error);

    let cutoff = 12;
    let powers = (2..=cutoff)
        .map(|n| Ok(estimate_renyi_n(&params, partition, n, ReplicaSource::ExactSum)?.value))
        .collect::<maxent_rbm::Result<Vec<f64>>>()?;
    println!("von Neumann: polynomial (n_c = {cutoff}) {:.4} bits, eigendecomposition {:.4} bits",
        vne_from_powers(&powers, cutoff)?, entropy_exact(&rho, EntropyOrder::VonNeumann)?);
    Ok(())
}
