use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use maxent_rbm::dense::{entropy_exact, pauli_expectation_exact, EntropyOrder, PauliString};
use maxent_rbm::estimators::{
    estimate_observable, estimate_renyi_n, estimate_swap, local_estimator, observable_with_gradient,
    vne_from_powers, EstimationMode, ReplicaSource, Source, VnePolynomial,
};
use maxent_rbm::rbm::{exact_density_matrix, Partition, RbmParams, SpinConfig};
use maxent_rbm::samplers::{mh_sample_with, sample_replicas, Proposal, SamplerConfig};

fn instance(seed: u64, n_sys: usize, n_env: usize, std: f64) -> (RbmParams, Partition) {
    let partition = Partition::new(n_sys, n_env).unwrap();
    let params = RbmParams::random(partition.n_visible(), 3, std, &mut ChaCha8Rng::seed_from_u64(seed));
    (params, partition)
}

#[test]
fn exact_replica_traces_are_ordered_and_bounded() {
    for seed in 0..10 {
        let (params, partition) = instance(seed, 3, 2, 0.6);
        let t: Vec<f64> = (2..=5)
            .map(|n| estimate_renyi_n(&params, partition, n, ReplicaSource::ExactSum).unwrap().value)
            .collect();
        let renyi: Vec<f64> = t.iter().zip(2..).map(|(v, n)| -v.log2() / (n as f64 - 1.0)).collect();
        for w in renyi.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "{renyi:?}");
        }
        assert!(renyi[0] <= 2.0 + 1e-12);
        let rho = exact_density_matrix(&params, partition).unwrap();
        assert!(entropy_exact(&rho, EntropyOrder::VonNeumann).unwrap() >= renyi[0] - 1e-12);
    }
}

#[test]
fn entropy_is_capped_by_the_environment() {
    for (n_sys, n_env) in [(3, 1), (2, 3), (4, 2)] {
        for seed in 0..5 {
            let (params, partition) = instance(seed, n_sys, n_env, 1.5);
            let s2 = estimate_swap(&params, partition, ReplicaSource::ExactSum).unwrap().s2_bits;
            assert!(s2 <= n_sys.min(n_env) as f64 + 1e-12, "({n_sys},{n_env}): {s2}");
        }
    }
    let (params, _) = instance(0, 3, 0, 0.5);
    let pure = estimate_swap(&params, Partition::new(3, 0).unwrap(), ReplicaSource::ExactSum).unwrap();
    assert!(pure.s2_bits.abs() < 1e-12);
}

#[test]
fn sampled_observables_are_calibrated() {
    let (params, partition) = instance(3, 3, 2, 0.5);
    let rho = exact_density_matrix(&params, partition).unwrap();
    let obs: Vec<PauliString> = ["XZI", "YYZ", "IZX", "ZII"].iter().map(|s| s.parse().unwrap()).collect();
    let mut within = 0;
    let mut total = 0;
    for seed in 0..20 {
        let config = SamplerConfig { n_samples: 10_000, seed, ..SamplerConfig::default() };
        let (set, _) = mh_sample_with(&params, &config, &Proposal::LocalFlip).unwrap();
        for o in &obs {
            let e = estimate_observable(&params, partition, o, Source::Samples(&set)).unwrap();
            assert_eq!(e.mode, EstimationMode::Sampled);
            assert!(e.std_error > 0.0 && e.autocorr_time >= 1.0 - 1e-12);
            total += 1;
            within += usize::from((e.value - pauli_expectation_exact(&rho, o).unwrap()).abs() <= 3.0 * e.std_error);
        }
    }
    assert!(within as f64 >= 0.95 * total as f64, "{within}/{total}");
}

#[test]
fn sampled_swap_tracks_exact_value() {
    let (params, partition) = instance(8, 3, 2, 0.4);
    let exact = estimate_swap(&params, partition, ReplicaSource::ExactSum).unwrap();
    let config = SamplerConfig { n_samples: 100_000, seed: 2, ..SamplerConfig::default() };
    let streams: Vec<_> =
        sample_replicas(&params, &config, &Proposal::LocalFlip, 3).unwrap().into_iter().map(|(s, _)| s).collect();
    let sampled = estimate_swap(&params, partition, ReplicaSource::Samples(&streams[..2])).unwrap();
    assert!((sampled.s2_bits - exact.s2_bits).abs() <= 4.0 * sampled.s2_std_error);
    let t3 = estimate_renyi_n(&params, partition, 3, ReplicaSource::Samples(&streams)).unwrap();
    let t3_exact = estimate_renyi_n(&params, partition, 3, ReplicaSource::ExactSum).unwrap();
    assert!((t3.value - t3_exact.value).abs() <= 4.0 * t3.std_error);
    assert!(estimate_renyi_n(&params, partition, 3, ReplicaSource::Samples(&streams[..2])).is_err());
}

#[test]
fn local_estimator_of_diagonal_string_is_its_eigenvalue() {
    let (params, partition) = instance(1, 2, 1, 0.5);
    let zz: PauliString = "ZZ".parse().unwrap();
    for (spins, expected) in [([1, 1, -1], 1.0), ([1, -1, 1], -1.0), ([-1, -1, -1], 1.0)] {
        let v = local_estimator(&params, partition, &zz, &SpinConfig::new(spins.to_vec()).unwrap()).unwrap();
        assert!((v.re - expected).abs() < 1e-14 && v.im.abs() < 1e-14);
    }
}

#[test]
fn exact_observable_gradient_is_consistent_with_value() {
    let (params, partition) = instance(6, 2, 2, 0.5);
    let obs: PauliString = "XY".parse().unwrap();
    let vg = observable_with_gradient(&params, partition, &obs, Source::ExactSum).unwrap();
    let plain = estimate_observable(&params, partition, &obs, Source::ExactSum).unwrap();
    assert!((vg.estimate.value - plain.value).abs() < 1e-14);
    assert_eq!(vg.gradient.len(), params.coordinate_count());
}

#[test]
fn vne_polynomial_is_accurate_away_from_zero() {
    let cases: [&[f64]; 4] = [&[0.5, 0.5], &[0.25; 4], &[0.7, 0.1, 0.1, 0.1], &[0.4, 0.3, 0.2, 0.05, 0.05]];
    for eigs in cases {
        let powers: Vec<f64> = (2..=12).map(|p| eigs.iter().map(|l| l.powi(p)).sum()).collect();
        let exact = -eigs.iter().map(|l| l * l.log2()).sum::<f64>();
        assert!((vne_from_powers(&powers, 12).unwrap() - exact).abs() < 1e-2, "{eigs:?}");
    }
    assert!(vne_from_powers(&[0.5], 12).is_err());
    assert!(VnePolynomial::new(1).is_err());
}
