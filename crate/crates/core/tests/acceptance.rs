//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use maxent_rbm::dense::{
    entropy_exact, gibbs_maxent_solve, haar_unitary, pauli_expectation_exact, random_circuit_state,
    random_pauli_strings, trace_distance, trace_of_power, CircuitSpec, DensityMatrix, EntropyOrder, Pauli,
    PartialTrace, PauliString,
};
use maxent_rbm::estimators::{
    estimate_observable, estimate_renyi_n, estimate_swap, vne_from_powers, ReplicaSource, Source,
};
use maxent_rbm::experiment::{
    cmd_bench_sampler, cmd_eval, cmd_train, generate_target, read_curves, run_once, BenchSpec, ExperimentSpec,
    ReportRecord,
};
use maxent_rbm::optimizer::{gradcheck, train, ConstraintSet, GradcheckConfig, OptimizerConfig, XiSchedule};
use maxent_rbm::rbm::{exact_density_matrix, AmplitudeTable, Partition, RbmParams};
use maxent_rbm::samplers::{
    fit_surrogate, mh_sample_with, sample_replicas, transition_matrix, Proposal, ProposalKind, SamplerConfig,
};
use maxent_rbm::Result;

struct Outcome {
    passed: bool,
    detail: String,
    /// Entropies and bounds of every checkpoint trained by this criterion.
    trained: Vec<(f64, f64)>,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail, trained: Vec::new() }
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn gradient_correctness() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for (n_sys, n_env, n_hidden) in [(2, 1, 2), (3, 2, 3)] {
        for seed in 0..20 {
            let config = GradcheckConfig { n_sys, n_env, n_hidden, seed, h: 1e-5, ..GradcheckConfig::default() };
            let r = gradcheck(&config)?;
            worst = worst.max(r.max_rel_error);
            count += 1;
            if !r.passed {
                failures.push(format!("({n_sys},{n_env},{n_hidden}) seed {seed}"));
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        failures.is_empty() && within(elapsed, 60),
        format!("{count} instances, max rel err {worst:.2e}, failures {failures:?}, {:.1}s", elapsed.as_secs_f64()),
    ))
}

fn estimator_oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n_v = rng.random_range(2..=8);
        let n_sys = rng.random_range(1..n_v);
        let partition = Partition::new(n_sys, n_v - n_sys)?;
        let params = RbmParams::random(n_v, rng.random_range(1..=4), 0.4, &mut rng);
        let rho = exact_density_matrix(&params, partition)?;
        let obs = &random_pauli_strings(n_sys, 1, &mut rng)?[0];
        let o = estimate_observable(&params, partition, obs, Source::ExactSum)?.value;
        let swap = estimate_swap(&params, partition, ReplicaSource::ExactSum)?.swap.value;
        let t3 = estimate_renyi_n(&params, partition, 3, ReplicaSource::ExactSum)?.value;
        worst = worst
            .max((o - pauli_expectation_exact(&rho, obs)?).abs())
            .max((swap - trace_of_power(&rho, 2)).abs())
            .max((t3 - trace_of_power(&rho, 3)).abs());
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst < 1e-10 && within(elapsed, 60),
        format!("50 instances, max deviation {worst:.2e}, {:.1}s", elapsed.as_secs_f64()),
    ))
}

fn sampling_calibration() -> Result<Outcome> {
    let start = Instant::now();
    let partition = Partition::new(3, 2)?;
    let hits: Vec<(bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + trial);
            let params = RbmParams::random(5, 3, 0.4, &mut rng);
            let obs = &random_pauli_strings(3, 1, &mut rng)?[0];
            let rho = exact_density_matrix(&params, partition)?;

            let obs_config = SamplerConfig { n_samples: 10_000, seed: 3000 + trial, ..SamplerConfig::default() };
            let (set, _) = mh_sample_with(&params, &obs_config, &Proposal::LocalFlip)?;
            let est = estimate_observable(&params, partition, obs, Source::Samples(&set))?;
            let obs_ok = (est.value - pauli_expectation_exact(&rho, obs)?).abs() <= 3.0 * est.std_error;

            let s2_config = SamplerConfig { n_samples: 100_000, seed: 4000 + trial, ..SamplerConfig::default() };
            let streams: Vec<_> =
                sample_replicas(&params, &s2_config, &Proposal::LocalFlip, 2)?.into_iter().map(|(s, _)| s).collect();
            let s2 = estimate_swap(&params, partition, ReplicaSource::Samples(&streams))?;
            let s2_ok = (s2.s2_bits - entropy_exact(&rho, EntropyOrder::Renyi(2))?).abs() <= 3.0 * s2.s2_std_error;
            Ok((obs_ok, s2_ok))
        })
        .collect::<Result<_>>()?;
    let obs_hits = hits.iter().filter(|h| h.0).count();
    let s2_hits = hits.iter().filter(|h| h.1).count();
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        obs_hits >= 99 && s2_hits >= 99 && within(elapsed, 600),
        format!("<O> within 3 SE in {obs_hits}/100, S_2 in {s2_hits}/100, {:.1}s", elapsed.as_secs_f64()),
    ))
}

fn detailed_balance_residual(params: &RbmParams, proposal: &Proposal) -> Result<f64> {
    let t = transition_matrix(params, proposal)?;
    let p = AmplitudeTable::new(params)?.probabilities();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        for j in 0..p.len() {
            worst = worst.max((p[i] * t[(i, j)] - p[j] * t[(j, i)]).abs());
        }
    }
    Ok(worst)
}

fn sampler_stationarity() -> Result<Outcome> {
    let start = Instant::now();
    let bench = cmd_bench_sampler(&BenchSpec::default())?;
    let tvs: Vec<(ProposalKind, f64)> = bench
        .diagnostics
        .iter()
        .map(|d| (d.proposal, d.tv_distance_if_exact_available.unwrap_or(f64::INFINITY)))
        .collect();
    let mut balance = 0.0f64;
    for n in 2..=4 {
        let params = RbmParams::random(n, 3, 0.6, &mut ChaCha8Rng::seed_from_u64(n as u64));
        let batch: Vec<_> = maxent_rbm::rbm::SpinConfig::enumerate(n).collect();
        let fit = fit_surrogate(&params, &batch, Default::default())?;
        for kind in ProposalKind::ALL {
            let proposal = Proposal::build(kind, (kind == ProposalKind::SurrogateTrotter).then_some(&fit.surrogate))?;
            balance = balance.max(detailed_balance_residual(&params, &proposal)?);
        }
    }
    let elapsed = start.elapsed();
    let tv_ok = tvs.len() == 3 && tvs.iter().all(|(_, tv)| *tv < 0.02);
    let shown: Vec<String> = tvs.iter().map(|(k, tv)| format!("{} {tv:.4}", k.name())).collect();
    Ok(Outcome::new(
        tv_ok && balance < 1e-9 && within(elapsed, 300),
        format!(
            "TV at n_v = 6 [{}], detailed-balance residual {balance:.1e}, {:.1}s",
            shown.join(", "),
            elapsed.as_secs_f64()
        ),
    ))
}

fn reconstruction_spec(seed: u64) -> Result<ExperimentSpec> {
    ExperimentSpec::default().with_overrides(&[
        format!("circuit_seed={seed}"),
        format!("observable_seed={seed}"),
        format!("optimizer.seed={seed}"),
        "optimizer.epochs=400".into(),
        "optimizer.learning_rate=0.02".into(),
        "optimizer.final_lr_fraction=0.1".into(),
        "schedule.xi_init=1".into(),
        "schedule.growth=1.5".into(),
    ])
}

fn reconstruction_quality() -> Result<Outcome> {
    let start = Instant::now();
    let reports: Vec<ReportRecord> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let spec = reconstruction_spec(seed)?;
            Ok(run_once(&spec, &generate_target(&spec)?, 0)?.report)
        })
        .collect::<Result<_>>()?;
    let good = reports.iter().filter(|r| r.total_residual < 0.3 && r.max_residual < 0.1).count();
    let totals: Vec<String> = reports.iter().map(|r| format!("{:.3}", r.total_residual)).collect();
    let elapsed = start.elapsed();
    let mut outcome = Outcome::new(
        good >= 8 && within(elapsed, 1200),
        format!("{good}/10 seeds within tolerance, totals [{}], {:.1}s", totals.join(", "), elapsed.as_secs_f64()),
    );
    outcome.trained = reports.iter().map(|r| (r.s2_bits, r.entropy_upper_bound)).collect();
    Ok(outcome)
}

fn diagonal_strings(seed: u64) -> Vec<PauliString> {
    let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
    let mut out: Vec<PauliString> = Vec::new();
    while out.len() < 3 {
        let letters = (0..3).map(|_| if rng.random_bool(0.5) { Pauli::Z } else { Pauli::I }).collect();
        let p = PauliString::new(letters).expect("three letters");
        if !p.is_identity() && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn maxent_fidelity() -> Result<Outcome> {
    let start = Instant::now();
    let partition = Partition::new(3, 3)?;
    let schedule = XiSchedule { xi_init: 1.0, growth: 1.5, xi_max: 20.0, ..XiSchedule::default() };
    let results: Vec<(f64, f64, f64)> = (0..3u64)
        .into_par_iter()
        .map(|seed| {
            let observables = diagonal_strings(seed);
            let reduced = random_circuit_state(&CircuitSpec::new(6, 4, seed))?.partial_trace(&[0, 1, 2])?;
            let targets =
                observables.iter().map(|o| pauli_expectation_exact(&reduced, o)).collect::<Result<Vec<f64>>>()?;
            let gibbs = gibbs_maxent_solve(&observables, &targets)?;
            let constraints = ConstraintSet::uniform(&observables, &targets, schedule.xi_init)?;
            let opt = OptimizerConfig {
                epochs: 600,
                learning_rate: 0.02,
                final_lr_fraction: 0.1,
                samples_per_epoch: 4000,
                seed,
                ..OptimizerConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let initial = RbmParams::random(6, 3, opt.init_std, &mut rng);
            let outcome = train(&initial, partition, &constraints, &schedule, &opt, &SamplerConfig::default())?;
            let rho = exact_density_matrix(&outcome.params, partition)?;
            let s2_model = entropy_exact(&rho, EntropyOrder::Renyi(2))?;
            let s2_gibbs = entropy_exact(&gibbs.rho, EntropyOrder::Renyi(2))?;
            Ok((trace_distance(&rho, &gibbs.rho)?, (s2_model - s2_gibbs).abs(), s2_model))
        })
        .collect::<Result<_>>()?;
    let ok = results.iter().all(|(td, gap, _)| *td < 0.1 && *gap < 0.2);
    let shown: Vec<String> = results.iter().map(|(td, gap, _)| format!("td {td:.3} gap {gap:.3}")).collect();
    let elapsed = start.elapsed();
    let mut outcome = Outcome::new(
        ok && within(elapsed, 900),
        format!("{} instances: [{}], {:.1}s", results.len(), shown.join("; "), elapsed.as_secs_f64()),
    );
    outcome.trained = results.iter().map(|r| (r.2, 3.0)).collect();
    Ok(outcome)
}

fn vne_polynomial() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = if seed % 2 == 0 { 2 } else { 3 };
        let dim = 1usize << n;
        let floor = 0.021;
        let weights: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let eigs: Vec<f64> = weights.iter().map(|w| floor + (1.0 - floor * dim as f64) * w / total).collect();
        let u = haar_unitary(dim, &mut rng);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            eigs.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        let rho = DensityMatrix::new(&u * diag * u.adjoint())?;
        let powers: Vec<f64> = (2..=12).map(|p| trace_of_power(&rho, p)).collect();
        let poly = vne_from_powers(&powers, 12)?;
        worst = worst.max((poly - entropy_exact(&rho, EntropyOrder::VonNeumann)?).abs());
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst < 1e-2 && within(elapsed, 60),
        format!("50 matrices, max error {worst:.2e} bits, {:.1}s", elapsed.as_secs_f64()),
    ))
}

fn six_qubit_sweep() -> Result<Outcome> {
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let spec = ExperimentSpec::default().with_overrides(&[
        "n_sys=6",
        "n_env_target=4",
        "n_env_model=4",
        "n_hidden=4",
        "n_observables=6",
        "runs=10",
        "optimizer.epochs=100",
    ])?;
    let summary = cmd_train(&spec, &generate_target(&spec)?, dir.path())?;
    let curve = read_curves(&dir.path().join("curves.csv"))?;
    let sweep = &summary.sweep;
    let elapsed = start.elapsed();
    let mut outcome = Outcome::new(
        summary.halted().is_none()
            && summary.runs.len() == 10
            && curve.len() == spec.optimizer.epochs
            && sweep.median_final_cost < sweep.median_first_cost
            && within(elapsed, 7200),
        format!(
            "10 runs, median cost {:.4} -> {:.4}, curves.csv has {} epochs, {:.1}s",
            sweep.median_first_cost,
            sweep.median_final_cost,
            curve.len(),
            elapsed.as_secs_f64()
        ),
    );
    outcome.trained = summary.runs.iter().map(|r| (r.report.s2_bits, r.report.entropy_upper_bound)).collect();
    Ok(outcome)
}

fn entropy_bound(trained: &[(f64, f64)]) -> Result<Outcome> {
    let worst = trained.iter().map(|(s2, bound)| s2 - bound).fold(f64::NEG_INFINITY, f64::max);
    let dir = tempfile::tempdir()?;
    let spec = ExperimentSpec::default();
    let partition = Partition::new(spec.n_sys, spec.n_env_model)?;
    let checkpoint = dir.path().join("zero.json");
    RbmParams::zeros(partition.n_visible(), spec.n_hidden).to_checkpoint(partition)?.write(&checkpoint)?;
    let target = dir.path().join("target.json");
    generate_target(&spec)?.write(&target)?;
    let zero = cmd_eval(&checkpoint, &target, &spec.sampler)?;
    let zero_ok = zero.s2_bits.abs() < 1e-6 && zero.s2_sampled_bits.abs() < 1e-6;
    Ok(Outcome::new(
        !trained.is_empty() && worst <= 0.05 && zero_ok,
        format!(
            "{} checkpoints, max S_2 - bound {worst:+.3} bits, zero checkpoint S_2 {:.1e} (sampled {:.1e})",
            trained.len(),
            zero.s2_bits,
            zero.s2_sampled_bits
        ),
    ))
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Outcome>;
    let checks: [(usize, &str, Check); 8] = [
        (1, "gradient correctness", gradient_correctness),
        (2, "estimator-oracle equivalence", estimator_oracle_equivalence),
        (3, "sampling calibration", sampling_calibration),
        (4, "sampler stationarity", sampler_stationarity),
        (5, "reconstruction quality", reconstruction_quality),
        (6, "maxent fidelity vs Gibbs oracle", maxent_fidelity),
        (8, "von Neumann polynomial", vne_polynomial),
        (9, "six-qubit sweep", six_qubit_sweep),
    ];
    let mut all_passed = true;
    let mut trained = Vec::new();
    let mut report = |id: usize, name: &str, result: Result<Outcome>| {
        let outcome = result.unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        all_passed &= outcome.passed;
        println!("criterion {id} ({name}): {} - {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.detail);
        outcome.trained
    };
    for (id, name, check) in checks {
        trained.extend(report(id, name, check()));
    }
    report(7, "entropy upper bound", entropy_bound(&trained));
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
