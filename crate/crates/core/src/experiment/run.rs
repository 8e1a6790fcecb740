use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentSpec;
use crate::dense::{
    entropy_exact, pauli_expectation_exact, random_circuit_state, random_pauli_strings, CircuitSpec, EntropyOrder,
    ObservableTarget, PartialTrace, TargetDocument,
};
use crate::error::{Error, Result};
use crate::estimators::{estimate_observable, estimate_swap, EstimationMode, ReplicaSource, Source};
use crate::optimizer::{train, ConstraintSet, EpochRecord, TrainingOutcome, TrainingStatus};
use crate::rbm::{exact_density_matrix, Partition, RbmCheckpoint, RbmParams};
use crate::samplers::{sample_replicas, Proposal, ProposalKind, SamplerConfig};
use crate::stats::{derive_seed, median};

/// Largest visible-unit count evaluated by exact summation.
pub const EXACT_EVAL_MAX_VISIBLE: usize = 12;

/// Reduces a random circuit state to the system qubits and records exact
/// expectations of random Pauli strings together with the exact entropies.
pub fn generate_target(spec: &ExperimentSpec) -> Result<TargetDocument> {
    spec.validate()?;
    let circuit = CircuitSpec::new(spec.n_sys + spec.n_env_target, spec.circuit_layers, spec.circuit_seed);
    let state = random_circuit_state(&circuit)?;
    let rho = state.partial_trace(&(0..spec.n_sys).collect::<Vec<_>>())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.observable_seed);
    let observables = random_pauli_strings(spec.n_sys, spec.n_observables, &mut rng)?
        .into_iter()
        .map(|pauli| {
            let target = pauli_expectation_exact(&rho, &pauli)?.clamp(-1.0, 1.0);
            Ok(ObservableTarget { pauli, target })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TargetDocument {
        system_qubits: spec.n_sys,
        env_qubits: spec.n_env_target,
        circuit_seed: spec.circuit_seed,
        layers: spec.circuit_layers,
        observables,
        exact_entropy_s2_bits: entropy_exact(&rho, EntropyOrder::Renyi(2))?,
        exact_entropy_vne_bits: Some(entropy_exact(&rho, EntropyOrder::VonNeumann)?),
    })
}

/// Final-state summary of a checkpoint against a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub observables: Vec<String>,
    pub targets: Vec<f64>,
    pub expectations: Vec<f64>,
    /// `|<O_i> - target_i|`.
    pub residuals: Vec<f64>,
    pub total_residual: f64,
    pub max_residual: f64,
    pub expectation_mode: EstimationMode,
    /// Exact value when available, sampled otherwise.
    pub s2_bits: f64,
    pub s2_sampled_bits: f64,
    pub s2_sampled_std_error: f64,
    pub s2_exact_bits: Option<f64>,
    pub vne_exact_bits: Option<f64>,
    pub target_s2_bits: f64,
    /// `min(n_sys, n_env_model)`.
    pub entropy_upper_bound: f64,
    pub within_bound: bool,
    /// The model has no environment units, so its state is pure and `S_2 = 0`.
    pub pure_ansatz: bool,
    pub epochs_completed: Option<usize>,
    pub seconds_per_epoch: Option<f64>,
    pub status: Option<TrainingStatus>,
}

/// Slack allowed above the entropy bound for sampled values.
pub const ENTROPY_BOUND_SLACK: f64 = 0.05;

/// Recomputes expectations and entropies of `params`. Exact summation and the
/// dense oracle are used when the model has at most [`EXACT_EVAL_MAX_VISIBLE`]
/// visible units; the sampled `S_2` is always reported.
pub fn evaluate(
    params: &RbmParams,
    partition: Partition,
    target: &TargetDocument,
    sampler: &SamplerConfig,
) -> Result<ReportRecord> {
    if target.system_qubits != partition.n_sys {
        return Err(Error::DimensionMismatch {
            expected: partition.n_sys,
            actual: target.system_qubits,
        });
    }
    if params.n_visible() != partition.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: partition.n_visible(),
            actual: params.n_visible(),
        });
    }
    params.validate()?;
    let exact = partition.n_visible() <= EXACT_EVAL_MAX_VISIBLE;
    let proposal = match sampler.proposal {
        ProposalKind::SurrogateTrotter => Proposal::LocalFlip,
        other => Proposal::build(other, None)?,
    };
    let streams: Vec<_> = sample_replicas(params, sampler, &proposal, 2)?.into_iter().map(|(s, _)| s).collect();
    let source = if exact { Source::ExactSum } else { Source::Samples(&streams[0]) };
    let expectations = target
        .observables
        .iter()
        .map(|o| Ok(estimate_observable(params, partition, &o.pauli, source)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let residuals: Vec<f64> = expectations.iter().zip(&target.observables).map(|(e, o)| (e - o.target).abs()).collect();
    let swap = estimate_swap(params, partition, ReplicaSource::Samples(&streams))?;
    let (s2_exact, vne_exact) = if exact {
        let rho = exact_density_matrix(params, partition)?;
        (
            Some(entropy_exact(&rho, EntropyOrder::Renyi(2))?.max(0.0)),
            Some(entropy_exact(&rho, EntropyOrder::VonNeumann)?.max(0.0)),
        )
    } else {
        (None, None)
    };
    let s2_bits = s2_exact.unwrap_or(swap.s2_bits);
    let bound = partition.n_sys.min(partition.n_env) as f64;
    Ok(ReportRecord {
        observables: target.observables.iter().map(|o| o.pauli.identifier()).collect(),
        targets: target.targets(),
        expectations,
        total_residual: residuals.iter().sum(),
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
        expectation_mode: if exact { EstimationMode::ExactSum } else { EstimationMode::Sampled },
        s2_bits,
        s2_sampled_bits: swap.s2_bits,
        s2_sampled_std_error: swap.s2_std_error,
        s2_exact_bits: s2_exact,
        vne_exact_bits: vne_exact,
        target_s2_bits: target.exact_entropy_s2_bits,
        entropy_upper_bound: bound,
        within_bound: s2_bits <= bound + ENTROPY_BOUND_SLACK,
        pure_ansatz: partition.n_env == 0,
        epochs_completed: None,
        seconds_per_epoch: None,
        status: None,
    })
}

/// Result of one training run within a sweep.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub index: usize,
    pub seed: u64,
    pub outcome: TrainingOutcome,
    pub report: ReportRecord,
}

/// Seed of run `index`: the optimizer seed itself for a single run, derived otherwise.
pub fn run_seed(spec: &ExperimentSpec, index: usize) -> u64 {
    if spec.runs == 1 {
        spec.optimizer.seed
    } else {
        derive_seed(spec.optimizer.seed, index as u64)
    }
}

pub fn model_partition(spec: &ExperimentSpec) -> Result<Partition> {
    Partition::new(spec.n_sys, spec.n_env_model)
}

pub fn constraints_from_target(spec: &ExperimentSpec, target: &TargetDocument) -> Result<ConstraintSet> {
    ConstraintSet::uniform(&target.paulis(), &target.targets(), spec.schedule.xi_init)
}

/// Trains one model from its seeded initialization and evaluates the result.
pub fn run_once(spec: &ExperimentSpec, target: &TargetDocument, index: usize) -> Result<RunResult> {
    let partition = model_partition(spec)?;
    if target.system_qubits != spec.n_sys {
        return Err(Error::DimensionMismatch {
            expected: spec.n_sys,
            actual: target.system_qubits,
        });
    }
    let constraints = constraints_from_target(spec, target)?;
    let seed = run_seed(spec, index);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    let initial = RbmParams::random(partition.n_visible(), spec.n_hidden, spec.optimizer.init_std, &mut rng);
    let opt = crate::optimizer::OptimizerConfig { seed, ..spec.optimizer };
    let start = Instant::now();
    let outcome = train(&initial, partition, &constraints, &spec.schedule, &opt, &spec.sampler)?;
    let elapsed = start.elapsed().as_secs_f64();
    let eval_sampler = SamplerConfig {
        seed: derive_seed(seed, u64::MAX - 1),
        ..spec.sampler
    };
    let mut report = evaluate(&outcome.params, partition, target, &eval_sampler)?;
    let n = outcome.trace.records.len();
    report.epochs_completed = Some(n);
    report.seconds_per_epoch = (n > 0).then(|| elapsed / n as f64);
    report.status = Some(outcome.trace.status.clone());
    Ok(RunResult {
        index,
        seed,
        outcome,
        report,
    })
}

/// Point of the per-epoch median curve over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epoch: usize,
    pub cost: f64,
    pub entropy_bits: f64,
    pub total_residual: f64,
}

/// Per-epoch medians over every run that reached the epoch.
pub fn median_curve(traces: &[&[EpochRecord]]) -> Vec<CurvePoint> {
    let longest = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    (0..longest)
        .map(|epoch| {
            let at: Vec<&EpochRecord> = traces.iter().filter_map(|t| t.get(epoch)).collect();
            let med = |f: fn(&EpochRecord) -> f64| median(&at.iter().map(|r| f(r)).collect::<Vec<_>>());
            CurvePoint {
                epoch,
                cost: med(|r| r.cost),
                entropy_bits: med(|r| r.entropy_bits),
                total_residual: med(|r| r.total_residual),
            }
        })
        .collect()
}

pub fn write_curves(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for p in curve {
        w.serialize(p).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Aggregate written to `report.json` of a sweep directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<ReportRecord>,
    pub seeds: Vec<u64>,
    pub median_final_cost: f64,
    pub median_first_cost: f64,
    pub median_total_residual: f64,
}

/// Output of [`cmd_train`].
#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub output_dir: PathBuf,
    pub runs: Vec<RunResult>,
    pub curve: Vec<CurvePoint>,
    pub sweep: SweepReport,
}

impl TrainSummary {
    /// First halted run, if any.
    pub fn halted(&self) -> Option<&RunResult> {
        self.runs.iter().find(|r| !r.outcome.trace.is_complete())
    }
}

fn write_run(dir: &Path, run: &RunResult, partition: Partition) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.outcome.trace.write_jsonl(&dir.join("trace.jsonl"))?;
    run.outcome.params.to_checkpoint(partition)?.write(&dir.join("checkpoint.json"))?;
    write_json(&dir.join("report.json"), &run.report)?;
    let single: &[EpochRecord] = &run.outcome.trace.records;
    write_curves(&dir.join("curves.csv"), &median_curve(&[single]))
}

/// Trains `spec.runs` models in parallel and writes
/// `spec.json`, `target.json`, `trace.jsonl`, `checkpoint.json`, `report.json`
/// and `curves.csv` under `out`. With several runs each run gets its own
/// `run-NN` subdirectory and the top-level files hold the sweep aggregate.
/// Halted runs still write their partial outputs.
pub fn cmd_train(spec: &ExperimentSpec, target: &TargetDocument, out: &Path) -> Result<TrainSummary> {
    spec.validate()?;
    target.validate()?;
    let partition = model_partition(spec)?;
    fs::create_dir_all(out)?;
    spec.write(&out.join("spec.json"))?;
    target.write(&out.join("target.json"))?;
    let runs: Vec<RunResult> = (0..spec.runs)
        .into_par_iter()
        .map(|i| run_once(spec, target, i))
        .collect::<Result<_>>()?;
    for run in &runs {
        let dir = if spec.runs == 1 { out.to_path_buf() } else { out.join(format!("run-{:02}", run.index)) };
        write_run(&dir, run, partition)?;
    }
    let traces: Vec<&[EpochRecord]> = runs.iter().map(|r| r.outcome.trace.records.as_slice()).collect();
    let curve = median_curve(&traces);
    let finals: Vec<f64> = traces.iter().filter_map(|t| t.last()).map(|r| r.cost).collect();
    let firsts: Vec<f64> = traces.iter().filter_map(|t| t.first()).map(|r| r.cost).collect();
    let sweep = SweepReport {
        runs: runs.iter().map(|r| r.report.clone()).collect(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        median_final_cost: median(&finals),
        median_first_cost: median(&firsts),
        median_total_residual: median(&runs.iter().map(|r| r.report.total_residual).collect::<Vec<_>>()),
    };
    if spec.runs > 1 {
        write_curves(&out.join("curves.csv"), &curve)?;
        write_json(&out.join("report.json"), &sweep)?;
    }
    Ok(TrainSummary {
        output_dir: out.to_path_buf(),
        runs,
        curve,
        sweep,
    })
}

/// Generates the target for `spec` and writes it to `path`.
pub fn cmd_gen_target(spec: &ExperimentSpec, path: &Path) -> Result<TargetDocument> {
    let doc = generate_target(spec)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    doc.write(path)?;
    Ok(doc)
}

/// Reads a checkpoint and a target and evaluates the checkpoint.
pub fn cmd_eval(checkpoint: &Path, target: &Path, sampler: &SamplerConfig) -> Result<ReportRecord> {
    let (params, partition) = RbmCheckpoint::read(checkpoint)?.into_params()?;
    let target = TargetDocument::read(target)?;
    evaluate(&params, partition, &target, sampler)
}
