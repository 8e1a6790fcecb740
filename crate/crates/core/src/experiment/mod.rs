//! Experiment orchestration: target generation, training sweeps, checkpoint
//! evaluation and sampler benchmarks, with a fixed on-disk layout.

mod bench;
mod run;
mod spec;

pub use bench::{cmd_bench_sampler, BenchReport, BenchSpec};
pub use run::{
    cmd_eval, cmd_gen_target, cmd_train, constraints_from_target, evaluate, generate_target, median_curve,
    model_partition, read_curves, run_once, run_seed, write_curves, CurvePoint, ReportRecord, RunResult,
    SweepReport, TrainSummary, ENTROPY_BOUND_SLACK, EXACT_EVAL_MAX_VISIBLE,
};
pub use spec::{apply_overrides, ExperimentSpec, MAX_MODEL_ENV, OUTPUT_ENV_VAR};
