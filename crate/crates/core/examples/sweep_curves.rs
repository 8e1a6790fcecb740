//! Ten-run sweep at 6 system qubits, 4 environment units, 4 hidden units and 6 observables,
//! writing the median cost curve to curves.csv.
//!
//! `cargo run --release --example sweep_curves -- [out_dir] [key=value ...]`

use std::path::PathBuf;

use maxent_rbm::experiment::{cmd_train, generate_target, ExperimentSpec};

fn main() -> maxent_rbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("maxent-sweep"));
    let mut settings: Vec<String> = ["n_sys=6", "n_env_target=4", "n_env_model=4", "n_hidden=4", "n_observables=6",
        "runs=10", "optimizer.epochs=100"].iter().map(|s| s.to_string()).collect();
    settings.extend(args);
    let spec = ExperimentSpec::default().with_overrides(&settings)?;
    let target = generate_target(&spec)?;
    let summary = cmd_train(&spec, &target, &out)?;
    for p in summary.curve.iter().step_by((summary.curve.len() / 10).max(1)) {
        println!("epoch {:4}: median cost {:+.4}, S_2 {:.3}, residual {:.3}", p.epoch, p.cost, p.entropy_bits, p.total_residual);
    }
    println!("median cost: first {:+.4}, final {:+.4}", summary.sweep.median_first_cost, summary.sweep.median_final_cost);
    println!("curves written to {}", out.join("curves.csv").display());
    Ok(())
}
