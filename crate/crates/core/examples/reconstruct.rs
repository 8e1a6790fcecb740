//! Generate a target, train a sampled reconstruction and evaluate the checkpoint.
//!
//! `cargo run --release --example reconstruct -- [out_dir] [key=value ...]`

use std::path::PathBuf;

use maxent_rbm::experiment::{cmd_eval, cmd_train, generate_target, ExperimentSpec};

fn main() -> maxent_rbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("maxent-reconstruct"));
    let overrides: Vec<String> = args.collect();
    let spec = ExperimentSpec::default().with_overrides(
        &["optimizer.epochs=300", "optimizer.learning_rate=0.02", "optimizer.final_lr_fraction=0.1",
          "schedule.xi_init=1", "schedule.growth=1.5"]
            .iter().map(|s| s.to_string()).chain(overrides).collect::<Vec<_>>(),
    )?;
    let target = generate_target(&spec)?;
    println!("target S_2 {:.3} bits over {} observables", target.exact_entropy_s2_bits, target.observables.len());

    let summary = cmd_train(&spec, &target, &out)?;
    let report = &summary.runs[0].report;
    for ((o, t), e) in report.observables.iter().zip(&report.targets).zip(&report.expectations) {
        println!("  {o}: target {t:+.4}, model {e:+.4}");
    }
    println!("total residual {:.4}, S_2 {:.3} bits (bound {}), {:.1} ms/epoch",
        report.total_residual, report.s2_bits, report.entropy_upper_bound, 1e3 * report.seconds_per_epoch.unwrap_or(0.0));

    let again = cmd_eval(&out.join("checkpoint.json"), &out.join("target.json"), &spec.sampler)?;
    println!("re-evaluated total residual {:.4}; outputs in {}", again.total_residual, out.display());
    Ok(())
}
