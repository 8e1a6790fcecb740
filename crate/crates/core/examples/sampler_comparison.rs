//! Acceptance, autocorrelation and distance to the exact distribution for each proposal.
//!
//! `cargo run --release --example sampler_comparison -- [n_samples]`

use maxent_rbm::experiment::{cmd_bench_sampler, BenchSpec};

fn main() -> maxent_rbm::Result<()> {
    let mut spec = BenchSpec::default();
    if let Some(n) = std::env::args().nth(1) {
        spec.sampler.n_samples = n.parse().expect("sample count");
    }
    for (label, std) in [("random", 0.3), ("peaked", 1.2)] {
        spec.param_std = std;
        let report = cmd_bench_sampler(&spec)?;
        println!("{label} RBM, n_v = {}, surrogate residual {:.3?}", report.n_visible, report.surrogate_residual);
        for d in &report.diagnostics {
            println!(
                "  {:<18} acceptance {:.3}  tau {:6.2}  TV {:.4}",
                d.proposal.name(),
                d.acceptance_rate,
                d.autocorr_time,
                d.tv_distance_if_exact_available.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
