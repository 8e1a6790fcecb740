//! Analytic cost gradient against central differences, a deliberate fault, and a step-size sweep.

use maxent_rbm::optimizer::{gradcheck, h_sweep, EntropyKind, Fault, GradcheckConfig};

fn main() -> maxent_rbm::Result<()> {
    for (n_sys, n_env, m) in [(2, 1, 2), (3, 2, 3)] {
        for entropy in [EntropyKind::Renyi2, EntropyKind::Vne { cutoff: 6 }] {
            let config = GradcheckConfig { n_sys, n_env, n_hidden: m, entropy, ..GradcheckConfig::default() };
            let r = gradcheck(&config)?;
            let w = r.worst.as_ref().expect("coordinates");
            println!("({n_sys},{n_env},{m}) {entropy:?}: passed {} max rel {:.2e}, worst {}", r.passed, r.max_rel_error, w.coordinate);
        }
    }
    let faulty = GradcheckConfig { n_env: 2, fault: Fault::FlipEntropySign, ..GradcheckConfig::default() };
    println!("sign-flipped entropy gradient detected: {}", !gradcheck(&faulty)?.passed);
    for (h, err) in h_sweep(&GradcheckConfig::default(), &[1e-3, 1e-4, 1e-5, 1e-6, 1e-7])? {
        println!("h {h:.0e}: max abs error {err:.2e}");
    }
    Ok(())
}
