//! Exact maximum-entropy state for commuting constraints.

use maxent_rbm::dense::{entropy_exact, pauli_expectation_exact, gibbs_maxent_solve, EntropyOrder, PauliString};

fn main() -> maxent_rbm::Result<()> {
    let observables: Vec<PauliString> = ["ZII", "ZZI", "IZZ"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let targets = [0.4, -0.2, 0.3];
    let sol = gibbs_maxent_solve(&observables, &targets)?;
    println!("converged in {} iterations, max residual {:.2e}", sol.iterations, sol.max_residual);
    for ((o, t), l) in observables.iter().zip(targets).zip(&sol.lambdas) {
        println!("{o}: target {t:+.3}, achieved {:+.6}, lambda {l:+.4}", pauli_expectation_exact(&sol.rho, o)?);
    }
    println!("S_vN = {:.4} bits, S_2 = {:.4} bits",
        entropy_exact(&sol.rho, EntropyOrder::VonNeumann)?,
        entropy_exact(&sol.rho, EntropyOrder::Renyi(2))?);

    let noncommuting: Vec<PauliString> = vec!["XI".parse()?, "ZI".parse()?];
    println!("non-commuting set: {}", gibbs_maxent_solve(&noncommuting, &[0.1, 0.1]).unwrap_err());
    Ok(())
}
