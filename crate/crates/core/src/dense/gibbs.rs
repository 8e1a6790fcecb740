//! Exact maximum-entropy state for mutually commuting observables.
//!
//! The state has the Gibbs form `rho = exp(-sum_k lambda_k O_k) / Z`. The
//! multipliers are the minimizer of the convex dual `ln Z(lambda) + lambda . t`,
//! found with a damped Newton iteration whose Hessian is the observable
//! covariance matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::density::DensityMatrix;
use super::{check_dense_size, max_abs_diff, CMatrix, PauliString, DEFAULT_MAX_QUBITS};
use crate::error::{invalid, Error, Result};

const MAX_ITERATIONS: usize = 500;
const CONVERGENCE_TOL: f64 = 1e-10;
const COMMUTATOR_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone)]
pub struct GibbsSolution {
    pub rho: DensityMatrix,
    pub lambdas: Vec<f64>,
    pub iterations: usize,
    pub max_residual: f64,
}

struct Evaluation {
    rho: CMatrix,
    expectations: Vec<f64>,
}

fn evaluate(mats: &[CMatrix], lambdas: &[f64]) -> Evaluation {
    let dim = mats[0].nrows();
    let mut h = CMatrix::zeros(dim, dim);
    for (m, &l) in mats.iter().zip(lambdas) {
        h += m * Complex64::new(l, 0.0);
    }
    // symmetrize against roundoff before the eigensolve
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let shift = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|e| (-(e - shift)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = eig.eigenvectors.clone();
    for (j, w) in weights.iter().enumerate() {
        let f = Complex64::new(w / z, 0.0);
        for i in 0..dim {
            scaled[(i, j)] *= f;
        }
    }
    let rho = &scaled * eig.eigenvectors.adjoint();
    let expectations = mats.iter().map(|m| (&rho * m).trace().re).collect();
    Evaluation { rho, expectations }
}

fn max_residual(expectations: &[f64], targets: &[f64]) -> f64 {
    expectations
        .iter()
        .zip(targets)
        .map(|(e, t)| (e - t).abs())
        .fold(0.0, f64::max)
}

/// Solves for the Gibbs state matching `<O_k> = targets[k]`.
///
/// Fails with [`Error::NonCommuting`] if any pair of observables fails to
/// commute, and with [`Error::Infeasible`] if the targets lie outside the
/// achievable region or the iteration does not converge.
pub fn gibbs_maxent_solve(observables: &[PauliString], targets: &[f64]) -> Result<GibbsSolution> {
    if observables.is_empty() {
        return invalid("at least one observable is required");
    }
    if observables.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: observables.len(),
            actual: targets.len(),
        });
    }
    let n = observables[0].len();
    if let Some(o) = observables.iter().find(|o| o.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: o.len(),
        });
    }
    check_dense_size(n, DEFAULT_MAX_QUBITS)?;

    let mats: Vec<CMatrix> = observables.iter().map(|o| o.matrix()).collect();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let ab = &mats[i] * &mats[j];
            let ba = &mats[j] * &mats[i];
            if max_abs_diff(&ab, &ba) > COMMUTATOR_TOL {
                return Err(Error::NonCommuting {
                    first: observables[i].identifier(),
                    second: observables[j].identifier(),
                });
            }
        }
    }
    if let Some(t) = targets.iter().find(|t| !t.is_finite() || t.abs() > 1.0) {
        return Err(Error::Infeasible(format!("target {t} outside [-1, 1]")));
    }

    let k = mats.len();
    let mut lambdas = vec![0.0; k];
    let mut eval = evaluate(&mats, &lambdas);
    let mut residual = max_residual(&eval.expectations, targets);

    for iteration in 0..MAX_ITERATIONS {
        if residual < CONVERGENCE_TOL {
            let rho = DensityMatrix::from_matrix_unchecked(eval.rho)?;
            return Ok(GibbsSolution {
                rho,
                lambdas,
                iterations: iteration,
                max_residual: residual,
            });
        }
        // Hessian of the dual: covariance Tr(rho O_i O_j) - <O_i><O_j>
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            let rho_oi = &eval.rho * &mats[i];
            for j in i..k {
                let v = (&rho_oi * &mats[j]).trace().re - eval.expectations[i] * eval.expectations[j];
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let r = DVector::from_iterator(
            k,
            eval.expectations.iter().zip(targets).map(|(e, t)| e - t),
        );
        // <O> decreases along +lambda, so the Newton step is +H^-1 r
        let step = hess
            .svd(true, true)
            .solve(&r, 1e-12)
            .map_err(|e| Error::Infeasible(format!("singular covariance: {e}")))?;

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = lambdas
                .iter()
                .zip(step.iter())
                .map(|(l, s)| l + scale * s)
                .collect();
            if trial.iter().all(|v| v.is_finite()) {
                let trial_eval = evaluate(&mats, &trial);
                let trial_residual = max_residual(&trial_eval.expectations, targets);
                if trial_residual.is_finite() && trial_residual < residual {
                    lambdas = trial;
                    eval = trial_eval;
                    residual = trial_residual;
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::Infeasible(format!(
                "Newton iteration stalled at residual {residual:.3e}"
            )));
        }
    }
    Err(Error::Infeasible(format!(
        "no convergence after {MAX_ITERATIONS} iterations (residual {residual:.3e})"
    )))
}
