use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gradient::{evaluate_cost, exact_cost, finite_difference_gradient, EntropyKind};
use super::ConstraintSet;
use crate::dense::random_pauli_strings;
use crate::error::Result;
use crate::rbm::{ParamCoord, Partition, RbmParams};

/// Deliberate corruption of the analytic gradient, used to confirm the check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    #[default]
    None,
    FlipEntropySign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GradcheckConfig {
    pub n_sys: usize,
    pub n_env: usize,
    pub n_hidden: usize,
    pub n_constraints: usize,
    pub seed: u64,
    pub h: f64,
    pub rel_tol: f64,
    /// Tolerance for coordinates whose reference magnitude is below this value.
    pub abs_tol: f64,
    pub init_std: f64,
    pub entropy: EntropyKind,
    pub fault: Fault,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            n_sys: 2,
            n_env: 1,
            n_hidden: 2,
            n_constraints: 2,
            seed: 0,
            h: 1e-5,
            rel_tol: 1e-5,
            abs_tol: 1e-8,
            init_std: 0.5,
            entropy: EntropyKind::Renyi2,
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateError {
    pub index: usize,
    pub coordinate: String,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub passed: bool,
    pub n_coordinates: usize,
    /// Largest relative error over coordinates with reference magnitude at least `abs_tol`.
    pub max_rel_error: f64,
    /// Largest absolute error over the remaining coordinates.
    pub max_abs_error_small: f64,
    /// Coordinate with the largest error relative to its tolerance.
    pub worst: Option<CoordinateError>,
    pub h: f64,
}

/// Random parameters, constraints and penalty weights for a check instance.
pub struct GradcheckInstance {
    pub params: RbmParams,
    pub partition: Partition,
    pub constraints: ConstraintSet,
    pub xis: Vec<f64>,
}

impl GradcheckInstance {
    pub fn generate(config: &GradcheckConfig) -> Result<Self> {
        let partition = Partition::new(config.n_sys, config.n_env)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = RbmParams::random(partition.n_visible(), config.n_hidden, config.init_std, &mut rng);
        let obs = random_pauli_strings(config.n_sys, config.n_constraints, &mut rng)?;
        let targets: Vec<f64> = obs.iter().map(|_| rng.random_range(-0.8..0.8)).collect();
        let constraints = ConstraintSet::uniform(&obs, &targets, 1.0)?;
        let xis = obs.iter().map(|_| rng.random_range(0.5..5.0)).collect();
        Ok(Self {
            params,
            partition,
            constraints,
            xis,
        })
    }

    /// Analytic cost gradient in exact mode, with `fault` applied.
    pub fn analytic_gradient(&self, kind: EntropyKind, fault: Fault) -> Result<Vec<f64>> {
        let full = evaluate_cost(&self.params, self.partition, &self.constraints, &self.xis, kind, None)?.gradient;
        match fault {
            Fault::None => Ok(full),
            Fault::FlipEntropySign => {
                let zeros = vec![0.0; self.xis.len()];
                let entropy_only =
                    evaluate_cost(&self.params, self.partition, &self.constraints, &zeros, kind, None)?.gradient;
                Ok(full.iter().zip(&entropy_only).map(|(f, e)| f - 2.0 * e).collect())
            }
        }
    }

    pub fn numeric_gradient(&self, kind: EntropyKind, h: f64) -> Result<Vec<f64>> {
        finite_difference_gradient(
            |q| exact_cost(q, self.partition, &self.constraints, &self.xis, kind),
            &self.params,
            h,
        )
    }
}

/// Compares two gradients coordinate by coordinate.
pub fn compare_gradients(
    analytic: &[f64],
    numeric: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    n_visible: usize,
    n_hidden: usize,
    h: f64,
) -> GradcheckReport {
    let mut max_rel = 0.0f64;
    let mut max_abs_small = 0.0f64;
    let mut worst: Option<(f64, CoordinateError)> = None;
    let mut passed = true;
    for (i, (&a, &f)) in analytic.iter().zip(numeric).enumerate() {
        let abs_error = (a - f).abs();
        let rel_error = abs_error / f.abs().max(f64::MIN_POSITIVE);
        let badness = if f.abs() < abs_tol {
            max_abs_small = max_abs_small.max(abs_error);
            abs_error / abs_tol
        } else {
            max_rel = max_rel.max(rel_error);
            rel_error / rel_tol
        };
        passed &= badness <= 1.0;
        if worst.as_ref().is_none_or(|(b, _)| badness > *b) {
            let coordinate = ParamCoord::from_index(i, n_visible, n_hidden)
                .map(|c| format!("{c:?}"))
                .unwrap_or_else(|| i.to_string());
            worst = Some((
                badness,
                CoordinateError {
                    index: i,
                    coordinate,
                    analytic: a,
                    numeric: f,
                    abs_error,
                    rel_error,
                },
            ));
        }
    }
    GradcheckReport {
        passed,
        n_coordinates: analytic.len(),
        max_rel_error: max_rel,
        max_abs_error_small: max_abs_small,
        worst: worst.map(|(_, w)| w),
        h,
    }
}

/// Exact-mode analytic gradient against central differences on a random instance.
pub fn gradcheck(config: &GradcheckConfig) -> Result<GradcheckReport> {
    let inst = GradcheckInstance::generate(config)?;
    let analytic = inst.analytic_gradient(config.entropy, config.fault)?;
    let numeric = inst.numeric_gradient(config.entropy, config.h)?;
    Ok(compare_gradients(
        &analytic,
        &numeric,
        config.rel_tol,
        config.abs_tol,
        inst.partition.n_visible(),
        config.n_hidden,
        config.h,
    ))
}

/// Largest absolute discrepancy between analytic and central-difference gradients for each step.
pub fn h_sweep(config: &GradcheckConfig, steps: &[f64]) -> Result<Vec<(f64, f64)>> {
    let inst = GradcheckInstance::generate(config)?;
    let analytic = inst.analytic_gradient(config.entropy, config.fault)?;
    steps
        .iter()
        .map(|&h| {
            let numeric = inst.numeric_gradient(config.entropy, h)?;
            let err = analytic.iter().zip(&numeric).map(|(a, f)| (a - f).abs()).fold(0.0, f64::max);
            Ok((h, err))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_check_passes() {
        let r = gradcheck(&GradcheckConfig::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.max_rel_error < 1e-5);
        assert_eq!(r.n_coordinates, 2 * 3 + 2 * 2 + 2 * 6);
    }

    #[test]
    fn sign_fault_is_detected() {
        let r = gradcheck(&GradcheckConfig {
            fault: Fault::FlipEntropySign,
            n_env: 2,
            ..GradcheckConfig::default()
        })
        .unwrap();
        assert!(!r.passed);
        assert!(r.worst.unwrap().rel_error > 1e-3);
    }

    #[test]
    fn vne_cost_passes() {
        let r = gradcheck(&GradcheckConfig {
            entropy: EntropyKind::Vne { cutoff: 4 },
            seed: 5,
            ..GradcheckConfig::default()
        })
        .unwrap();
        assert!(r.passed, "{r:?}");
    }
}
