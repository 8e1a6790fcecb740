use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ConstraintSet;
use crate::dense::PauliString;
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    estimate_observable, estimate_renyi_n, observable_with_gradient, renyi_with_gradient,
    renyi_with_gradient_unchecked, ReplicaSource, Source, VnePolynomial,
};
use crate::rbm::{Partition, RbmParams};
use crate::samplers::SampleSet;

const LN_2: f64 = std::f64::consts::LN_2;

/// Entropy functional used in the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    Renyi2,
    Vne { cutoff: usize },
}

impl EntropyKind {
    pub fn replicas(self) -> usize {
        match self {
            EntropyKind::Renyi2 => 2,
            EntropyKind::Vne { cutoff } => cutoff,
        }
    }
}

/// `C = -S + sum_i xi_i r_i^2`.
pub fn cost(entropy_bits: f64, residuals: &[f64], xis: &[f64]) -> f64 {
    assert_eq!(residuals.len(), xis.len(), "one penalty weight per residual");
    -entropy_bits + residuals.iter().zip(xis).map(|(r, x)| x * r * r).sum::<f64>()
}

/// Gradient of `<O>` over packed coordinates.
pub fn grad_observable_term(
    params: &RbmParams,
    partition: Partition,
    obs: &PauliString,
    source: Source,
) -> Result<Vec<f64>> {
    Ok(observable_with_gradient(params, partition, obs, source)?.gradient)
}

/// Gradient of `S_2 = -log2 <SWAP_A>` in bits over packed coordinates.
pub fn grad_entropy_term(params: &RbmParams, partition: Partition, source: ReplicaSource) -> Result<Vec<f64>> {
    let vg = renyi_with_gradient(params, partition, 2, source)?;
    let t = vg.estimate.value;
    Ok(vg.gradient.iter().map(|g| -g / (t * LN_2)).collect())
}

/// Central differences of `f` along every packed coordinate.
pub fn finite_difference_gradient<F>(f: F, params: &RbmParams, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&RbmParams) -> Result<f64> + Sync,
{
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("step must be positive, got {h}"));
    }
    let x = params.pack();
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let eval = |delta: f64| -> Result<f64> {
                let mut y = x.clone();
                y[i] += delta;
                let v = f(&params.with_packed(&y)?)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite(format!("cost at coordinate {i} shifted by {delta}")))
                }
            };
            Ok((eval(h)? - eval(-h)?) / (2.0 * h))
        })
        .collect()
}

/// Everything the trainer needs from one cost evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEvaluation {
    pub cost: f64,
    pub entropy_bits: f64,
    pub entropy_std_error: f64,
    pub expectations: Vec<f64>,
    pub residuals: Vec<f64>,
    pub gradient: Vec<f64>,
    /// A sampled trace-power estimate fell outside its physical range and was clamped.
    pub entropy_clipped: bool,
}

/// `Tr rho_A^p >= 2^{-(p-1) min(n_sys, n_env)}` for any state of the ansatz.
fn trace_power_floor(partition: Partition, p: usize) -> f64 {
    let rank_bits = partition.n_sys.min(partition.n_env) as i32;
    2f64.powi(-rank_bits * (p as i32 - 1))
}

fn entropy_with_gradient(
    params: &RbmParams,
    partition: Partition,
    kind: EntropyKind,
    replicas: ReplicaSource,
) -> Result<(f64, f64, Vec<f64>, bool)> {
    let sampled = matches!(replicas, ReplicaSource::Samples(_));
    let orders: Vec<usize> = (2..=kind.replicas()).collect();
    let mut values = Vec::with_capacity(orders.len());
    let mut grads = Vec::with_capacity(orders.len());
    let mut std_errors = Vec::with_capacity(orders.len());
    let mut clipped = false;
    for &p in &orders {
        let vg = renyi_with_gradient_unchecked(params, partition, p, replicas)?;
        let (lo, hi) = (trace_power_floor(partition, p), 1.0);
        let raw = vg.estimate.value;
        if sampled && !(lo..=hi).contains(&raw) {
            clipped = true;
            values.push(raw.clamp(lo, hi));
            grads.push(vec![0.0; vg.gradient.len()]);
        } else {
            if raw <= 0.0 {
                return Err(Error::EstimationFailure(format!("non-positive trace power {raw:.3e}")));
            }
            values.push(raw);
            grads.push(vg.gradient);
        }
        std_errors.push(vg.estimate.std_error);
    }
    let dim = params.coordinate_count();
    match kind {
        EntropyKind::Renyi2 => {
            let t = values[0];
            let s = -t.log2();
            let g = grads[0].iter().map(|g| -g / (t * LN_2)).collect();
            Ok((s, std_errors[0] / (t * LN_2), g, clipped))
        }
        EntropyKind::Vne { cutoff } => {
            let poly = VnePolynomial::cached(cutoff)?;
            let s = poly.entropy_bits(&values.iter().map(|v| v.min(1.0)).collect::<Vec<_>>())?;
            let sens = poly.sensitivities();
            let mut g = vec![0.0; dim];
            for (w, gp) in sens.iter().zip(&grads) {
                g.iter_mut().zip(gp).for_each(|(a, b)| *a += w * b);
            }
            let se = sens.iter().zip(&std_errors).map(|(w, e)| (w * e).powi(2)).sum::<f64>().sqrt();
            Ok((s, se, g, clipped))
        }
    }
}

/// Cost, estimates and total gradient `-grad S + sum_i 2 xi_i r_i grad <O_i>`.
///
/// `samples` holds independent replica streams. Observable gradients use the
/// first stream and their residual weights the second; reported expectations
/// average the two. `None` evaluates every quantity by exact summation.
pub fn evaluate_cost(
    params: &RbmParams,
    partition: Partition,
    constraints: &ConstraintSet,
    xis: &[f64],
    kind: EntropyKind,
    samples: Option<&[SampleSet]>,
) -> Result<CostEvaluation> {
    if xis.len() != constraints.len() {
        return Err(Error::DimensionMismatch {
            expected: constraints.len(),
            actual: xis.len(),
        });
    }
    let (source, second, replicas) = match samples {
        Some(streams) => {
            if streams.len() < kind.replicas() {
                return invalid(format!("{} replica streams required, got {}", kind.replicas(), streams.len()));
            }
            (Source::Samples(&streams[0]), Some(Source::Samples(&streams[1])), ReplicaSource::Samples(streams))
        }
        None => (Source::ExactSum, None, ReplicaSource::ExactSum),
    };
    let (entropy_bits, entropy_std_error, entropy_grad, entropy_clipped) =
        entropy_with_gradient(params, partition, kind, replicas)?;
    let mut gradient: Vec<f64> = entropy_grad.iter().map(|g| -g).collect();
    let mut expectations = Vec::with_capacity(constraints.len());
    let mut residuals = Vec::with_capacity(constraints.len());
    for (c, xi) in constraints.entries().iter().zip(xis) {
        let vg = observable_with_gradient(params, partition, &c.obs, source)?;
        let (coefficient, value) = match second {
            Some(s) => {
                let other = estimate_observable(params, partition, &c.obs, s)?.value;
                (other - c.target, 0.5 * (vg.estimate.value + other))
            }
            None => (vg.estimate.value - c.target, vg.estimate.value),
        };
        gradient.iter_mut().zip(&vg.gradient).for_each(|(a, b)| *a += 2.0 * xi * coefficient * b);
        expectations.push(value);
        residuals.push(value - c.target);
    }
    Ok(CostEvaluation {
        cost: cost(entropy_bits, &residuals, xis),
        entropy_bits,
        entropy_std_error,
        expectations,
        residuals,
        gradient,
        entropy_clipped,
    })
}

/// Cost by exact summation only, without gradients.
pub fn exact_cost(
    params: &RbmParams,
    partition: Partition,
    constraints: &ConstraintSet,
    xis: &[f64],
    kind: EntropyKind,
) -> Result<f64> {
    let entropy = match kind {
        EntropyKind::Renyi2 => -estimate_renyi_n(params, partition, 2, ReplicaSource::ExactSum)?.value.log2(),
        EntropyKind::Vne { cutoff } => {
            let powers = (2..=cutoff)
                .map(|p| Ok(estimate_renyi_n(params, partition, p, ReplicaSource::ExactSum)?.value.min(1.0)))
                .collect::<Result<Vec<f64>>>()?;
            VnePolynomial::cached(cutoff)?.entropy_bits(&powers)?
        }
    };
    let residuals = constraints
        .entries()
        .iter()
        .map(|c| Ok(estimate_observable(params, partition, &c.obs, Source::ExactSum)?.value - c.target))
        .collect::<Result<Vec<f64>>>()?;
    Ok(cost(entropy, &residuals, xis))
}
