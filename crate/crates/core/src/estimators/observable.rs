use num_complex::Complex64;
use rayon::prelude::*;

use super::{chunked_accumulate, Accumulator, EstimateResult, EstimationMode, Source, ValueAndGradient};
use crate::dense::PauliString;
use crate::error::{invalid, Error, Result};
use crate::rbm::{log_derivatives, AmplitudeTable, LogPsi, Partition, RbmParams, SpinConfig};
use crate::stats::{correlated_std_error, pairwise_sum_complex};

/// Extends a system observable with identities on the environment units.
fn extend(partition: Partition, params: &RbmParams, obs: &PauliString) -> Result<PauliString> {
    if partition.n_visible() != params.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: params.n_visible(),
            actual: partition.n_visible(),
        });
    }
    if obs.len() > partition.n_sys {
        return invalid(format!(
            "observable {} acts beyond the {} system units",
            obs.identifier(),
            partition.n_sys
        ));
    }
    if obs.len() != partition.n_sys {
        return Err(Error::DimensionMismatch {
            expected: partition.n_sys,
            actual: obs.len(),
        });
    }
    Ok(obs.padded(partition.n_env))
}

/// The single configuration `u` with `<v|O|u> != 0`, and that matrix element.
fn connected(obs: &PauliString, spins: &[i8]) -> (Vec<i8>, Complex64) {
    let mut u = spins.to_vec();
    for (s, p) in u.iter_mut().zip(obs.letters()) {
        if p.flips() {
            *s = -*s;
        }
    }
    let phase = obs.phase_on_spins(&u);
    (u, phase)
}

fn local_value(psi: &LogPsi, obs: &PauliString, spins: &[i8]) -> (Vec<i8>, Complex64) {
    let (u, phase) = connected(obs, spins);
    if u == spins {
        return (u, phase);
    }
    let ratio = (psi.eval(&u) - psi.eval(spins)).exp();
    (u, phase * ratio)
}

/// `O_loc(v) = sum_u <v|O|u> psi(u) / psi(v)` for a system observable.
pub fn local_estimator(
    params: &RbmParams,
    partition: Partition,
    obs: &PauliString,
    v: &SpinConfig,
) -> Result<Complex64> {
    let full = extend(partition, params, obs)?;
    if v.len() != params.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: params.n_visible(),
            actual: v.len(),
        });
    }
    let (u, phase) = connected(&full, v.spins());
    if u == v.spins() {
        return Ok(phase);
    }
    let ratio = (params.log_psi(&u) - params.log_psi(v.spins())).exp();
    let value = phase * ratio;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite(format!("local estimator of {}", obs.identifier())));
    }
    Ok(value)
}

fn sampled_result(values: &[Complex64], chain_lengths: &[usize]) -> EstimateResult {
    let n = values.len();
    let mean = pairwise_sum_complex(values) / n as f64;
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let (std_error, tau) = correlated_std_error(&re, chain_lengths);
    EstimateResult {
        value: mean.re,
        std_error,
        n_samples: n,
        mode: EstimationMode::Sampled,
        imag: mean.im,
        autocorr_time: tau,
    }
}

fn check_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `<O>` as the mean of `Re O_loc` over samples of `|psi|^2`, or by exact summation.
pub fn estimate_observable(
    params: &RbmParams,
    partition: Partition,
    obs: &PauliString,
    source: Source,
) -> Result<EstimateResult> {
    let full = extend(partition, params, obs)?;
    let result = match source {
        Source::Samples(set) => {
            if set.is_empty() {
                return Err(Error::EstimationFailure("empty sample set".into()));
            }
            let psi = LogPsi::new(params);
            let values: Vec<Complex64> = set
                .samples
                .par_iter()
                .map(|s| local_value(&psi, &full, s.spins()).1)
                .collect();
            sampled_result(&values, &set.chain_lengths)
        }
        Source::ExactSum => {
            let n = params.n_visible();
            let table = AmplitudeTable::new(params)?;
            let probs = table.probabilities();
            let psi = LogPsi::Table(table.log_amplitudes().to_vec());
            let terms: Vec<Complex64> = (0..1usize << n)
                .filter(|&i| probs[i] > 0.0)
                .map(|i| local_value(&psi, &full, SpinConfig::from_index(i, n).spins()).1 * probs[i])
                .collect();
            EstimateResult::exact(pairwise_sum_complex(&terms))
        }
    };
    check_finite(result.value, "observable estimate")?;
    Ok(result)
}

/// `<O>` and its gradient `Re[E(O_loc D(u, v))] - <O> E(D(v, v))` over packed coordinates.
pub fn observable_with_gradient(
    params: &RbmParams,
    partition: Partition,
    obs: &PauliString,
    source: Source,
) -> Result<ValueAndGradient> {
    let full = extend(partition, params, obs)?;
    let dim = params.coordinate_count();
    let template = Accumulator::new(1, 2, dim);
    let (estimate, acc, total_weight) = match source {
        Source::Samples(set) => {
            if set.is_empty() {
                return Err(Error::EstimationFailure("empty sample set".into()));
            }
            let psi = LogPsi::new(params);
            let items: Vec<(Vec<i8>, Complex64)> = set
                .samples
                .par_iter()
                .map(|s| local_value(&psi, &full, s.spins()))
                .collect();
            let values: Vec<Complex64> = items.iter().map(|(_, o)| *o).collect();
            let estimate = sampled_result(&values, &set.chain_lengths);
            let acc = chunked_accumulate(items.len(), &template, |i, acc| {
                let v = set.samples[i].spins();
                let (u, o_loc) = &items[i];
                let o_v = log_derivatives(params, v);
                let o_u = if u.as_slice() == v { o_v.clone() } else { log_derivatives(params, u) };
                acc.scalars[0] += o_loc;
                for k in 0..dim {
                    acc.vectors[0][k] += o_loc * (o_u[k] + o_v[k].conj());
                    acc.vectors[1][k] += 2.0 * o_v[k].re;
                }
            });
            (estimate, acc, items.len() as f64)
        }
        Source::ExactSum => {
            let n = params.n_visible();
            let table = AmplitudeTable::new(params)?;
            let probs = table.probabilities();
            let psi = LogPsi::Table(table.log_amplitudes().to_vec());
            let derivs: Vec<Vec<Complex64>> = (0..1usize << n)
                .into_par_iter()
                .map(|i| log_derivatives(params, SpinConfig::from_index(i, n).spins()))
                .collect();
            let acc = chunked_accumulate(1 << n, &template, |i, acc| {
                let p = probs[i];
                if p == 0.0 {
                    return;
                }
                let (u, o_loc) = local_value(&psi, &full, SpinConfig::from_index(i, n).spins());
                let j = SpinConfig::new(u).expect("flipped spins stay +-1").index();
                let w = o_loc * p;
                acc.scalars[0] += w;
                for k in 0..dim {
                    acc.vectors[0][k] += w * (derivs[j][k] + derivs[i][k].conj());
                    acc.vectors[1][k] += 2.0 * p * derivs[i][k].re;
                }
            });
            (EstimateResult::exact(acc.scalars[0]), acc, 1.0)
        }
    };
    check_finite(estimate.value, "observable estimate")?;
    let mean_o = acc.scalars[0].re / total_weight;
    let gradient: Vec<f64> = acc.vectors[0]
        .iter()
        .zip(&acc.vectors[1])
        .map(|(a, b)| a.re / total_weight - mean_o * b.re / total_weight)
        .collect();
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("observable gradient".into()));
    }
    Ok(ValueAndGradient { estimate, gradient })
}
