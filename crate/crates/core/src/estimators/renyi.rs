//! Replica estimators of `Tr rho_A^n` with `A` the system units.
//!
//! For replicas `u_1..u_n` the per-tuple term is `prod_k psi(w_k) / psi(u_k)`
//! where `w_k` carries the system spins of `u_{k+1 mod n}` and the
//! environment spins of `u_k`. For `n = 2` this is the SWAP estimator
//! `psi(u') psi(v') / (psi(u) psi(v))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    chunked_accumulate, Accumulator, EstimateResult, EstimationMode, ReplicaSource, ValueAndGradient,
    GRADIENT_ENUMERATION_MAX_BITS, TUPLE_ENUMERATION_MAX_BITS,
};
use crate::error::{invalid, Error, Result};
use crate::rbm::{amplitude_matrix, log_derivatives, AmplitudeTable, LogPsi, Partition, RbmParams, SpinConfig};
use crate::samplers::SampleSet;
use crate::stats::{correlated_std_error, pairwise_sum_complex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapEstimate {
    /// Raw estimate of `<SWAP_A> = Tr rho_A^2`.
    pub swap: EstimateResult,
    /// `-log2` of the swap value after clipping to at most one.
    pub s2_bits: f64,
    pub s2_std_error: f64,
    /// Set when the raw value exceeded one and was clipped.
    pub clipped: bool,
}

fn check(params: &RbmParams, partition: Partition, n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("replica order must be at least 2, got {n}"));
    }
    if partition.n_visible() != params.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: params.n_visible(),
            actual: partition.n_visible(),
        });
    }
    Ok(())
}

fn check_streams(streams: &[SampleSet], n: usize, n_visible: usize) -> Result<usize> {
    if streams.len() < n {
        return invalid(format!("{n} replica streams required, got {}", streams.len()));
    }
    let len = streams[0].len();
    if len == 0 {
        return Err(Error::EstimationFailure("empty replica streams".into()));
    }
    for s in &streams[..n] {
        if s.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: s.len(),
            });
        }
        if let Some(c) = s.samples.iter().find(|c| c.len() != n_visible) {
            return Err(Error::DimensionMismatch {
                expected: n_visible,
                actual: c.len(),
            });
        }
    }
    Ok(len)
}

/// Configurations `w_k` for one replica tuple.
fn permuted(tuple: &[&[i8]], n_sys: usize) -> Vec<Vec<i8>> {
    let n = tuple.len();
    (0..n)
        .map(|k| {
            let mut w = tuple[k].to_vec();
            w[..n_sys].copy_from_slice(&tuple[(k + 1) % n][..n_sys]);
            w
        })
        .collect()
}

fn tuple_term(psi: &LogPsi, tuple: &[&[i8]], n_sys: usize) -> Complex64 {
    let log: Complex64 = permuted(tuple, n_sys)
        .iter()
        .zip(tuple)
        .map(|(wk, uk)| if wk.as_slice() == *uk { Complex64::new(0.0, 0.0) } else { psi.eval(wk) - psi.eval(uk) })
        .sum();
    log.exp()
}

fn build(value: Complex64, std_error: f64, n_samples: usize, tau: f64, mode: EstimationMode) -> Result<EstimateResult> {
    if !value.re.is_finite() || !std_error.is_finite() {
        return Err(Error::NonFinite("replica estimate".into()));
    }
    Ok(EstimateResult {
        value: value.re,
        std_error,
        n_samples,
        mode,
        imag: value.im,
        autocorr_time: tau,
    })
}

fn require_positive(estimate: EstimateResult) -> Result<EstimateResult> {
    if estimate.value <= 0.0 {
        return Err(Error::EstimationFailure(format!(
            "non-positive replica estimate {:.3e}; more samples are needed",
            estimate.value
        )));
    }
    Ok(estimate)
}

fn finish(value: Complex64, std_error: f64, n_samples: usize, tau: f64, mode: EstimationMode) -> Result<EstimateResult> {
    require_positive(build(value, std_error, n_samples, tau, mode)?)
}

fn sampled_terms(params: &RbmParams, partition: Partition, n: usize, streams: &[SampleSet]) -> Result<Vec<Complex64>> {
    let len = check_streams(streams, n, params.n_visible())?;
    let psi = LogPsi::new(params);
    Ok((0..len)
        .map(|i| {
            let tuple: Vec<&[i8]> = streams[..n].iter().map(|s| s.samples[i].spins()).collect();
            tuple_term(&psi, &tuple, partition.n_sys)
        })
        .collect())
}

/// Exact `Tr rho_A^n` by enumerating every replica tuple of basis indices.
fn exact_by_enumeration(table: &AmplitudeTable, partition: Partition, n: usize) -> Complex64 {
    let amps = table.scaled_amplitudes();
    let dim = amps.len();
    let z: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let env_mask = (1usize << partition.n_env) - 1;
    let template = Accumulator::new(1, 0, 0);
    let total = dim.pow(n as u32);
    let acc = chunked_accumulate(total, &template, |t, acc| {
        let mut digits = [0usize; 32];
        let mut rest = t;
        for d in digits.iter_mut().take(n) {
            *d = rest % dim;
            rest /= dim;
        }
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let (u, next) = (digits[k], digits[(k + 1) % n]);
            let w = (next & !env_mask) | (u & env_mask);
            term *= amps[u].conj() * amps[w];
        }
        acc.scalars[0] += term;
    });
    acc.scalars[0] / z.powi(n as i32)
}

/// Exact `Tr rho_A^n` from the reduced matrix `V V^dagger`.
fn exact_by_contraction(params: &RbmParams, partition: Partition, n: usize) -> Result<Complex64> {
    let v = amplitude_matrix(params, partition)?;
    let r = &v * v.adjoint();
    let z = r.trace();
    let mut power = r.clone();
    for _ in 1..n {
        power = &power * &r;
    }
    Ok(power.trace() / z.powi(n as i32))
}

/// Estimate of `Tr rho_A^n` from `n` independent replica streams or exact summation.
pub fn estimate_renyi_n(
    params: &RbmParams,
    partition: Partition,
    n: usize,
    source: ReplicaSource,
) -> Result<EstimateResult> {
    check(params, partition, n)?;
    match source {
        ReplicaSource::Samples(streams) => {
            let terms = sampled_terms(params, partition, n, streams)?;
            let mean = pairwise_sum_complex(&terms) / terms.len() as f64;
            let re: Vec<f64> = terms.iter().map(|t| t.re).collect();
            let (se, tau) = correlated_std_error(&re, &streams[0].chain_lengths);
            finish(mean, se, terms.len(), tau, EstimationMode::Sampled)
        }
        ReplicaSource::ExactSum => {
            let value = if n * params.n_visible() <= TUPLE_ENUMERATION_MAX_BITS {
                exact_by_enumeration(&AmplitudeTable::new(params)?, partition, n)
            } else {
                exact_by_contraction(params, partition, n)?
            };
            finish(value, 0.0, 0, 1.0, EstimationMode::ExactSum)
        }
    }
}

/// `<SWAP_A>` and `S_2 = -log2 <SWAP_A>` in bits.
pub fn estimate_swap(params: &RbmParams, partition: Partition, source: ReplicaSource) -> Result<SwapEstimate> {
    let swap = estimate_renyi_n(params, partition, 2, source)?;
    let clipped = swap.value > 1.0;
    let value = swap.value.min(1.0);
    Ok(SwapEstimate {
        swap,
        s2_bits: -value.log2(),
        s2_std_error: swap.std_error / (value * std::f64::consts::LN_2),
        clipped,
    })
}

/// Exact gradient from per-configuration coefficients:
/// `Re sum_i alpha_i O(i) + Re sum_i beta_i conj(O(i)) - sum_i gamma_i Re O(i)`.
fn contract_coefficients(
    params: &RbmParams,
    alpha: &[Complex64],
    beta: &[Complex64],
    gamma: &[f64],
) -> Vec<f64> {
    let n = params.n_visible();
    let dim = params.coordinate_count();
    let template = Accumulator::new(0, 1, dim);
    let acc = chunked_accumulate(alpha.len(), &template, |i, acc| {
        if alpha[i] == Complex64::new(0.0, 0.0) && beta[i] == Complex64::new(0.0, 0.0) && gamma[i] == 0.0 {
            return;
        }
        let o = log_derivatives(params, SpinConfig::from_index(i, n).spins());
        for k in 0..dim {
            acc.vectors[0][k] += alpha[i] * o[k] + beta[i] * o[k].conj() - gamma[i] * o[k].re;
        }
    });
    acc.vectors[0].iter().map(|z| z.re).collect()
}

fn gradient_by_enumeration(params: &RbmParams, table: &AmplitudeTable, partition: Partition, n: usize) -> (Complex64, Vec<f64>) {
    let amps = table.scaled_amplitudes();
    let dim = amps.len();
    let z: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let norm = z.powi(n as i32);
    let env_mask = (1usize << partition.n_env) - 1;
    let mut alpha = vec![Complex64::new(0.0, 0.0); dim];
    let mut beta = vec![Complex64::new(0.0, 0.0); dim];
    let mut value = Complex64::new(0.0, 0.0);
    let mut digits = vec![0usize; n];
    let mut w = vec![0usize; n];
    for t in 0..dim.pow(n as u32) {
        let mut rest = t;
        for d in digits.iter_mut() {
            *d = rest % dim;
            rest /= dim;
        }
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..n {
            w[k] = (digits[(k + 1) % n] & !env_mask) | (digits[k] & env_mask);
            term *= amps[digits[k]].conj() * amps[w[k]];
        }
        let c = term / norm;
        value += c;
        for k in 0..n {
            alpha[w[k]] += c;
            beta[digits[k]] += c;
        }
    }
    let scale = value.re * n as f64 * 2.0 / z;
    let gamma: Vec<f64> = amps.iter().map(|a| scale * a.norm_sqr()).collect();
    (value, contract_coefficients(params, &alpha, &beta, &gamma))
}

fn gradient_by_contraction(params: &RbmParams, partition: Partition, n: usize) -> Result<(Complex64, Vec<f64>)> {
    let v = amplitude_matrix(params, partition)?;
    let r = &v * v.adjoint();
    let z = r.trace().re;
    let mut power = DMatrix::<Complex64>::identity(r.nrows(), r.ncols());
    for _ in 1..n {
        power = &power * &r;
    }
    let m = &power * &v;
    let tr_n = (&power * &r).trace();
    let norm = z.powi(n as i32);
    let value = tr_n / norm;
    let (rows, cols) = (v.nrows(), v.ncols());
    let mut alpha = vec![Complex64::new(0.0, 0.0); rows * cols];
    let beta = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut gamma = vec![0.0; rows * cols];
    for s in 0..rows {
        for e in 0..cols {
            let i = s * cols + e;
            alpha[i] = m[(s, e)].conj() * v[(s, e)] * (2.0 * n as f64 / norm);
            gamma[i] = value.re * n as f64 * 2.0 * v[(s, e)].norm_sqr() / z;
        }
    }
    Ok((value, contract_coefficients(params, &alpha, &beta, &gamma)))
}

/// `Tr rho_A^n` and its gradient
/// `Re[E(T sum_k D(w_k, u_k))] - <T> E(sum_k D(u_k, u_k))` over packed coordinates.
pub fn renyi_with_gradient(
    params: &RbmParams,
    partition: Partition,
    n: usize,
    source: ReplicaSource,
) -> Result<ValueAndGradient> {
    let mut out = renyi_with_gradient_unchecked(params, partition, n, source)?;
    out.estimate = require_positive(out.estimate)?;
    Ok(out)
}

/// As [`renyi_with_gradient`] but a non-positive sampled value is returned, not rejected.
pub(crate) fn renyi_with_gradient_unchecked(
    params: &RbmParams,
    partition: Partition,
    n: usize,
    source: ReplicaSource,
) -> Result<ValueAndGradient> {
    check(params, partition, n)?;
    let (estimate, gradient) = match source {
        ReplicaSource::Samples(streams) => {
            let terms = sampled_terms(params, partition, n, streams)?;
            let len = terms.len();
            let dim = params.coordinate_count();
            let template = Accumulator::new(1, 2, dim);
            let n_sys = partition.n_sys;
            let acc = chunked_accumulate(len, &template, |i, acc| {
                let tuple: Vec<&[i8]> = streams[..n].iter().map(|s| s.samples[i].spins()).collect();
                let w = permuted(&tuple, n_sys);
                let t = terms[i];
                acc.scalars[0] += t;
                for (wk, uk) in w.iter().zip(&tuple) {
                    let o_u = log_derivatives(params, uk);
                    let o_w = if wk.as_slice() == *uk { o_u.clone() } else { log_derivatives(params, wk) };
                    for k in 0..dim {
                        acc.vectors[0][k] += t * (o_w[k] + o_u[k].conj());
                        acc.vectors[1][k] += 2.0 * o_u[k].re;
                    }
                }
            });
            let mean = pairwise_sum_complex(&terms) / len as f64;
            let re: Vec<f64> = terms.iter().map(|t| t.re).collect();
            let (se, tau) = correlated_std_error(&re, &streams[0].chain_lengths);
            let estimate = build(mean, se, len, tau, EstimationMode::Sampled)?;
            let nf = len as f64;
            let gradient = acc.vectors[0]
                .iter()
                .zip(&acc.vectors[1])
                .map(|(a, b)| a.re / nf - mean.re * b.re / nf)
                .collect();
            (estimate, gradient)
        }
        ReplicaSource::ExactSum => {
            let (value, gradient) = if n * params.n_visible() <= GRADIENT_ENUMERATION_MAX_BITS {
                gradient_by_enumeration(params, &AmplitudeTable::new(params)?, partition, n)
            } else {
                gradient_by_contraction(params, partition, n)?
            };
            (build(value, 0.0, 0, 1.0, EstimationMode::ExactSum)?, gradient)
        }
    };
    if gradient.iter().any(|g: &f64| !g.is_finite()) {
        return Err(Error::NonFinite("replica gradient".into()));
    }
    Ok(ValueAndGradient { estimate, gradient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::trace_of_power;
    use crate::rbm::exact_density_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(nv: usize, m: usize, seed: u64) -> RbmParams {
        RbmParams::random(nv, m, 0.6, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn enumeration_and_contraction_agree() {
        let p = random(5, 3, 1);
        let part = Partition::new(3, 2).unwrap();
        let table = AmplitudeTable::new(&p).unwrap();
        let rho = exact_density_matrix(&p, part).unwrap();
        for n in 2..=4 {
            let a = exact_by_enumeration(&table, part, n);
            let b = exact_by_contraction(&p, part, n).unwrap();
            assert!((a - b).norm() < 1e-12);
            assert!((a.re - trace_of_power(&rho, n as u32)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_paths_agree() {
        let p = random(5, 2, 2);
        let part = Partition::new(2, 3).unwrap();
        let table = AmplitudeTable::new(&p).unwrap();
        for n in 2..=3 {
            let (va, ga) = gradient_by_enumeration(&p, &table, part, n);
            let (vb, gb) = gradient_by_contraction(&p, part, n).unwrap();
            assert!((va - vb).norm() < 1e-12);
            for (x, y) in ga.iter().zip(&gb) {
                assert!((x - y).abs() < 1e-10, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn self_swap_terms_are_one() {
        let p = random(4, 2, 3);
        let part = Partition::new(2, 2).unwrap();
        let samples: Vec<SpinConfig> = SpinConfig::enumerate(4).collect();
        let set = SampleSet {
            chain_lengths: vec![samples.len()],
            samples,
        };
        let pair = [set.clone(), set];
        let est = estimate_swap(&p, part, ReplicaSource::Samples(&pair)).unwrap();
        assert_eq!(est.swap.value, 1.0);
        assert_eq!(est.s2_bits, 0.0);
    }

    #[test]
    fn swap_is_renyi_two() {
        let p = random(4, 2, 4);
        let part = Partition::new(2, 2).unwrap();
        let a = estimate_swap(&p, part, ReplicaSource::ExactSum).unwrap();
        let b = estimate_renyi_n(&p, part, 2, ReplicaSource::ExactSum).unwrap();
        assert_eq!(a.swap, b);
        assert!(estimate_renyi_n(&p, part, 1, ReplicaSource::ExactSum).is_err());
    }

    #[test]
    fn zero_params_are_pure() {
        let p = RbmParams::zeros(5, 2);
        let part = Partition::new(3, 2).unwrap();
        for n in 2..=4 {
            let t = estimate_renyi_n(&p, part, n, ReplicaSource::ExactSum).unwrap();
            assert!((t.value - 1.0).abs() < 1e-12);
        }
    }
}
