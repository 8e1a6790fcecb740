//! Sample-based and exact-summation estimators for Pauli expectations,
//! replica Rényi entropies and the polynomial von Neumann entropy.

mod observable;
mod renyi;
mod vne;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::samplers::SampleSet;

pub use observable::{estimate_observable, local_estimator, observable_with_gradient};
pub use renyi::{estimate_renyi_n, estimate_swap, renyi_with_gradient, SwapEstimate};
pub(crate) use renyi::renyi_with_gradient_unchecked;
pub use vne::{vne_from_powers, VnePolynomial};

/// Largest `n * n_v` for which exact replica sums enumerate every tuple.
pub const TUPLE_ENUMERATION_MAX_BITS: usize = 24;
/// Largest `n * n_v` for which exact replica gradients enumerate every tuple.
pub const GRADIENT_ENUMERATION_MAX_BITS: usize = 16;

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Sampled,
    ExactSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub mode: EstimationMode,
    /// Imaginary part of the complex mean; statistically zero for Hermitian quantities.
    pub imag: f64,
    /// Integrated autocorrelation time used for the error bar (1 in exact mode).
    pub autocorr_time: f64,
}

impl EstimateResult {
    pub(crate) fn exact(value: Complex64) -> Self {
        Self {
            value: value.re,
            std_error: 0.0,
            n_samples: 0,
            mode: EstimationMode::ExactSum,
            imag: value.im,
            autocorr_time: 1.0,
        }
    }
}

/// Samples for single-stream estimators, or exact enumeration.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Samples(&'a SampleSet),
    ExactSum,
}

/// Independent replica streams, or exact enumeration.
#[derive(Debug, Clone, Copy)]
pub enum ReplicaSource<'a> {
    Samples(&'a [SampleSet]),
    ExactSum,
}

/// Value of a real estimator together with its gradient over packed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueAndGradient {
    pub estimate: EstimateResult,
    pub gradient: Vec<f64>,
}

/// `ceil(variance / epsilon^2)`, at least 1.
pub fn required_samples(variance: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return invalid(format!("epsilon must be positive, got {epsilon}"));
    }
    if !(variance >= 0.0 && variance.is_finite()) {
        return invalid(format!("variance must be non-negative, got {variance}"));
    }
    let ratio = variance / (epsilon * epsilon);
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok((n as u64).max(1))
}

/// Running sums of complex scalars and coordinate vectors for one chunk of items.
#[derive(Debug, Clone)]
pub(crate) struct Accumulator {
    pub scalars: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

impl Accumulator {
    pub fn new(n_scalars: usize, n_vectors: usize, len: usize) -> Self {
        Self {
            scalars: vec![Complex64::new(0.0, 0.0); n_scalars],
            vectors: vec![vec![Complex64::new(0.0, 0.0); len]; n_vectors],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.scalars.iter_mut().zip(other.scalars).for_each(|(a, b)| *a += b);
        for (va, vb) in self.vectors.iter_mut().zip(other.vectors) {
            va.iter_mut().zip(vb).for_each(|(a, b)| *a += b);
        }
        self
    }
}

fn tree_merge(mut parts: Vec<Accumulator>) -> Option<Accumulator> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop()
}

/// Sums `f(i, acc)` over `0..n` in fixed-size chunks merged by a pairwise tree,
/// so the result does not depend on the thread count.
pub(crate) fn chunked_accumulate<F>(n: usize, template: &Accumulator, f: F) -> Accumulator
where
    F: Fn(usize, &mut Accumulator) + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<Accumulator> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = template.clone();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    tree_merge(parts).unwrap_or_else(|| template.clone())
}
