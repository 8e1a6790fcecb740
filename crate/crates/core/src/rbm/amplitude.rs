//! Amplitude evaluation for the marginalized RBM wavefunction
//!
//! `psi(sigma) = exp(beta sum_i a_i sigma_i) prod_j 2 cosh(beta (b_j + sum_i W_ij sigma_i))`
//!
//! which is `sum_h exp(-beta E(sigma, h))` for the usual RBM energy. The
//! partition function is never formed; callers work with ratios.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Partition, RbmParams, SpinConfig};
use crate::dense::{check_dense_size, DensityMatrix, DEFAULT_MAX_QUBITS};
use crate::error::{Error, Result};

/// `ln(2 cosh z)` without overflow for large `|Re z|`.
pub fn log_2cosh(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        z + (Complex64::new(1.0, 0.0) + (-2.0 * z).exp()).ln()
    } else {
        -z + (Complex64::new(1.0, 0.0) + (2.0 * z).exp()).ln()
    }
}

/// `tanh z` that saturates instead of producing NaN for large `|Re z|`.
pub fn stable_tanh(z: Complex64) -> Complex64 {
    if z.re.abs() > 20.0 {
        Complex64::new(z.re.signum(), 0.0)
    } else {
        z.tanh()
    }
}

impl RbmParams {
    /// Hidden pre-activations `beta (b_j + sum_i W_ij s_i)`.
    pub fn hidden_activations(&self, spins: &[i8]) -> Vec<Complex64> {
        let m = self.n_hidden();
        let mut theta: Vec<Complex64> = self.b.clone();
        for (i, &s) in spins.iter().enumerate() {
            let row = &self.w[i * m..(i + 1) * m];
            if s > 0 {
                theta.iter_mut().zip(row).for_each(|(t, w)| *t += w);
            } else {
                theta.iter_mut().zip(row).for_each(|(t, w)| *t -= w);
            }
        }
        let beta = self.beta();
        theta.iter_mut().for_each(|t| *t *= beta);
        theta
    }

    /// Unchecked log-amplitude; the real part is `-inf` for an exactly zero amplitude.
    pub fn log_psi(&self, spins: &[i8]) -> Complex64 {
        let visible: Complex64 = self
            .a
            .iter()
            .zip(spins)
            .map(|(a, &s)| a * f64::from(s))
            .sum::<Complex64>()
            * self.beta();
        self.hidden_activations(spins)
            .into_iter()
            .fold(visible, |acc, t| acc + log_2cosh(t))
    }
}

/// Unnormalized log-amplitude of a full visible configuration.
pub fn log_amplitude(params: &RbmParams, config: &SpinConfig) -> Result<Complex64> {
    if config.len() != params.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: params.n_visible(),
            actual: config.len(),
        });
    }
    let value = params.log_psi(config.spins());
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite(format!("log-amplitude {value}")));
    }
    Ok(value)
}

/// `psi(num) / psi(den)`; exactly one for identical configurations.
pub fn amplitude_ratio(params: &RbmParams, num: &SpinConfig, den: &SpinConfig) -> Result<Complex64> {
    if num.len() != den.len() {
        return Err(Error::DimensionMismatch {
            expected: den.len(),
            actual: num.len(),
        });
    }
    if num == den {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let ratio = (log_amplitude(params, num)? - log_amplitude(params, den)?).exp();
    if !ratio.re.is_finite() || !ratio.im.is_finite() {
        return Err(Error::NonFinite(format!("amplitude ratio {ratio}")));
    }
    Ok(ratio)
}

/// Log-amplitudes of every visible configuration, indexed by [`SpinConfig::index`].
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    n_visible: usize,
    log_amps: Vec<Complex64>,
    shift: f64,
}

impl AmplitudeTable {
    pub fn new(params: &RbmParams) -> Result<Self> {
        Self::with_limit(params, DEFAULT_MAX_QUBITS)
    }

    pub fn with_limit(params: &RbmParams, limit: usize) -> Result<Self> {
        let n = params.n_visible();
        check_dense_size(n, limit)?;
        let log_amps: Vec<Complex64> = (0..1usize << n)
            .map(|i| params.log_psi(SpinConfig::from_index(i, n).spins()))
            .collect();
        let shift = log_amps.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::NonFinite("every amplitude vanishes or overflows".into()));
        }
        Ok(Self {
            n_visible: n,
            log_amps,
            shift,
        })
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn log_amplitudes(&self) -> &[Complex64] {
        &self.log_amps
    }

    /// Amplitudes rescaled so the largest modulus is one.
    pub fn scaled_amplitudes(&self) -> Vec<Complex64> {
        self.log_amps
            .iter()
            .map(|z| (z - Complex64::new(self.shift, 0.0)).exp())
            .collect()
    }

    /// Normalized `|psi|^2` over all configurations.
    pub fn probabilities(&self) -> Vec<f64> {
        let w: Vec<f64> = self
            .log_amps
            .iter()
            .map(|z| (2.0 * (z.re - self.shift)).exp())
            .collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    }
}

/// Visible-layer size up to which [`LogPsi`] tabulates every configuration.
pub const TABLE_MAX_VISIBLE: usize = 12;

/// Log-amplitude lookup, tabulated for small visible layers and evaluated
/// directly otherwise. Both paths return identical values.
#[derive(Debug, Clone)]
pub enum LogPsi<'a> {
    Table(Vec<Complex64>),
    Direct(&'a RbmParams),
}

impl<'a> LogPsi<'a> {
    pub fn new(params: &'a RbmParams) -> Self {
        let n = params.n_visible();
        if n <= TABLE_MAX_VISIBLE {
            LogPsi::Table(
                (0..1usize << n)
                    .map(|i| params.log_psi(SpinConfig::from_index(i, n).spins()))
                    .collect(),
            )
        } else {
            LogPsi::Direct(params)
        }
    }

    pub fn eval(&self, spins: &[i8]) -> Complex64 {
        match self {
            LogPsi::Table(values) => values[spins.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))],
            LogPsi::Direct(params) => params.log_psi(spins),
        }
    }

    /// `ln |psi|^2`.
    pub fn log_prob(&self, spins: &[i8]) -> f64 {
        2.0 * self.eval(spins).re
    }
}

/// Amplitude matrix `V[s][e] = psi(s, e)` (scaled), system index on rows.
pub fn amplitude_matrix(params: &RbmParams, partition: Partition) -> Result<DMatrix<Complex64>> {
    if partition.n_visible() != params.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: params.n_visible(),
            actual: partition.n_visible(),
        });
    }
    let table = AmplitudeTable::new(params)?;
    let amps = table.scaled_amplitudes();
    let (rows, cols) = (1usize << partition.n_sys, 1usize << partition.n_env);
    Ok(DMatrix::from_row_slice(rows, cols, &amps))
}

/// Reduced system state `rho(s, s') = sum_e psi(s, e) psi*(s', e)`, trace-normalized.
pub fn exact_density_matrix(params: &RbmParams, partition: Partition) -> Result<DensityMatrix> {
    let v = amplitude_matrix(params, partition)?;
    let r = &v * v.adjoint();
    let tr = r.trace().re;
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::NonFinite("reduced density matrix has zero trace".into()));
    }
    DensityMatrix::from_matrix_unchecked(r / Complex64::new(tr, 0.0))
}
