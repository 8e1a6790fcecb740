//! Ising surrogate `H_sur = sum_i l_i s_i + sum_{i<j} J_ij s_i s_j` and its
//! Trotterized quench `U = (e^{-i gamma H_sur dt} e^{-i (1-gamma) H_x dt})^n_trot`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::check_dense_size;
use crate::error::{invalid, Error, Result};
use crate::rbm::{LogPsi, RbmParams, SpinConfig};

/// Largest visible layer for which the dense proposal matrix is built (`4^n` entries).
pub const TROTTER_MAX_VISIBLE: usize = 12;

const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;
const RIDGE: f64 = 1e-8;

/// Evolution time, mixing weight and step count of the quench.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterSettings {
    pub tau: f64,
    pub gamma: f64,
    pub n_trot: usize,
}

impl Default for TrotterSettings {
    fn default() -> Self {
        Self {
            tau: 2.0,
            gamma: 0.6,
            n_trot: 8,
        }
    }
}

impl TrotterSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return invalid(format!("tau must be positive, got {}", self.tau));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return invalid(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if self.n_trot == 0 {
            return invalid("n_trot must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateParams {
    pub l: Vec<f64>,
    /// Symmetric couplings with zero diagonal.
    pub j: DMatrix<f64>,
    pub settings: TrotterSettings,
}

impl SurrogateParams {
    pub fn new(l: Vec<f64>, j: DMatrix<f64>, settings: TrotterSettings) -> Result<Self> {
        let s = Self { l, j, settings };
        s.validate()?;
        Ok(s)
    }

    pub fn n_visible(&self) -> usize {
        self.l.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.l.len();
        if self.j.nrows() != n || self.j.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.j.nrows(),
            });
        }
        for i in 0..n {
            if self.j[(i, i)] != 0.0 {
                return invalid("surrogate couplings must have zero diagonal");
            }
            for k in 0..i {
                if (self.j[(i, k)] - self.j[(k, i)]).abs() > SYMMETRY_TOL {
                    return invalid("surrogate couplings must be symmetric");
                }
            }
        }
        if self.l.iter().chain(self.j.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("surrogate parameter".into()));
        }
        self.settings.validate()
    }

    /// `H_sur` on a spin configuration.
    pub fn energy(&self, spins: &[i8]) -> f64 {
        let s: Vec<f64> = spins.iter().map(|&x| f64::from(x)).collect();
        let mut e: f64 = self.l.iter().zip(&s).map(|(l, x)| l * x).sum();
        for i in 0..s.len() {
            for k in i + 1..s.len() {
                e += self.j[(i, k)] * s[i] * s[k];
            }
        }
        e
    }
}

/// Result of the least-squares surrogate fit.
#[derive(Debug, Clone)]
pub struct SurrogateFit {
    pub surrogate: SurrogateParams,
    pub offset: f64,
    /// Sum of squared residuals over the batch.
    pub residual: f64,
    /// Set when the design matrix was rank deficient and a ridge solve was used.
    pub ridge_fallback: bool,
}

/// Feature row `[1, s_i..., s_i s_j (i<j)...]`.
pub fn surrogate_features(spins: &[i8]) -> Vec<f64> {
    let n = spins.len();
    let mut row = Vec::with_capacity(1 + n + n * (n - 1) / 2);
    row.push(1.0);
    row.extend(spins.iter().map(|&s| f64::from(s)));
    for i in 0..n {
        for k in i + 1..n {
            row.push(f64::from(spins[i] * spins[k]));
        }
    }
    row
}

/// Fits `ln |psi|^2 ~ c + sum l s + sum J s s` over `batch` by least squares.
pub fn fit_surrogate(
    params: &RbmParams,
    batch: &[SpinConfig],
    settings: TrotterSettings,
) -> Result<SurrogateFit> {
    settings.validate()?;
    if batch.is_empty() {
        return invalid("surrogate fit batch is empty");
    }
    let n = params.n_visible();
    if let Some(c) = batch.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    let features = 1 + n + n * (n.saturating_sub(1)) / 2;
    let psi = LogPsi::new(params);
    let mut x = DMatrix::<f64>::zeros(batch.len(), features);
    let mut y = DVector::<f64>::zeros(batch.len());
    for (r, c) in batch.iter().enumerate() {
        y[r] = psi.log_prob(c.spins());
        if !y[r].is_finite() {
            return Err(Error::NonFinite("log-probability in surrogate batch".into()));
        }
        for (k, f) in surrogate_features(c.spins()).into_iter().enumerate() {
            x[(r, k)] = f;
        }
    }

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank_deficient = batch.len() < features
        || svd.singular_values.iter().any(|&s| s <= RANK_TOL * smax.max(1.0));
    let coeffs = if rank_deficient {
        let xt = x.transpose();
        let mut normal = &xt * &x;
        let scale = RIDGE * (normal.trace() / features as f64).max(1.0);
        for i in 0..features {
            normal[(i, i)] += scale;
        }
        normal
            .cholesky()
            .ok_or_else(|| Error::NonFinite("ridge system is not positive definite".into()))?
            .solve(&(xt * &y))
    } else {
        svd.solve(&y, 0.0).map_err(|e| Error::NonFinite(e.to_string()))?
    };
    let residual = (&x * &coeffs - &y).norm_squared();

    let l: Vec<f64> = coeffs.iter().skip(1).take(n).copied().collect();
    let mut j = DMatrix::<f64>::zeros(n, n);
    let mut idx = 1 + n;
    for a in 0..n {
        for b in a + 1..n {
            j[(a, b)] = coeffs[idx];
            j[(b, a)] = coeffs[idx];
            idx += 1;
        }
    }
    Ok(SurrogateFit {
        surrogate: SurrogateParams::new(l, j, settings)?,
        offset: coeffs[0],
        residual,
        ridge_fallback: rank_deficient,
    })
}

/// Row-stochastic proposal `q(v'|v) = |<v'|U|v>|^2`, stored row-major by `v`.
#[derive(Debug, Clone)]
pub struct ProposalMatrix {
    n_visible: usize,
    q: Vec<f64>,
}

impl ProposalMatrix {
    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn dim(&self) -> usize {
        1 << self.n_visible
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.q[from * self.dim() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let d = self.dim();
        &self.q[from * d..(from + 1) * d]
    }

    /// Inverse-CDF draw from row `from` given `u` in `[0, 1)`.
    pub fn sample_row(&self, from: usize, u: f64) -> usize {
        let row = self.row(from);
        let total: f64 = row.iter().sum();
        let target = u * total;
        let mut acc = 0.0;
        let mut last = from;
        for (to, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = to;
                if target < acc {
                    return to;
                }
            }
        }
        last
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.q)
    }
}

fn apply_rx_all(state: &mut [Complex64], n: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let ms = Complex64::new(0.0, -s);
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        for b in 0..state.len() {
            if b & bit == 0 {
                let (x0, x1) = (state[b], state[b | bit]);
                state[b] = x0 * c + x1 * ms;
                state[b | bit] = x1 * c + x0 * ms;
            }
        }
    }
}

/// Builds `q(v'|v)` by simulating the quench from every basis state.
pub fn trotter_proposal_matrix(surrogate: &SurrogateParams) -> Result<ProposalMatrix> {
    surrogate.validate()?;
    let n = surrogate.n_visible();
    check_dense_size(n, TROTTER_MAX_VISIBLE)?;
    let dim = 1usize << n;
    let TrotterSettings { tau, gamma, n_trot } = surrogate.settings;
    let dt = tau / n_trot as f64;
    let phases: Vec<Complex64> = (0..dim)
        .map(|b| {
            let e = surrogate.energy(SpinConfig::from_index(b, n).spins());
            Complex64::from_polar(1.0, -gamma * e * dt)
        })
        .collect();
    let theta = (1.0 - gamma) * dt;
    let mut q = vec![0.0; dim * dim];
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    for from in 0..dim {
        state.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        state[from] = Complex64::new(1.0, 0.0);
        for _ in 0..n_trot {
            apply_rx_all(&mut state, n, theta);
            state.iter_mut().zip(&phases).for_each(|(z, p)| *z *= p);
        }
        let row = &mut q[from * dim..(from + 1) * dim];
        for (r, z) in row.iter_mut().zip(&state) {
            *r = z.norm_sqr();
        }
    }
    Ok(ProposalMatrix { n_visible: n, q })
}
