//! Von Neumann entropy from trace powers.
//!
//! `x ln x` is approximated on `[X_MIN, 1]` by `sum_{p=2}^{n_c} c_p (x^p - x)`,
//! fitted by least squares on Chebyshev nodes. Every basis function vanishes
//! at `x = 1`, so `S = -sum_p c_p (Tr rho^p - 1) / ln 2` is exactly zero for
//! pure states.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

const X_MIN: f64 = 0.02;
const NODES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct VnePolynomial {
    cutoff: usize,
    /// `c_p` for `p = 2..=cutoff`.
    coefficients: Vec<f64>,
}

impl VnePolynomial {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return invalid(format!("VNE cutoff must be at least 2, got {cutoff}"));
        }
        let terms = cutoff - 1;
        let nodes: Vec<f64> = (0..NODES)
            .map(|j| {
                let t = ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * NODES) as f64).cos();
                0.5 * (1.0 + X_MIN) + 0.5 * (1.0 - X_MIN) * t
            })
            .collect();
        let a = DMatrix::from_fn(NODES, terms, |r, c| nodes[r].powi(c as i32 + 2) - nodes[r]);
        let y = DVector::from_iterator(NODES, nodes.iter().map(|x| x * x.ln()));
        let coefficients = a
            .svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::NonFinite(e.to_string()))?
            .iter()
            .copied()
            .collect();
        Ok(Self { cutoff, coefficients })
    }

    /// Shared instance per cutoff.
    pub fn cached(cutoff: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<VnePolynomial>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(p) = map.get(&cutoff) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(Self::new(cutoff)?);
        map.insert(cutoff, Arc::clone(&p));
        Ok(p)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Entropy in bits from `[Tr rho^2, ..., Tr rho^cutoff]`.
    pub fn entropy_bits(&self, tr_powers: &[f64]) -> Result<f64> {
        if tr_powers.len() != self.cutoff - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff - 1,
                actual: tr_powers.len(),
            });
        }
        if let Some(t) = tr_powers.iter().find(|t| !(**t > 0.0 && **t <= 1.0 + 1e-12)) {
            return invalid(format!("trace power {t} outside (0, 1]"));
        }
        let s: f64 = self
            .coefficients
            .iter()
            .zip(tr_powers)
            .map(|(c, t)| c * (t - 1.0))
            .sum();
        Ok(-s / std::f64::consts::LN_2)
    }

    /// `dS / d Tr rho^p` in bits, ordered like the input of [`VnePolynomial::entropy_bits`].
    pub fn sensitivities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| -c / std::f64::consts::LN_2).collect()
    }
}

/// Von Neumann entropy in bits from `[Tr rho^2, ..., Tr rho^cutoff]`.
pub fn vne_from_powers(tr_powers: &[f64], cutoff: usize) -> Result<f64> {
    VnePolynomial::cached(cutoff)?.entropy_bits(tr_powers)
}
