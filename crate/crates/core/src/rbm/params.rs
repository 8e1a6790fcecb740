use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{invalid, Error, Result};

/// Largest magnitude allowed for the real or imaginary part of any parameter.
pub const PARAM_BOUND: f64 = 30.0;

/// Complex RBM parameters: visible biases `a`, hidden biases `b`, couplings
/// `w` (row-major, `n_visible x n_hidden`) and the inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    n_visible: usize,
    n_hidden: usize,
    pub(crate) a: Vec<Complex64>,
    pub(crate) b: Vec<Complex64>,
    pub(crate) w: Vec<Complex64>,
    beta: f64,
}

impl RbmParams {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            n_visible,
            n_hidden,
            a: vec![zero; n_visible],
            b: vec![zero; n_hidden],
            w: vec![zero; n_visible * n_hidden],
            beta: 1.0,
        }
    }

    pub fn new(
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        w: Vec<Complex64>,
        beta: f64,
    ) -> Result<Self> {
        let (n_visible, n_hidden) = (a.len(), b.len());
        if w.len() != n_visible * n_hidden {
            return Err(Error::DimensionMismatch {
                expected: n_visible * n_hidden,
                actual: w.len(),
            });
        }
        let params = Self {
            n_visible,
            n_hidden,
            a,
            b,
            w,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    /// Complex Gaussian entries with standard deviation `std` per real coordinate.
    pub fn random<R: Rng + ?Sized>(n_visible: usize, n_hidden: usize, std: f64, rng: &mut R) -> Self {
        let mut draw = |len: usize| -> Vec<Complex64> {
            (0..len)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(std * re, std * im)
                })
                .collect()
        };
        let a = draw(n_visible);
        let b = draw(n_hidden);
        let w = draw(n_visible * n_hidden);
        Self {
            n_visible,
            n_hidden,
            a,
            b,
            w,
            beta: 1.0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn w(&self, visible: usize, hidden: usize) -> Complex64 {
        self.w[visible * self.n_hidden + hidden]
    }

    pub fn set_a(&mut self, k: usize, value: Complex64) {
        self.a[k] = value;
    }

    pub fn set_b(&mut self, p: usize, value: Complex64) {
        self.b[p] = value;
    }

    pub fn set_w(&mut self, visible: usize, hidden: usize, value: Complex64) {
        self.w[visible * self.n_hidden + hidden] = value;
    }

    /// Number of real coordinates, `2 (n_v + m + n_v m)`.
    pub fn coordinate_count(&self) -> usize {
        2 * (self.n_visible + self.n_hidden + self.n_visible * self.n_hidden)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        for z in self.a.iter().chain(&self.b).chain(&self.w) {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite("RBM parameter".into()));
            }
            if z.re.abs() > PARAM_BOUND || z.im.abs() > PARAM_BOUND {
                return invalid(format!("parameter {z} exceeds bound {PARAM_BOUND}"));
            }
        }
        Ok(())
    }

    /// Clamps every real and imaginary part into `[-PARAM_BOUND, PARAM_BOUND]`;
    /// returns how many parts were clamped.
    pub fn clip_to_bound(&mut self) -> usize {
        let mut clipped = 0;
        for z in self.a.iter_mut().chain(self.b.iter_mut()).chain(self.w.iter_mut()) {
            for part in [&mut z.re, &mut z.im] {
                if part.abs() > PARAM_BOUND {
                    *part = part.clamp(-PARAM_BOUND, PARAM_BOUND);
                    clipped += 1;
                }
            }
        }
        clipped
    }

    /// Real vector in the order `Re a, Im a, Re b, Im b, Re W, Im W` (W row-major).
    pub fn pack(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.coordinate_count());
        for block in [&self.a, &self.b, &self.w] {
            out.extend(block.iter().map(|z| z.re));
            out.extend(block.iter().map(|z| z.im));
        }
        out
    }

    /// Inverse of [`RbmParams::pack`] for the given shape.
    pub fn unpack(values: &[f64], n_visible: usize, n_hidden: usize, beta: f64) -> Result<Self> {
        let mut params = Self::zeros(n_visible, n_hidden);
        params.beta = beta;
        if values.len() != params.coordinate_count() {
            return Err(Error::DimensionMismatch {
                expected: params.coordinate_count(),
                actual: values.len(),
            });
        }
        let mut offset = 0;
        for block in [&mut params.a, &mut params.b, &mut params.w] {
            let len = block.len();
            for (i, z) in block.iter_mut().enumerate() {
                *z = Complex64::new(values[offset + i], values[offset + len + i]);
            }
            offset += 2 * len;
        }
        Ok(params)
    }

    /// Same shape, new coordinates.
    pub fn with_packed(&self, values: &[f64]) -> Result<Self> {
        Self::unpack(values, self.n_visible, self.n_hidden, self.beta)
    }

    pub fn to_checkpoint(&self, partition: Partition) -> Result<RbmCheckpoint> {
        if partition.n_visible() != self.n_visible {
            return Err(Error::DimensionMismatch {
                expected: self.n_visible,
                actual: partition.n_visible(),
            });
        }
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            self.w.chunks(self.n_hidden.max(1)).map(|r| r.iter().map(f).collect()).collect()
        };
        Ok(RbmCheckpoint {
            n_sys: partition.n_sys,
            n_env: partition.n_env,
            m: self.n_hidden,
            beta: self.beta,
            a_re: self.a.iter().map(|z| z.re).collect(),
            a_im: self.a.iter().map(|z| z.im).collect(),
            b_re: self.b.iter().map(|z| z.re).collect(),
            b_im: self.b.iter().map(|z| z.im).collect(),
            w_re: if self.n_hidden == 0 { vec![vec![]; self.n_visible] } else { rows(|z| z.re) },
            w_im: if self.n_hidden == 0 { vec![vec![]; self.n_visible] } else { rows(|z| z.im) },
        })
    }
}

/// Coordinate of the packed real parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamCoord {
    ReA(usize),
    ImA(usize),
    ReB(usize),
    ImB(usize),
    ReW(usize, usize),
    ImW(usize, usize),
}

impl ParamCoord {
    /// Position in the packed vector.
    pub fn index(self, n_visible: usize, n_hidden: usize) -> usize {
        let (nv, m) = (n_visible, n_hidden);
        match self {
            ParamCoord::ReA(k) => k,
            ParamCoord::ImA(k) => nv + k,
            ParamCoord::ReB(p) => 2 * nv + p,
            ParamCoord::ImB(p) => 2 * nv + m + p,
            ParamCoord::ReW(k, p) => 2 * (nv + m) + k * m + p,
            ParamCoord::ImW(k, p) => 2 * (nv + m) + nv * m + k * m + p,
        }
    }

    pub fn from_index(index: usize, n_visible: usize, n_hidden: usize) -> Option<Self> {
        let (nv, m) = (n_visible, n_hidden);
        let mut i = index;
        if i < nv {
            return Some(ParamCoord::ReA(i));
        }
        i -= nv;
        if i < nv {
            return Some(ParamCoord::ImA(i));
        }
        i -= nv;
        if i < m {
            return Some(ParamCoord::ReB(i));
        }
        i -= m;
        if i < m {
            return Some(ParamCoord::ImB(i));
        }
        i -= m;
        if m == 0 {
            return None;
        }
        if i < nv * m {
            return Some(ParamCoord::ReW(i / m, i % m));
        }
        i -= nv * m;
        if i < nv * m {
            return Some(ParamCoord::ImW(i / m, i % m));
        }
        None
    }

    pub fn is_valid(self, n_visible: usize, n_hidden: usize) -> bool {
        match self {
            ParamCoord::ReA(k) | ParamCoord::ImA(k) => k < n_visible,
            ParamCoord::ReB(p) | ParamCoord::ImB(p) => p < n_hidden,
            ParamCoord::ReW(k, p) | ParamCoord::ImW(k, p) => k < n_visible && p < n_hidden,
        }
    }
}

/// Checkpoint file layout for trained parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmCheckpoint {
    pub n_sys: usize,
    pub n_env: usize,
    pub m: usize,
    pub beta: f64,
    pub a_re: Vec<f64>,
    pub a_im: Vec<f64>,
    pub b_re: Vec<f64>,
    pub b_im: Vec<f64>,
    pub w_re: Vec<Vec<f64>>,
    pub w_im: Vec<Vec<f64>>,
}

impl RbmCheckpoint {
    pub fn into_params(self) -> Result<(RbmParams, Partition)> {
        let partition = Partition::new(self.n_sys, self.n_env)?;
        let nv = partition.n_visible();
        let check = |name: &str, len: usize, expected: usize| -> Result<()> {
            if len != expected {
                Err(Error::Parse(format!("checkpoint field {name} has length {len}, expected {expected}")))
            } else {
                Ok(())
            }
        };
        check("a_re", self.a_re.len(), nv)?;
        check("a_im", self.a_im.len(), nv)?;
        check("b_re", self.b_re.len(), self.m)?;
        check("b_im", self.b_im.len(), self.m)?;
        check("w_re", self.w_re.len(), nv)?;
        check("w_im", self.w_im.len(), nv)?;
        for (re, im) in self.w_re.iter().zip(&self.w_im) {
            check("w_re row", re.len(), self.m)?;
            check("w_im row", im.len(), self.m)?;
        }
        let join = |re: &[f64], im: &[f64]| -> Vec<Complex64> {
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let w = self
            .w_re
            .iter()
            .zip(&self.w_im)
            .flat_map(|(re, im)| join(re, im))
            .collect();
        let params = RbmParams::new(join(&self.a_re, &self.a_im), join(&self.b_re, &self.b_im), w, self.beta)?;
        Ok((params, partition))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
