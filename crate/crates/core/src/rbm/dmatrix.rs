//! Logarithmic derivatives of density-matrix elements.
//!
//! For `rho(v, v') = psi(v) psi*(v')` the derivative with respect to a real
//! coordinate `x` satisfies `d rho(v, v') / dx = D_x(v, v') rho(v, v')` with
//! `D_x(v, v') = O_x(v) + conj(O_x(v'))` and `O_x = d ln psi / dx`.

use num_complex::Complex64;

use super::amplitude::stable_tanh;
use super::{ParamCoord, RbmParams, SpinConfig};
use crate::error::{invalid, Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `d ln psi(v) / dx` for every packed coordinate `x`, in packing order.
pub fn log_derivatives(params: &RbmParams, spins: &[i8]) -> Vec<Complex64> {
    let (nv, m) = (params.n_visible(), params.n_hidden());
    let beta = params.beta();
    let tanh: Vec<Complex64> = params
        .hidden_activations(spins)
        .into_iter()
        .map(stable_tanh)
        .collect();
    let mut out = Vec::with_capacity(params.coordinate_count());
    let spin = |k: usize| f64::from(spins[k]);
    out.extend((0..nv).map(|k| Complex64::new(beta * spin(k), 0.0)));
    out.extend((0..nv).map(|k| I * beta * spin(k)));
    out.extend(tanh.iter().map(|t| t * beta));
    out.extend(tanh.iter().map(|t| I * t * beta));
    for k in 0..nv {
        out.extend(tanh.iter().map(|t| t * (beta * spin(k))));
    }
    for k in 0..nv {
        out.extend(tanh.iter().map(|t| I * t * (beta * spin(k))));
    }
    debug_assert_eq!(out.len(), 2 * (nv + m + nv * m));
    out
}

/// `D(v, v') = O(v) + conj(O(v'))` for all coordinates at once.
pub fn d_vector(o_v: &[Complex64], o_vp: &[Complex64]) -> Vec<Complex64> {
    o_v.iter().zip(o_vp).map(|(a, b)| a + b.conj()).collect()
}

/// Single entry `D_x(v, v')`.
pub fn d_matrix_entry(
    params: &RbmParams,
    coord: ParamCoord,
    v: &SpinConfig,
    v_prime: &SpinConfig,
) -> Result<Complex64> {
    let (nv, m) = (params.n_visible(), params.n_hidden());
    for c in [v, v_prime] {
        if c.len() != nv {
            return Err(Error::DimensionMismatch {
                expected: nv,
                actual: c.len(),
            });
        }
    }
    if !coord.is_valid(nv, m) {
        return invalid(format!("coordinate {coord:?} out of range for ({nv}, {m})"));
    }
    let beta = params.beta();
    let (s, sp) = (v.spins(), v_prime.spins());
    let tanh_at = |spins: &[i8], p: usize| stable_tanh(params.hidden_activations(spins)[p]);
    let value = match coord {
        ParamCoord::ReA(k) => Complex64::new(beta * f64::from(s[k] + sp[k]), 0.0),
        ParamCoord::ImA(k) => I * beta * f64::from(s[k] - sp[k]),
        ParamCoord::ReB(p) => (tanh_at(s, p) + tanh_at(sp, p).conj()) * beta,
        ParamCoord::ImB(p) => I * (tanh_at(s, p) - tanh_at(sp, p).conj()) * beta,
        ParamCoord::ReW(k, p) => {
            (tanh_at(s, p) * f64::from(s[k]) + tanh_at(sp, p).conj() * f64::from(sp[k])) * beta
        }
        ParamCoord::ImW(k, p) => {
            I * (tanh_at(s, p) * f64::from(s[k]) - tanh_at(sp, p).conj() * f64::from(sp[k])) * beta
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::amplitude::log_amplitude;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Finite-difference estimate of `(d rho(v, v') / dx) / rho(v, v')`.
    fn fd_log_derivative(p: &RbmParams, coord: ParamCoord, v: &SpinConfig, vp: &SpinConfig) -> Complex64 {
        let h = 1e-5;
        let idx = coord.index(p.n_visible(), p.n_hidden());
        let shifted = |delta: f64| {
            let mut x = p.pack();
            x[idx] += delta;
            p.with_packed(&x).unwrap()
        };
        let log_rho = |q: &RbmParams| log_amplitude(q, v).unwrap() + log_amplitude(q, vp).unwrap().conj();
        let base = log_rho(p);
        let plus = (log_rho(&shifted(h)) - base).exp();
        let minus = (log_rho(&shifted(-h)) - base).exp();
        (plus - minus) / (2.0 * h)
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (nv, m) = (4, 3);
        for family in 0..6 {
            for _ in 0..50 {
                let beta = rng.random_range(0.5..1.5);
                let p = RbmParams::random(nv, m, 0.5, &mut rng).with_beta(beta).unwrap();
                let v = SpinConfig::from_index(rng.random_range(0..16), nv);
                let vp = SpinConfig::from_index(rng.random_range(0..16), nv);
                let (k, q) = (rng.random_range(0..nv), rng.random_range(0..m));
                let coord = match family {
                    0 => ParamCoord::ReA(k),
                    1 => ParamCoord::ImA(k),
                    2 => ParamCoord::ReB(q),
                    3 => ParamCoord::ImB(q),
                    4 => ParamCoord::ReW(k, q),
                    _ => ParamCoord::ImW(k, q),
                };
                let analytic = d_matrix_entry(&p, coord, &v, &vp).unwrap();
                let fd = fd_log_derivative(&p, coord, &v, &vp);
                let err = (analytic - fd).norm() / analytic.norm().max(1.0);
                assert!(err < 1e-6, "{coord:?}: {analytic} vs {fd}");
            }
        }
    }

    #[test]
    fn vector_form_agrees_with_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = RbmParams::random(3, 2, 0.7, &mut rng);
        let v = SpinConfig::from_index(5, 3);
        let vp = SpinConfig::from_index(2, 3);
        let d = d_vector(&log_derivatives(&p, v.spins()), &log_derivatives(&p, vp.spins()));
        for (i, value) in d.iter().enumerate() {
            let coord = ParamCoord::from_index(i, 3, 2).unwrap();
            assert!((d_matrix_entry(&p, coord, &v, &vp).unwrap() - value).norm() < 1e-14);
        }
    }

    #[test]
    fn visible_rows() {
        let p = RbmParams::zeros(2, 1).with_beta(0.5).unwrap();
        let v = SpinConfig::new(vec![1, -1]).unwrap();
        let vp = SpinConfig::new(vec![1, 1]).unwrap();
        assert_eq!(d_matrix_entry(&p, ParamCoord::ReA(0), &v, &vp).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(d_matrix_entry(&p, ParamCoord::ImA(1), &v, &vp).unwrap(), Complex64::new(0.0, -1.0));
        // diagonal entries are real
        let d = d_matrix_entry(&p, ParamCoord::ImA(1), &v, &v).unwrap();
        assert_eq!(d, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let p = RbmParams::zeros(2, 1);
        let v = SpinConfig::all_up(2);
        assert!(d_matrix_entry(&p, ParamCoord::ReB(1), &v, &v).is_err());
        assert!(d_matrix_entry(&p, ParamCoord::ReA(0), &v, &SpinConfig::all_up(3)).is_err());
    }
}
