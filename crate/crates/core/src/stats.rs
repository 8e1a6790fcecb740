//! Small statistical helpers shared by the samplers and estimators.

use num_complex::Complex64;

/// Window constant for the automatic autocorrelation window.
pub const SOKAL_WINDOW: f64 = 5.0;

/// One step of the splitmix64 generator.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for a sub-stream (replica, chain, epoch): `splitmix64(base ^ index)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ index)
}

/// Pairwise (tree) summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance (zero for fewer than two values).
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// Integrated autocorrelation time `tau = 1 + 2 sum_t rho(t)` with the
/// self-consistent window `M >= c * tau(M)`. Independent draws give 1.
pub fn integrated_autocorr_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let m = mean(series);
    let centered: Vec<f64> = series.iter().map(|v| v - m).collect();
    let c0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 <= 0.0 || !c0.is_finite() {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n {
        let c: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= SOKAL_WINDOW * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Autocorrelation time pooled over independent chains, weighted by chain length.
pub fn pooled_autocorr_time<'a>(chains: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let mut weighted = 0.0;
    let mut total = 0usize;
    for chain in chains {
        if chain.is_empty() {
            continue;
        }
        weighted += integrated_autocorr_time(chain) * chain.len() as f64;
        total += chain.len();
    }
    if total == 0 {
        1.0
    } else {
        weighted / total as f64
    }
}

/// Standard error of the mean of correlated chains, using `N_eff = N / tau`.
pub fn correlated_std_error(values: &[f64], chain_lengths: &[usize]) -> (f64, f64) {
    let n = values.len();
    if n < 2 {
        return (0.0, 1.0);
    }
    let mut chains = Vec::with_capacity(chain_lengths.len());
    let mut start = 0;
    for &len in chain_lengths {
        chains.push(&values[start..start + len]);
        start += len;
    }
    let tau = pooled_autocorr_time(chains);
    let n_eff = (n as f64 / tau).max(1.0);
    ((variance(values) / n_eff).sqrt(), tau)
}

/// Median of a slice (NaN for empty input).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairwise_matches_naive_sum() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-10);
    }

    #[test]
    fn iid_series_has_unit_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let tau = integrated_autocorr_time(&v);
        assert!((tau - 1.0).abs() < 0.2, "tau = {tau}");
    }

    #[test]
    fn ar1_series_tau_matches_closed_form() {
        // AR(1) with coefficient phi has tau = (1 + phi) / (1 - phi).
        let phi: f64 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut x = 0.0;
        let v: Vec<f64> = (0..200_000)
            .map(|_| {
                x = phi * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let tau = integrated_autocorr_time(&v);
        let expected = (1.0 + phi) / (1.0 - phi);
        assert!((tau - expected).abs() / expected < 0.1, "tau = {tau}");
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
