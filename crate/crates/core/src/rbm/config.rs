use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Split of the visible layer into system units followed by environment units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub n_sys: usize,
    pub n_env: usize,
}

impl Partition {
    pub fn new(n_sys: usize, n_env: usize) -> Result<Self> {
        if n_sys == 0 {
            return invalid("partition needs at least one system unit");
        }
        Ok(Self { n_sys, n_env })
    }

    pub fn n_visible(&self) -> usize {
        self.n_sys + self.n_env
    }
}

/// Visible spins, each exactly +1 or -1.
///
/// Spin +1 maps to bit 0 and unit 0 is the most significant bit of
/// [`SpinConfig::index`], matching the dense engine's basis order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return invalid(format!("spin value {s} is not +1 or -1"));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| if index & (1 << (n - 1 - i)) == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
    }

    /// Every configuration over `n` units in index order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = SpinConfig> {
        (0..1usize << n).map(move |i| SpinConfig::from_index(i, n))
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Copy with the first `region` spins taken from `other`.
    pub fn with_region_from(&self, other: &SpinConfig, region: usize) -> SpinConfig {
        let mut spins = self.0.clone();
        spins[..region].copy_from_slice(&other.0[..region]);
        SpinConfig(spins)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(c: SpinConfig) -> Self {
        c.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_convention() {
        let c = SpinConfig::new(vec![1, -1, -1]).unwrap();
        assert_eq!(c.index(), 0b011);
        for i in 0..16 {
            assert_eq!(SpinConfig::from_index(i, 4).index(), i);
        }
        assert!(SpinConfig::new(vec![1, 0]).is_err());
    }

    #[test]
    fn region_swap() {
        let u = SpinConfig::new(vec![1, 1, 1, 1]).unwrap();
        let v = SpinConfig::new(vec![-1, -1, -1, -1]).unwrap();
        assert_eq!(u.with_region_from(&v, 2).spins(), &[-1, -1, 1, 1]);
    }

    #[test]
    fn partition_rules() {
        assert!(Partition::new(0, 2).is_err());
        assert_eq!(Partition::new(3, 0).unwrap().n_visible(), 3);
    }
}
