use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dense::PauliString;
use crate::error::{invalid, Result};
use crate::estimators::EstimationMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub obs: PauliString,
    pub target: f64,
    pub xi: f64,
}

/// Observable constraints with their base penalty weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Constraint>", into = "Vec<Constraint>")]
pub struct ConstraintSet {
    entries: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(entries: Vec<Constraint>) -> Result<Self> {
        if entries.is_empty() {
            return invalid("constraint set is empty");
        }
        let mut seen = HashSet::new();
        let n = entries[0].obs.len();
        for c in &entries {
            if !seen.insert(c.obs.identifier()) {
                return invalid(format!("duplicate constraint {}", c.obs.identifier()));
            }
            if c.obs.len() != n {
                return invalid("constraint observables differ in length");
            }
            if !(-1.0..=1.0).contains(&c.target) {
                return invalid(format!("target {} outside [-1, 1]", c.target));
            }
            if !(c.xi > 0.0 && c.xi.is_finite()) {
                return invalid(format!("penalty weight {} must be positive", c.xi));
            }
        }
        Ok(Self { entries })
    }

    /// Same base weight for every observable.
    pub fn uniform(observables: &[PauliString], targets: &[f64], xi: f64) -> Result<Self> {
        if observables.len() != targets.len() {
            return invalid("observable and target counts differ");
        }
        Self::new(
            observables
                .iter()
                .zip(targets)
                .map(|(o, &t)| Constraint {
                    obs: o.clone(),
                    target: t,
                    xi,
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Constraint] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn qubit_count(&self) -> usize {
        self.entries[0].obs.len()
    }
}

impl TryFrom<Vec<Constraint>> for ConstraintSet {
    type Error = crate::Error;

    fn try_from(entries: Vec<Constraint>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<ConstraintSet> for Vec<Constraint> {
    fn from(set: ConstraintSet) -> Self {
        set.entries
    }
}

/// Multiplicative penalty growth: `xi(epoch) = min(xi_0 growth^floor(epoch / block), xi_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct XiSchedule {
    pub xi_init: f64,
    pub growth: f64,
    pub block: usize,
    pub xi_max: f64,
}

impl Default for XiSchedule {
    fn default() -> Self {
        Self {
            xi_init: 0.1,
            growth: 1.2,
            block: 10,
            xi_max: 100.0,
        }
    }
}

impl XiSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_init > 0.0) || !(self.growth >= 1.0) || self.block == 0 {
            return invalid("xi schedule needs xi_init > 0, growth >= 1, block >= 1");
        }
        if !(self.xi_init <= self.xi_max) {
            return invalid(format!("xi_init {} exceeds xi_max {}", self.xi_init, self.xi_max));
        }
        Ok(())
    }

    /// Weight at `epoch` for a constraint with base weight `base`.
    pub fn scaled(&self, base: f64, epoch: usize) -> f64 {
        let steps = (epoch / self.block) as i32;
        (base * self.growth.powi(steps)).min(self.xi_max)
    }

    pub fn value_at(&self, epoch: usize) -> f64 {
        self.scaled(self.xi_init, epoch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMethod {
    PlainGradient,
    AdaptiveMoment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    Renyi2,
    /// Second-order Rényi entropy, switching to the polynomial von Neumann
    /// estimate for the final tenth of the epochs.
    Renyi2ThenVne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Learning rate in the last epoch as a fraction of `learning_rate`,
    /// reached by linear decay; 1 keeps it constant.
    pub final_lr_fraction: f64,
    pub method: UpdateMethod,
    pub samples_per_epoch: usize,
    pub entropy_mode: EntropyMode,
    pub vne_cutoff: usize,
    pub seed: u64,
    pub estimation: EstimationMode,
    /// Gradients with a larger Euclidean norm are rescaled to this norm.
    pub grad_clip: f64,
    /// Standard deviation of each real coordinate at initialization.
    pub init_std: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.01,
            final_lr_fraction: 1.0,
            method: UpdateMethod::AdaptiveMoment,
            samples_per_epoch: 2000,
            entropy_mode: EntropyMode::Renyi2,
            vne_cutoff: 8,
            seed: 0,
            estimation: EstimationMode::Sampled,
            grad_clip: 10.0,
            init_std: 0.05,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.samples_per_epoch == 0 {
            return invalid("epochs and samples_per_epoch must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return invalid(format!("final_lr_fraction must be in (0, 1], got {}", self.final_lr_fraction));
        }
        if self.vne_cutoff < 2 {
            return invalid("vne_cutoff must be at least 2");
        }
        if !(self.grad_clip > 0.0) || !(self.init_std >= 0.0) {
            return invalid("grad_clip must be positive and init_std non-negative");
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let progress = if self.epochs > 1 { epoch as f64 / (self.epochs - 1) as f64 } else { 0.0 };
        self.learning_rate * (1.0 - (1.0 - self.final_lr_fraction) * progress.min(1.0))
    }

    /// First epoch that uses the von Neumann estimate, if any.
    pub fn vne_start(&self) -> Option<usize> {
        match self.entropy_mode {
            EntropyMode::Renyi2 => None,
            EntropyMode::Renyi2ThenVne => Some(self.epochs - self.epochs.div_ceil(10)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn constraint_validation() {
        assert!(ConstraintSet::new(vec![]).is_err());
        assert!(ConstraintSet::uniform(&[ps("XZ"), ps("XZ")], &[0.1, 0.2], 1.0).is_err());
        assert!(ConstraintSet::uniform(&[ps("XZ")], &[1.2], 1.0).is_err());
        assert!(ConstraintSet::uniform(&[ps("XZ")], &[0.2], 0.0).is_err());
        let set = ConstraintSet::uniform(&[ps("XZ"), ps("ZZ")], &[0.1, -0.3], 0.5).unwrap();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(serde_json::from_str::<ConstraintSet>(&json).unwrap(), set);
    }

    #[test]
    fn schedule_growth_and_cap() {
        let s = XiSchedule::default();
        assert_eq!(s.value_at(0), 0.1);
        assert_eq!(s.value_at(9), 0.1);
        assert!((s.value_at(10) - 0.12).abs() < 1e-15);
        assert_eq!(s.value_at(100_000), 100.0);
        assert!(XiSchedule { xi_init: 200.0, ..s }.validate().is_err());
    }

    #[test]
    fn learning_rate_decay() {
        let c = OptimizerConfig {
            epochs: 11,
            learning_rate: 0.1,
            final_lr_fraction: 0.2,
            ..OptimizerConfig::default()
        };
        assert_eq!(c.learning_rate_at(0), 0.1);
        assert!((c.learning_rate_at(5) - 0.06).abs() < 1e-15);
        assert!((c.learning_rate_at(10) - 0.02).abs() < 1e-15);
        assert_eq!(OptimizerConfig::default().learning_rate_at(299), 0.01);
        assert!(OptimizerConfig { final_lr_fraction: 0.0, ..c }.validate().is_err());
    }

    #[test]
    fn vne_window_is_final_tenth() {
        let mut c = OptimizerConfig {
            epochs: 100,
            entropy_mode: EntropyMode::Renyi2ThenVne,
            ..OptimizerConfig::default()
        };
        assert_eq!(c.vne_start(), Some(90));
        c.epochs = 5;
        assert_eq!(c.vne_start(), Some(4));
        c.entropy_mode = EntropyMode::Renyi2;
        assert_eq!(c.vne_start(), None);
    }
}
