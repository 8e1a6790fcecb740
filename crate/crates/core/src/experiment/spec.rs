use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dense::DEFAULT_MAX_QUBITS;
use crate::error::{invalid, Error, Result};
use crate::optimizer::{OptimizerConfig, XiSchedule};
use crate::samplers::SamplerConfig;

/// Environment variable naming the default output root.
pub const OUTPUT_ENV_VAR: &str = "MAXENT_QST_OUT";
/// Largest number of environment units in the model ansatz.
pub const MAX_MODEL_ENV: usize = 8;

/// Everything needed to generate a target and reconstruct it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub n_sys: usize,
    /// Environment qubits of the pure circuit state whose reduction is the target.
    pub n_env_target: usize,
    /// Environment units of the RBM purification.
    pub n_env_model: usize,
    pub n_hidden: usize,
    pub n_observables: usize,
    pub observable_seed: u64,
    pub circuit_layers: usize,
    pub circuit_seed: u64,
    /// Independent training runs in a sweep.
    pub runs: usize,
    pub sampler: SamplerConfig,
    pub optimizer: OptimizerConfig,
    pub schedule: XiSchedule,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_sys: 3,
            n_env_target: 3,
            n_env_model: 3,
            n_hidden: 3,
            n_observables: 4,
            observable_seed: 0,
            circuit_layers: 4,
            circuit_seed: 0,
            runs: 1,
            sampler: SamplerConfig::default(),
            optimizer: OptimizerConfig::default(),
            schedule: XiSchedule::default(),
            output_dir: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sys == 0 {
            return invalid("n_sys must be at least 1");
        }
        if self.n_observables == 0 {
            return invalid("n_observables must be at least 1");
        }
        if (self.n_observables as f64) >= 4f64.powi(self.n_sys as i32) {
            return invalid(format!(
                "{} distinct non-identity observables do not exist on {} qubits",
                self.n_observables, self.n_sys
            ));
        }
        if self.n_sys + self.n_env_target > DEFAULT_MAX_QUBITS {
            return Err(Error::SizeOverCap {
                qubits: self.n_sys + self.n_env_target,
                limit: DEFAULT_MAX_QUBITS,
            });
        }
        if self.n_env_model > MAX_MODEL_ENV {
            return invalid(format!("n_env_model {} exceeds the cap {MAX_MODEL_ENV}", self.n_env_model));
        }
        if self.runs == 0 {
            return invalid("runs must be at least 1");
        }
        if self.circuit_layers == 0 {
            return invalid("circuit_layers must be at least 1");
        }
        self.sampler.validate()?;
        self.optimizer.validate()?;
        self.schedule.validate()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let spec: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Applies `dotted.key=value` overrides; see [`apply_overrides`].
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let spec = apply_overrides(self, overrides)?;
        spec.validate()?;
        Ok(spec)
    }

    /// `output_dir`, else the environment default, else `maxent-out`.
    pub fn resolve_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("maxent-out"))
    }

    pub fn entropy_upper_bound(&self) -> f64 {
        self.n_sys.min(self.n_env_model) as f64
    }
}

/// Applies `dotted.key=value` overrides to any serializable config. Values
/// are parsed as JSON and fall back to plain strings; unknown keys are rejected.
pub fn apply_overrides<T, S>(config: &T, overrides: &[S]) -> Result<T>
where
    T: Serialize + DeserializeOwned,
    S: AsRef<str>,
{
    let mut doc = serde_json::to_value(config)?;
    for item in overrides {
        let item = item.as_ref();
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("override '{item}' is not key=value")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let slot = doc
            .pointer_mut(&format!("/{}", key.trim().replace('.', "/")))
            .ok_or_else(|| Error::InvalidInput(format!("unknown setting '{key}'")))?;
        *slot = value;
    }
    serde_json::from_value(doc).map_err(|e| Error::InvalidInput(e.to_string()))
}
