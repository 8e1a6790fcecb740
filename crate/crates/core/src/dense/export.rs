use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PauliString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTarget {
    pub pauli: PauliString,
    pub target: f64,
}

/// Target-state document written by the generator and read by training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetDocument {
    pub system_qubits: usize,
    pub env_qubits: usize,
    pub circuit_seed: u64,
    pub layers: usize,
    pub observables: Vec<ObservableTarget>,
    pub exact_entropy_s2_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_entropy_vne_bits: Option<f64>,
}

impl TargetDocument {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let doc: TargetDocument = serde_json::from_str(&text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.observables.is_empty() {
            return Err(Error::InvalidInput("target has no observables".into()));
        }
        for o in &self.observables {
            if o.pauli.len() != self.system_qubits {
                return Err(Error::DimensionMismatch {
                    expected: self.system_qubits,
                    actual: o.pauli.len(),
                });
            }
            if !(-1.0..=1.0).contains(&o.target) {
                return Err(Error::InvalidInput(format!("target {} outside [-1, 1]", o.target)));
            }
        }
        Ok(())
    }

    pub fn paulis(&self) -> Vec<PauliString> {
        self.observables.iter().map(|o| o.pauli.clone()).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.target).collect()
    }
}

/// Writes amplitudes as interleaved little-endian `f64` pairs `(re, im)`.
pub fn write_amplitudes(path: &Path, amplitudes: &[Complex64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(amplitudes.len() * 16);
    for a in amplitudes {
        bytes.extend_from_slice(&a.re.to_le_bytes());
        bytes.extend_from_slice(&a.im.to_le_bytes());
    }
    fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

pub fn read_amplitudes(path: &Path) -> Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse(format!(
            "amplitude file length {} is not a multiple of 16",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}
