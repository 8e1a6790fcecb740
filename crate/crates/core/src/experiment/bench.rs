use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rbm::{RbmParams, SpinConfig};
use crate::samplers::{
    fit_surrogate, mh_sample_with, Proposal, ProposalKind, SamplerConfig, SamplerDiagnostics, TROTTER_MAX_VISIBLE,
};

/// Fixed random RBM on which every proposal kind is run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSpec {
    pub n_visible: usize,
    pub n_hidden: usize,
    /// Standard deviation of each real parameter coordinate; 0 gives the uniform distribution.
    pub param_std: f64,
    pub param_seed: u64,
    pub proposals: Vec<ProposalKind>,
    pub sampler: SamplerConfig,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            n_visible: 6,
            n_hidden: 4,
            param_std: 0.3,
            param_seed: 0,
            proposals: ProposalKind::ALL.to_vec(),
            sampler: SamplerConfig {
                n_samples: 200_000,
                thinning: 7,
                ..SamplerConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n_visible: usize,
    pub n_hidden: usize,
    /// Residual of the surrogate fit, when the surrogate proposal was run.
    pub surrogate_residual: Option<f64>,
    pub diagnostics: Vec<SamplerDiagnostics>,
}

/// Runs every requested proposal on the same instance with the same seed.
/// The surrogate is fitted over all configurations.
pub fn cmd_bench_sampler(spec: &BenchSpec) -> Result<BenchReport> {
    if spec.n_visible == 0 || spec.n_visible > TROTTER_MAX_VISIBLE {
        return invalid(format!("n_visible must be in 1..={TROTTER_MAX_VISIBLE} for an exact comparison"));
    }
    if spec.proposals.is_empty() {
        return invalid("no proposals requested");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.param_seed);
    let params = RbmParams::random(spec.n_visible, spec.n_hidden, spec.param_std, &mut rng);
    let mut surrogate_residual = None;
    let diagnostics = spec
        .proposals
        .iter()
        .map(|&kind| {
            let proposal = match kind {
                ProposalKind::SurrogateTrotter => {
                    let batch: Vec<SpinConfig> = SpinConfig::enumerate(spec.n_visible).collect();
                    let fit = fit_surrogate(&params, &batch, spec.sampler.trotter)?;
                    surrogate_residual = Some(fit.residual);
                    Proposal::build(kind, Some(&fit.surrogate))?
                }
                other => Proposal::build(other, None)?,
            };
            Ok(mh_sample_with(&params, &spec.sampler, &proposal)?.1)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        n_visible: spec.n_visible,
        n_hidden: spec.n_hidden,
        surrogate_residual,
        diagnostics,
    })
}
