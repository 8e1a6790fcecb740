use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::surrogate::{trotter_proposal_matrix, ProposalMatrix, SurrogateParams, TrotterSettings};
use crate::error::{invalid, Error, Result};
use crate::rbm::{AmplitudeTable, LogPsi, RbmParams, SpinConfig, TABLE_MAX_VISIBLE};
use crate::stats::{derive_seed, pooled_autocorr_time};

const MAX_START_DRAWS: usize = 100;
/// Largest visible layer accepted by [`transition_matrix`].
pub const TRANSITION_MAX_VISIBLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalKind {
    LocalFlip,
    Uniform,
    SurrogateTrotter,
}

impl ProposalKind {
    pub const ALL: [ProposalKind; 3] = [
        ProposalKind::LocalFlip,
        ProposalKind::Uniform,
        ProposalKind::SurrogateTrotter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProposalKind::LocalFlip => "local_flip",
            ProposalKind::Uniform => "uniform",
            ProposalKind::SurrogateTrotter => "surrogate_trotter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Total kept samples, split as evenly as possible across chains.
    pub n_samples: usize,
    pub burn_in: usize,
    /// Steps between kept samples. Keep it odd: a local-flip chain on a nearly
    /// flat distribution alternates magnetization parity every step.
    pub thinning: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub proposal: ProposalKind,
    pub trotter: TrotterSettings,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            burn_in: 200,
            thinning: 3,
            n_chains: 4,
            seed: 0,
            proposal: ProposalKind::LocalFlip,
            trotter: TrotterSettings::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.thinning == 0 || self.n_chains == 0 {
            return invalid("n_samples, thinning and n_chains must be at least 1");
        }
        if self.n_chains > self.n_samples {
            return invalid(format!(
                "{} chains cannot share {} samples",
                self.n_chains, self.n_samples
            ));
        }
        self.trotter.validate()
    }

    fn chain_lengths(&self) -> Vec<usize> {
        let base = self.n_samples / self.n_chains;
        let extra = self.n_samples % self.n_chains;
        (0..self.n_chains).map(|c| base + usize::from(c < extra)).collect()
    }
}

/// Proposal ready for use by a chain; the Trotter matrix is shared between chains.
#[derive(Debug, Clone)]
pub enum Proposal {
    LocalFlip,
    Uniform,
    Trotter(Arc<ProposalMatrix>),
}

impl Proposal {
    pub fn build(kind: ProposalKind, surrogate: Option<&SurrogateParams>) -> Result<Self> {
        match (kind, surrogate) {
            (ProposalKind::LocalFlip, None) => Ok(Proposal::LocalFlip),
            (ProposalKind::Uniform, None) => Ok(Proposal::Uniform),
            (ProposalKind::SurrogateTrotter, Some(s)) => {
                Ok(Proposal::Trotter(Arc::new(trotter_proposal_matrix(s)?)))
            }
            (ProposalKind::SurrogateTrotter, None) => invalid("surrogate proposal needs surrogate parameters"),
            (_, Some(_)) => invalid("surrogate parameters given for a non-surrogate proposal"),
        }
    }

    pub fn kind(&self) -> ProposalKind {
        match self {
            Proposal::LocalFlip => ProposalKind::LocalFlip,
            Proposal::Uniform => ProposalKind::Uniform,
            Proposal::Trotter(_) => ProposalKind::SurrogateTrotter,
        }
    }

    /// `q(to|from)` over basis indices of `n` units.
    pub fn probability(&self, n: usize, from: usize, to: usize) -> f64 {
        match self {
            Proposal::LocalFlip => {
                let diff = from ^ to;
                if diff.count_ones() == 1 {
                    1.0 / n as f64
                } else {
                    0.0
                }
            }
            Proposal::Uniform => 1.0 / (1u64 << n) as f64,
            Proposal::Trotter(q) => q.prob(from, to),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n >= usize::BITS as usize {
            return invalid(format!("sampler supports 1..{} visible units, got {n}", usize::BITS - 1));
        }
        if let Proposal::Trotter(q) = self {
            if q.n_visible() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: q.n_visible(),
                });
            }
        }
        Ok(())
    }
}

/// `min(1, pi(to) q(from|to) / (pi(from) q(to|from)))` in log form.
pub fn acceptance_probability(log_p_from: f64, log_p_to: f64, q_forward: f64, q_backward: f64) -> f64 {
    if q_backward <= 0.0 || log_p_to == f64::NEG_INFINITY {
        return 0.0;
    }
    let log_ratio = log_p_to - log_p_from + (q_backward / q_forward).ln();
    if log_ratio >= 0.0 {
        1.0
    } else {
        log_ratio.exp()
    }
}

/// Concatenated chain output, chain by chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<SpinConfig>,
    pub chain_lengths: Vec<usize>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerDiagnostics {
    pub proposal: ProposalKind,
    pub acceptance_rate: f64,
    pub autocorr_time: f64,
    pub tv_distance_if_exact_available: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

struct ChainOutput {
    samples: Vec<SpinConfig>,
    accepted: usize,
    steps: usize,
    magnetization: Vec<f64>,
}

fn index_of(spins: &[i8]) -> usize {
    spins.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
}

fn random_spins(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn run_chain(
    psi: &LogPsi,
    n: usize,
    proposal: &Proposal,
    length: usize,
    burn_in: usize,
    thinning: usize,
    seed: u64,
) -> Result<ChainOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins = random_spins(&mut rng, n);
    let mut log_p = psi.log_prob(&spins);
    let mut draws = 1;
    while !log_p.is_finite() {
        if draws >= MAX_START_DRAWS {
            return Err(Error::EstimationFailure(format!(
                "no start configuration with nonzero amplitude after {MAX_START_DRAWS} draws"
            )));
        }
        spins = random_spins(&mut rng, n);
        log_p = psi.log_prob(&spins);
        draws += 1;
    }

    let total_steps = burn_in + length * thinning;
    let mut out = ChainOutput {
        samples: Vec::with_capacity(length),
        accepted: 0,
        steps: 0,
        magnetization: Vec::with_capacity(length),
    };
    let mut candidate = spins.clone();
    for step in 0..total_steps {
        candidate.copy_from_slice(&spins);
        let (q_fwd, q_bwd) = match proposal {
            Proposal::LocalFlip => {
                let k = rng.random_range(0..n);
                candidate[k] = -candidate[k];
                (1.0, 1.0)
            }
            Proposal::Uniform => {
                for s in candidate.iter_mut() {
                    *s = if rng.random::<bool>() { 1 } else { -1 };
                }
                (1.0, 1.0)
            }
            Proposal::Trotter(q) => {
                let from = index_of(&spins);
                let to = q.sample_row(from, rng.random::<f64>());
                for (i, s) in candidate.iter_mut().enumerate() {
                    *s = if to & (1 << (n - 1 - i)) == 0 { 1 } else { -1 };
                }
                (q.prob(from, to), q.prob(to, from))
            }
        };
        let log_p_new = psi.log_prob(&candidate);
        let alpha = acceptance_probability(log_p, log_p_new, q_fwd, q_bwd);
        let accept = rng.random::<f64>() < alpha;
        if accept {
            std::mem::swap(&mut spins, &mut candidate);
            log_p = log_p_new;
        }
        if step >= burn_in {
            out.steps += 1;
            out.accepted += usize::from(accept);
            if (step - burn_in + 1).is_multiple_of(thinning) {
                out.magnetization.push(spins.iter().map(|&s| f64::from(s)).sum());
                out.samples.push(SpinConfig::new(spins.clone())?);
            }
        }
    }
    Ok(out)
}

/// Empirical total-variation distance to an exact distribution over basis indices.
pub fn tv_distance(samples: &[SpinConfig], exact: &[f64]) -> f64 {
    let mut counts = vec![0usize; exact.len()];
    for s in samples {
        counts[s.index()] += 1;
    }
    let n = samples.len() as f64;
    0.5 * counts
        .iter()
        .zip(exact)
        .map(|(&c, &p)| (c as f64 / n - p).abs())
        .sum::<f64>()
}

/// Metropolis-Hastings sampling of `|psi|^2` with a prepared proposal.
pub fn mh_sample_with(
    params: &RbmParams,
    config: &SamplerConfig,
    proposal: &Proposal,
) -> Result<(SampleSet, SamplerDiagnostics)> {
    config.validate()?;
    let n = params.n_visible();
    proposal.check(n)?;
    let psi = LogPsi::new(params);
    let lengths = config.chain_lengths();
    let outputs: Vec<ChainOutput> = lengths
        .par_iter()
        .enumerate()
        .map(|(c, &len)| {
            run_chain(
                &psi,
                n,
                proposal,
                len,
                config.burn_in,
                config.thinning,
                derive_seed(config.seed, c as u64),
            )
        })
        .collect::<Result<_>>()?;

    let accepted: usize = outputs.iter().map(|o| o.accepted).sum();
    let steps: usize = outputs.iter().map(|o| o.steps).sum();
    let autocorr_time = pooled_autocorr_time(outputs.iter().map(|o| o.magnetization.as_slice()));
    let samples: Vec<SpinConfig> = outputs.into_iter().flat_map(|o| o.samples).collect();
    let tv = if n <= TABLE_MAX_VISIBLE {
        AmplitudeTable::new(params)
            .ok()
            .map(|t| tv_distance(&samples, &t.probabilities()))
    } else {
        None
    };
    let diagnostics = SamplerDiagnostics {
        proposal: proposal.kind(),
        acceptance_rate: accepted as f64 / steps as f64,
        autocorr_time,
        tv_distance_if_exact_available: tv,
        n_samples: samples.len(),
        seed: config.seed,
    };
    Ok((
        SampleSet {
            samples,
            chain_lengths: lengths,
        },
        diagnostics,
    ))
}

/// Metropolis-Hastings sampling of `|psi|^2`. `surrogate` must be present
/// exactly when the proposal is [`ProposalKind::SurrogateTrotter`].
pub fn mh_sample(
    params: &RbmParams,
    config: &SamplerConfig,
    surrogate: Option<&SurrogateParams>,
) -> Result<(SampleSet, SamplerDiagnostics)> {
    let proposal = Proposal::build(config.proposal, surrogate)?;
    mh_sample_with(params, config, &proposal)
}

/// `k` independent streams; replica `r` runs with base seed `derive_seed(seed, r)`.
pub fn sample_replicas(
    params: &RbmParams,
    config: &SamplerConfig,
    proposal: &Proposal,
    k: usize,
) -> Result<Vec<(SampleSet, SamplerDiagnostics)>> {
    if k < 2 {
        return invalid(format!("replica count must be at least 2, got {k}"));
    }
    (0..k)
        .map(|r| {
            let replica = SamplerConfig {
                seed: derive_seed(config.seed, r as u64),
                ..*config
            };
            mh_sample_with(params, &replica, proposal)
        })
        .collect()
}

/// Dense MH transition matrix `T(v, v')` for one step of the chain.
pub fn transition_matrix(params: &RbmParams, proposal: &Proposal) -> Result<DMatrix<f64>> {
    let n = params.n_visible();
    proposal.check(n)?;
    crate::dense::check_dense_size(n, TRANSITION_MAX_VISIBLE)?;
    let dim = 1usize << n;
    let psi = LogPsi::new(params);
    let log_p: Vec<f64> = (0..dim)
        .map(|i| psi.log_prob(SpinConfig::from_index(i, n).spins()))
        .collect();
    let mut t = DMatrix::<f64>::zeros(dim, dim);
    for from in 0..dim {
        let mut stay = 1.0;
        for to in 0..dim {
            if to == from {
                continue;
            }
            let q_fwd = proposal.probability(n, from, to);
            if q_fwd == 0.0 {
                continue;
            }
            let q_bwd = proposal.probability(n, to, from);
            let value = q_fwd * acceptance_probability(log_p[from], log_p[to], q_fwd, q_bwd);
            t[(from, to)] = value;
            stay -= value;
        }
        t[(from, from)] = stay;
    }
    Ok(t)
}
