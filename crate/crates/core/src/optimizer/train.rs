use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gradient::{evaluate_cost, CostEvaluation, EntropyKind};
use super::{ConstraintSet, OptimizerConfig, UpdateMethod, XiSchedule};
use crate::error::{invalid, Error, Result};
use crate::estimators::EstimationMode;
use crate::rbm::{Partition, RbmParams, SpinConfig};
use crate::samplers::{fit_surrogate, sample_replicas, Proposal, ProposalKind, SampleSet, SamplerConfig};
use crate::stats::derive_seed;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// One line of the training trace, describing the parameters at the start of the epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub cost: f64,
    pub entropy_bits: f64,
    pub entropy_std_error: f64,
    pub entropy_kind: EntropyKind,
    pub expectations: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `sum_i |<O_i> - target_i|`.
    pub total_residual: f64,
    /// Mean over replica streams; absent in exact mode.
    pub acceptance_rate: Option<f64>,
    pub xi_values: Vec<f64>,
    /// Norm before clipping.
    pub grad_norm: f64,
    pub grad_clipped: bool,
    pub entropy_clipped: bool,
    /// Coordinates pulled back to the parameter bound after the update.
    pub param_clips: usize,
}

impl EpochRecord {
    pub fn is_finite(&self) -> bool {
        let scalars = [self.cost, self.entropy_bits, self.entropy_std_error, self.total_residual, self.grad_norm];
        scalars.iter().all(|x| x.is_finite())
            && self.acceptance_rate.is_none_or(f64::is_finite)
            && [&self.expectations, &self.residuals, &self.xi_values]
                .iter()
                .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TrainingStatus {
    Completed,
    /// Training stopped at `epoch`; records cover the epochs before it.
    Halted { epoch: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub status: TrainingStatus,
}

impl TrainingTrace {
    pub fn is_complete(&self) -> bool {
        self.status == TrainingStatus::Completed
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// One JSON record per line.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Vec<EpochRecord>> {
        let reader = BufReader::new(File::open(path)?);
        let mut records = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                records.push(serde_json::from_str(&line)?);
            }
        }
        Ok(records)
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// Parameters after the last completed epoch.
    pub params: RbmParams,
    pub trace: TrainingTrace,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(dim: usize) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    fn step(&mut self, x: &mut [f64], g: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * g[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            x[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + ADAM_EPS);
        }
    }
}

fn check_inputs(
    initial: &RbmParams,
    partition: Partition,
    constraints: &ConstraintSet,
    schedule: &XiSchedule,
    opt: &OptimizerConfig,
    sampler: &SamplerConfig,
) -> Result<()> {
    opt.validate()?;
    schedule.validate()?;
    initial.validate()?;
    if initial.n_visible() != partition.n_visible() {
        return Err(Error::DimensionMismatch {
            expected: partition.n_visible(),
            actual: initial.n_visible(),
        });
    }
    if constraints.qubit_count() != partition.n_sys {
        return invalid(format!(
            "constraints act on {} qubits but the system has {}",
            constraints.qubit_count(),
            partition.n_sys
        ));
    }
    if opt.estimation == EstimationMode::Sampled {
        SamplerConfig {
            n_samples: opt.samples_per_epoch,
            ..*sampler
        }
        .validate()?;
    }
    Ok(())
}

fn uniform_batch(n_visible: usize, size: usize, seed: u64) -> Vec<SpinConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| SpinConfig::from_index(rng.random_range(0..1usize << n_visible), n_visible))
        .collect()
}

struct EpochSamples {
    streams: Vec<SampleSet>,
    acceptance: f64,
}

fn draw_samples(
    params: &RbmParams,
    sampler: &SamplerConfig,
    opt: &OptimizerConfig,
    kind: EntropyKind,
    epoch: usize,
    previous: Option<&SampleSet>,
) -> Result<EpochSamples> {
    let seed = derive_seed(opt.seed, epoch as u64);
    let proposal = match sampler.proposal {
        ProposalKind::SurrogateTrotter => {
            let fresh;
            let batch = match previous {
                Some(s) => &s.samples,
                None => {
                    fresh = uniform_batch(params.n_visible(), opt.samples_per_epoch, derive_seed(seed, u64::MAX));
                    &fresh
                }
            };
            let fit = fit_surrogate(params, batch, sampler.trotter)?;
            Proposal::build(ProposalKind::SurrogateTrotter, Some(&fit.surrogate))?
        }
        other => Proposal::build(other, None)?,
    };
    let config = SamplerConfig {
        n_samples: opt.samples_per_epoch,
        seed,
        ..*sampler
    };
    let runs = sample_replicas(params, &config, &proposal, kind.replicas())?;
    let acceptance = runs.iter().map(|(_, d)| d.acceptance_rate).sum::<f64>() / runs.len() as f64;
    Ok(EpochSamples {
        streams: runs.into_iter().map(|(s, _)| s).collect(),
        acceptance,
    })
}

/// Minimizes `-S + sum_i xi_i (<O_i> - target_i)^2` over the RBM parameters.
///
/// Constraint base weights grow with `schedule`. In sampled mode each epoch
/// draws `samples_per_epoch` samples per replica stream with seed
/// `derive_seed(opt.seed, epoch)`; the seed and sample count in `sampler` are
/// ignored. The surrogate proposal is refitted every epoch on the previous
/// epoch's samples, or on uniform configurations in the first epoch.
///
/// A non-finite cost or gradient stops training and returns the records so
/// far with [`TrainingStatus::Halted`]; invalid inputs are errors.
pub fn train(
    initial: &RbmParams,
    partition: Partition,
    constraints: &ConstraintSet,
    schedule: &XiSchedule,
    opt: &OptimizerConfig,
    sampler: &SamplerConfig,
) -> Result<TrainingOutcome> {
    check_inputs(initial, partition, constraints, schedule, opt, sampler)?;
    let mut params = initial.clone();
    let mut adam = Adam::new(params.coordinate_count());
    let mut records = Vec::with_capacity(opt.epochs);
    let mut previous: Option<SampleSet> = None;
    let vne_start = opt.vne_start();

    for epoch in 0..opt.epochs {
        let xis: Vec<f64> = constraints.entries().iter().map(|c| schedule.scaled(c.xi, epoch)).collect();
        let kind = match vne_start {
            Some(start) if epoch >= start => EntropyKind::Vne { cutoff: opt.vne_cutoff },
            _ => EntropyKind::Renyi2,
        };

        let attempt = || -> Result<(CostEvaluation, Option<f64>, Option<SampleSet>)> {
            match opt.estimation {
                EstimationMode::ExactSum => Ok((evaluate_cost(&params, partition, constraints, &xis, kind, None)?, None, None)),
                EstimationMode::Sampled => {
                    let drawn = draw_samples(&params, sampler, opt, kind, epoch, previous.as_ref())?;
                    let eval = evaluate_cost(&params, partition, constraints, &xis, kind, Some(&drawn.streams))?;
                    let first = drawn.streams.into_iter().next();
                    Ok((eval, Some(drawn.acceptance), first))
                }
            }
        };
        let (eval, acceptance_rate, first_stream) = match attempt() {
            Ok(x) => x,
            Err(e @ (Error::NonFinite(_) | Error::EstimationFailure(_))) => {
                log::warn!("halting at epoch {epoch}: {e}");
                return Ok(halted(params, records, epoch, e.to_string()));
            }
            Err(e) => return Err(e),
        };
        if !eval.cost.is_finite() || eval.gradient.iter().any(|g| !g.is_finite()) {
            log::warn!("halting at epoch {epoch}: non-finite cost or gradient");
            return Ok(halted(params, records, epoch, "non-finite cost or gradient".into()));
        }

        let grad_norm = eval.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        let grad_clipped = grad_norm > opt.grad_clip;
        let scale = if grad_clipped { opt.grad_clip / grad_norm } else { 1.0 };
        let g: Vec<f64> = eval.gradient.iter().map(|x| x * scale).collect();
        let mut x = params.pack();
        let lr = opt.learning_rate_at(epoch);
        match opt.method {
            UpdateMethod::PlainGradient => x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= lr * gi),
            UpdateMethod::AdaptiveMoment => adam.step(&mut x, &g, lr),
        }
        let mut next = params.with_packed(&x)?;
        let param_clips = next.clip_to_bound();
        if param_clips > 0 {
            log::warn!("epoch {epoch}: {param_clips} coordinates clipped to the parameter bound");
        }

        let total_residual = eval.residuals.iter().map(|r| r.abs()).sum();
        records.push(EpochRecord {
            epoch,
            cost: eval.cost,
            entropy_bits: eval.entropy_bits,
            entropy_std_error: eval.entropy_std_error,
            entropy_kind: kind,
            expectations: eval.expectations,
            residuals: eval.residuals,
            total_residual,
            acceptance_rate,
            xi_values: xis,
            grad_norm,
            grad_clipped,
            entropy_clipped: eval.entropy_clipped,
            param_clips,
        });
        log::debug!("epoch {epoch}: cost {:.5} residual {total_residual:.4}", eval.cost);
        params = next;
        previous = first_stream;
    }
    Ok(TrainingOutcome {
        params,
        trace: TrainingTrace {
            records,
            status: TrainingStatus::Completed,
        },
    })
}

fn halted(params: RbmParams, records: Vec<EpochRecord>, epoch: usize, reason: String) -> TrainingOutcome {
    TrainingOutcome {
        params,
        trace: TrainingTrace {
            records,
            status: TrainingStatus::Halted { epoch, reason },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::PauliString;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn exact_opt(epochs: usize) -> OptimizerConfig {
        OptimizerConfig {
            epochs,
            learning_rate: 0.05,
            estimation: EstimationMode::ExactSum,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let part = Partition::new(2, 1).unwrap();
        let cs = ConstraintSet::uniform(&[ps("ZZZ")], &[0.1], 1.0).unwrap();
        let p = RbmParams::zeros(3, 2);
        let r = train(&p, part, &cs, &XiSchedule::default(), &exact_opt(2), &SamplerConfig::default());
        assert!(r.is_err());
        let cs = ConstraintSet::uniform(&[ps("ZZ")], &[0.1], 1.0).unwrap();
        let r = train(&RbmParams::zeros(4, 2), part, &cs, &XiSchedule::default(), &exact_opt(2), &SamplerConfig::default());
        assert!(r.is_err());
    }

    #[test]
    fn exact_training_reduces_cost() {
        let part = Partition::new(2, 1).unwrap();
        let cs = ConstraintSet::uniform(&[ps("ZI"), ps("XX")], &[0.6, 0.2], 1.0).unwrap();
        let p = RbmParams::random(3, 2, 0.05, &mut ChaCha8Rng::seed_from_u64(1));
        let out = train(&p, part, &cs, &XiSchedule::default(), &exact_opt(60), &SamplerConfig::default()).unwrap();
        assert!(out.trace.is_complete());
        assert_eq!(out.trace.records.len(), 60);
        assert!(out.trace.records.iter().all(EpochRecord::is_finite));
        let first = &out.trace.records[0];
        let last = out.trace.last().unwrap();
        assert!(last.cost < first.cost);
        assert!(last.acceptance_rate.is_none());
    }

    #[test]
    fn sampled_training_is_deterministic() {
        let part = Partition::new(2, 1).unwrap();
        let cs = ConstraintSet::uniform(&[ps("ZI")], &[0.5], 1.0).unwrap();
        let opt = OptimizerConfig {
            epochs: 4,
            samples_per_epoch: 400,
            seed: 3,
            entropy_mode: super::super::EntropyMode::Renyi2ThenVne,
            vne_cutoff: 3,
            ..OptimizerConfig::default()
        };
        let p = RbmParams::random(3, 2, 0.05, &mut ChaCha8Rng::seed_from_u64(2));
        let mut sampler = SamplerConfig::default();
        for proposal in ProposalKind::ALL {
            sampler.proposal = proposal;
            let a = train(&p, part, &cs, &XiSchedule::default(), &opt, &sampler).unwrap();
            let b = train(&p, part, &cs, &XiSchedule::default(), &opt, &sampler).unwrap();
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.params, b.params);
            let kinds: Vec<EntropyKind> = a.trace.records.iter().map(|r| r.entropy_kind).collect();
            assert_eq!(kinds[3], EntropyKind::Vne { cutoff: 3 });
            assert_eq!(kinds[2], EntropyKind::Renyi2);
            assert!(a.trace.records.iter().all(|r| r.acceptance_rate.is_some()));
        }
    }

    #[test]
    fn jsonl_roundtrip() {
        let part = Partition::new(1, 1).unwrap();
        let cs = ConstraintSet::uniform(&[ps("X")], &[0.3], 1.0).unwrap();
        let out = train(&RbmParams::zeros(2, 1), part, &cs, &XiSchedule::default(), &exact_opt(5), &SamplerConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.jsonl");
        out.trace.write_jsonl(&path).unwrap();
        assert_eq!(TrainingTrace::read_jsonl(&path).unwrap(), out.trace.records);
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 5);
    }
}
