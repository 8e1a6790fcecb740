//! Metropolis-Hastings sampling of `|psi|^2` with local, uniform and
//! surrogate-quench proposals.

mod mh;
mod surrogate;

pub use mh::{
    acceptance_probability, mh_sample, mh_sample_with, sample_replicas, transition_matrix, tv_distance,
    Proposal, ProposalKind, SampleSet, SamplerConfig, SamplerDiagnostics, TRANSITION_MAX_VISIBLE,
};
pub use surrogate::{
    fit_surrogate, surrogate_features, trotter_proposal_matrix, ProposalMatrix, SurrogateFit,
    SurrogateParams, TrotterSettings, TROTTER_MAX_VISIBLE,
};
