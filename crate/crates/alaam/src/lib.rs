//! Autologistic actor attribute models (ALAAMs): given a fixed network and
//! node covariates, a binary node outcome `y` follows the exponential-family
//! distribution `Pr(Y = y) ∝ exp(Σ_I θ_I z_I(y))` over sufficient statistics
//! `z_I` built from the outcome, the ties, and the covariates — the social
//! influence counterpart of an exponential random graph model.
//!
//! The crate provides:
//! - the data model and file formats ([`network`], [`attributes`],
//!   [`outcome`], [`fileio`]);
//! - the effect catalogue and change statistics ([`effects`]);
//! - an exact Metropolis sampler over outcome vectors ([`sampler`]);
//! - two estimators: three-phase stochastic approximation ([`sa`]) and
//!   equilibrium expectation with pooled parallel runs ([`ee`]);
//! - pooling, goodness-of-fit, and degeneracy diagnostics ([`inference`]);
//! - a simulation-study harness with error-rate reporting ([`study`]).
//!
//! Every stochastic entry point takes an explicit seed and is deterministic
//! given its inputs ([`rng`]).

pub mod attributes;
pub mod ee;
pub mod effects;
pub mod fileio;
pub mod inference;
pub mod network;
pub mod outcome;
pub mod rng;
pub mod sa;
pub mod sampler;
pub mod stats;
pub mod study;

pub use attributes::{AttrColumn, AttrKind, AttributeTable};
pub use ee::{run_ee, run_ee_many, summarize_run, EeChain, EeConfig, EeFailReason, RunEstimate};
pub use effects::{parse_effect, parse_model, EffectKind, EffectSpec, Model};
pub use inference::{degeneracy_check, gof_test, pool_runs, DegeneracyCheck, GofReport, PooledEstimate};
pub use network::{Network, NetworkKind, TwoPathMatrix};
pub use outcome::{Outcome, OutcomeVector, ZoneAssignment};
pub use sa::{estimate_sa, SaConfig, SaResult};
pub use sampler::{simulate_outcomes, ChainState, SimOptions};
pub use study::{run_study, wilson_interval, StudyConfig, StudyReport};

/// Borrowed view of one dataset: the fixed network and its covariates.
///
/// Samplers and estimators take this pair everywhere; the outcome vector
/// travels separately because it is the state being sampled.
#[derive(Clone, Copy)]
pub struct Data<'a> {
    pub net: &'a Network,
    pub attrs: &'a AttributeTable,
}

impl<'a> Data<'a> {
    pub fn new(net: &'a Network, attrs: &'a AttributeTable) -> Data<'a> {
        Data { net, attrs }
    }
}
