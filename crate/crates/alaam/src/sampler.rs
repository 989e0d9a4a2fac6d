//! Metropolis sampler over outcome vectors.
//!
//! Each step picks a free node uniformly at random and proposes toggling its
//! outcome. With `delta` the change-statistic vector of the 0→1 flip (for a
//! 1→0 proposal the node is virtually reset to 0 first and the vector
//! negated), the proposal is accepted with probability
//! `min(1, exp(theta · delta))` — the Metropolis rule for the model's
//! exponential family, so the chain's stationary distribution is exactly the
//! model distribution over outcomes of the free nodes.
//!
//! The chain tracks its statistic vector incrementally relative to the
//! start state; nothing is ever recounted from scratch inside the loop.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::effects::Model;
use crate::outcome::{Outcome, OutcomeVector};
use crate::rng::chain_rng;
use crate::Data;

/// A running Metropolis chain: current outcome, parameters, and the
/// statistic vector relative to the start state.
pub struct ChainState {
    outcome: OutcomeVector,
    theta: Vec<f64>,
    z_rel: Vec<f64>,
    accepted: u64,
    proposals: u64,
    rng: ChaCha8Rng,
    buf: Vec<f64>,
}

impl ChainState {
    /// Starts a chain at `outcome` under `theta`, seeding the generator.
    ///
    /// Panics if no node is free or the parameter dimension does not match
    /// the model.
    pub fn new(model: &Model, outcome: OutcomeVector, theta: Vec<f64>, seed: u64) -> ChainState {
        assert!(!outcome.free_nodes().is_empty(), "a sampler needs at least one free node");
        assert_eq!(theta.len(), model.p(), "theta dimension must match the model");
        let p = model.p();
        ChainState {
            outcome,
            theta,
            z_rel: vec![0.0; p],
            accepted: 0,
            proposals: 0,
            rng: chain_rng(seed),
            buf: vec![0.0; p],
        }
    }

    pub fn outcome(&self) -> &OutcomeVector {
        &self.outcome
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Replaces the parameters mid-chain (used by estimators between bursts).
    pub fn set_theta(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.theta.len());
        self.theta.copy_from_slice(theta);
    }

    /// Statistic vector of the current outcome minus that of the start
    /// outcome, maintained incrementally.
    pub fn z_relative(&self) -> &[f64] {
        &self.z_rel
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// Accepted share of all proposals so far (1.0 before any proposal).
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One Metropolis proposal; returns whether it was accepted.
pub fn metropolis_step(model: &Model, data: Data, state: &mut ChainState) -> bool {
    let free = state.outcome.free_nodes();
    let i = free[state.rng.gen_range(0..free.len())];
    state.proposals += 1;

    let was_one = state.outcome.is_one(i);
    if was_one {
        // Virtual 0-state: change statistics are defined for the 0→1 flip.
        state.outcome.set(i, Outcome::Zero);
    }
    model.change_stats(data.net, data.attrs, &state.outcome, i, &mut state.buf);
    let mut log_ratio = dot(&state.theta, &state.buf);
    if was_one {
        log_ratio = -log_ratio;
    }
    let accept = log_ratio >= 0.0 || state.rng.gen::<f64>() < log_ratio.exp();
    if accept {
        state.accepted += 1;
        if was_one {
            for (z, d) in state.z_rel.iter_mut().zip(&state.buf) {
                *z -= d;
            }
        } else {
            state.outcome.set(i, Outcome::One);
            for (z, d) in state.z_rel.iter_mut().zip(&state.buf) {
                *z += d;
            }
        }
    } else if was_one {
        state.outcome.set(i, Outcome::One);
    }
    accept
}

/// One proposal that never commits: acceptance is evaluated exactly as in
/// [`metropolis_step`], the outcome is always left unchanged, and on
/// acceptance the signed change-statistic vector of the attempted flip is
/// added into `dz`. Used by the contrastive initializer of the
/// equilibrium-expectation estimator.
pub(crate) fn metropolis_step_virtual(
    model: &Model,
    data: Data,
    state: &mut ChainState,
    dz: &mut [f64],
) -> bool {
    let free = state.outcome.free_nodes();
    let i = free[state.rng.gen_range(0..free.len())];
    state.proposals += 1;

    let was_one = state.outcome.is_one(i);
    if was_one {
        state.outcome.set(i, Outcome::Zero);
    }
    model.change_stats(data.net, data.attrs, &state.outcome, i, &mut state.buf);
    let mut log_ratio = dot(&state.theta, &state.buf);
    if was_one {
        log_ratio = -log_ratio;
    }
    let accept = log_ratio >= 0.0 || state.rng.gen::<f64>() < log_ratio.exp();
    if accept {
        state.accepted += 1;
        let sign = if was_one { -1.0 } else { 1.0 };
        for (z, d) in dz.iter_mut().zip(&state.buf) {
            *z += sign * d;
        }
    }
    if was_one {
        state.outcome.set(i, Outcome::One);
    }
    accept
}

/// Runs `steps` Metropolis proposals.
pub fn run_chain(model: &Model, data: Data, state: &mut ChainState, steps: u64) {
    for _ in 0..steps {
        metropolis_step(model, data, state);
    }
}

/// Settings for drawing statistic samples from a model.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    /// Proposals run before the first sample.
    pub burnin: u64,
    /// Proposals between consecutive samples.
    pub interval: u64,
    /// Number of retained samples.
    pub samples: usize,
}

impl SimOptions {
    /// Diagnostic defaults for a network of `n` nodes: burn-in `1000·n`,
    /// interval `10·n`, 100 samples.
    pub fn for_network_size(n: usize) -> SimOptions {
        SimOptions { burnin: 1000 * n as u64, interval: 10 * n as u64, samples: 100 }
    }
}

/// Simulates the model at `theta` from `init`, returning for each retained
/// sample its absolute statistic vector and the acceptance rate over the
/// proposals since the previous capture.
///
/// The initial statistics are counted once via [`Model::observed_stats`];
/// everything after that is tracked incrementally.
pub fn simulate_outcomes(
    model: &Model,
    data: Data,
    theta: &[f64],
    opts: SimOptions,
    init: &OutcomeVector,
    seed: u64,
) -> Vec<(Vec<f64>, f64)> {
    let z_init = model.observed_stats(data.net, data.attrs, init);
    let mut state = ChainState::new(model, init.clone(), theta.to_vec(), seed);
    run_chain(model, data, &mut state, opts.burnin);
    let mut out = Vec::with_capacity(opts.samples);
    let mut window_start = (state.accepted, state.proposals);
    for _ in 0..opts.samples {
        run_chain(model, data, &mut state, opts.interval);
        let z: Vec<f64> = z_init.iter().zip(state.z_relative()).map(|(a, b)| a + b).collect();
        let (acc0, prop0) = window_start;
        let window = (state.proposals - prop0).max(1);
        let rate = (state.accepted - acc0) as f64 / window as f64;
        window_start = (state.accepted, state.proposals);
        out.push((z, rate));
    }
    out
}
