//! Equilibrium-expectation (EE) estimator with contrastive initialization
//! and batch-means error estimation.
//!
//! The estimator never waits for the sampler to reach equilibrium between
//! updates. Starting from the observed outcome, each iteration runs a short
//! Metropolis burst, accumulates the accepted flips' change statistics into
//! a running divergence `d_z` (which therefore always equals the current
//! statistics minus the observed ones, without either being computed), and
//! nudges every parameter a relative step against the sign of its
//! divergence:
//!
//! ```text
//! theta <- theta - sign(d_z) · r · max(|theta|, c)
//! ```
//!
//! A run records the full `theta` and `d_z` traces. The point estimate and
//! its standard error come from the thinned traces via the multivariate
//! batch-means method, combining the sampling noise of the `theta` chain
//! with the statistic noise that bounds how sharply the data pin the
//! parameters down. Runs are cheap and independent, so many are launched in
//! parallel and pooled downstream by inverse-variance weighting.
//!
//! Starting parameters come from a contrastive-divergence pass
//! ([`algorithm_s`]): the same update rule driven by proposals that are
//! *evaluated* against the observed outcome but never committed.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::effects::Model;
use crate::outcome::OutcomeVector;
use crate::rng::run_seed;
use crate::sampler::{metropolis_step_virtual, run_chain, ChainState};
use crate::stats::{invert_checked, mean_sd, t_ratio};
use crate::Data;

/// Tuning for one EE run. The defaults are the standard settings.
#[derive(Clone, Debug)]
pub struct EeConfig {
    /// Metropolis proposals per EE iteration (the burst length).
    pub steps_per_iteration: usize,
    /// EE iterations (bursts, and therefore parameter updates) per run.
    pub iterations: usize,
    /// Relative learning rate of the parameter update.
    pub learning_rate: f64,
    /// Floor on the update magnitude, so zero-valued parameters still move.
    pub parameter_floor: f64,
    /// Leading iterations discarded before summarizing a trace.
    pub burnin_iterations: usize,
    /// Trace thinning stride after the burn-in.
    pub thin_interval: usize,
    /// Contrastive-divergence updates used to initialize the parameters.
    pub init_steps: usize,
    /// Any |theta| above this marks the run as diverged.
    pub max_abs_theta: f64,
    /// Largest tolerated |mean/sd| of a thinned divergence component; more
    /// drift than this marks the run as non-converged.
    pub dz_ratio_limit: f64,
}

impl Default for EeConfig {
    fn default() -> EeConfig {
        EeConfig {
            steps_per_iteration: 1000,
            iterations: 50_000,
            learning_rate: 0.01,
            parameter_floor: 0.01,
            burnin_iterations: 1000,
            thin_interval: 100,
            init_steps: 100,
            max_abs_theta: 1e10,
            dz_ratio_limit: 0.3,
        }
    }
}

impl EeConfig {
    /// Rows surviving thinning of a complete trace: the burn-in dropped,
    /// then every `thin_interval`-th row kept.
    pub fn thinned_count(&self) -> usize {
        assert!(
            self.burnin_iterations < self.iterations,
            "burn-in must leave iterations to summarize"
        );
        (self.iterations - self.burnin_iterations).div_ceil(self.thin_interval)
    }

    fn assert_valid(&self) {
        assert!(self.steps_per_iteration > 0, "steps_per_iteration must be positive");
        assert!(self.iterations > 0, "iterations must be positive");
        assert!(self.learning_rate > 0.0, "learning_rate must be positive");
        assert!(self.parameter_floor > 0.0, "parameter_floor must be positive");
        assert!(self.thin_interval > 0, "thin_interval must be positive");
        assert!(self.max_abs_theta > 0.0, "max_abs_theta must be positive");
        assert!(self.dz_ratio_limit > 0.0, "dz_ratio_limit must be positive");
        assert!(
            self.burnin_iterations < self.iterations,
            "burn-in must leave iterations to summarize"
        );
    }
}

/// Why a run failed or was rejected by the convergence checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EeFailReason {
    /// Parameters became non-finite or exceeded the magnitude cap.
    Diverged,
    /// The divergence-trace covariance was singular; the model is possibly
    /// degenerate.
    DegenerateModel,
    /// A divergence component's mean stayed too far from zero relative to
    /// its spread: the moment condition was not met.
    DriftExceedsLimit,
}

impl EeFailReason {
    /// Stable token used in status files.
    pub fn token(&self) -> &'static str {
        match self {
            EeFailReason::Diverged => "Diverged",
            EeFailReason::DegenerateModel => "DegenerateModel",
            EeFailReason::DriftExceedsLimit => "DriftExceedsLimit",
        }
    }
}

/// Full record of one EE run: the initialization, both traces (one row per
/// iteration: the post-update parameters and the post-burst divergence), and
/// the per-iteration acceptance rates. A diverged run stops early, leaving
/// the traces truncated at the offending iteration.
#[derive(Clone, Debug)]
pub struct EeChain {
    /// Parameters the run started from (the contrastive initialization).
    pub theta_init: Vec<f64>,
    pub theta_trace: Vec<Vec<f64>>,
    pub dz_trace: Vec<Vec<f64>>,
    pub accept_rates: Vec<f64>,
    pub failed: Option<EeFailReason>,
}

/// Batch-means point estimate and error summary of one run.
#[derive(Clone, Debug)]
pub struct RunEstimate {
    pub theta: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Asymptotic covariance of the thinned parameter trace.
    pub t_cov: DMatrix<f64>,
    /// Asymptotic covariance of the thinned divergence trace.
    pub v_cov: DMatrix<f64>,
    /// Thinned rows each trace was summarized from.
    pub n_m: usize,
    pub converged: bool,
    pub fail_reason: Option<EeFailReason>,
}

/// One component of the parameter update:
/// `theta - sign(dz) · rate · max(|theta|, floor)`.
///
/// `sign(0) = 0` — a component with zero divergence does not move. (This is
/// why the sign is hand-rolled: the floating-point `signum` maps zero to
/// ±1.) Every update in this module goes through this function, so a
/// recorded trace can be replayed bit-for-bit from the divergence trace.
pub fn ee_update_component(theta: f64, dz: f64, rate: f64, floor: f64) -> f64 {
    let sign = if dz > 0.0 {
        1.0
    } else if dz < 0.0 {
        -1.0
    } else {
        0.0
    };
    theta - sign * rate * theta.abs().max(floor)
}

fn ee_update(theta: &mut [f64], dz: &[f64], cfg: &EeConfig) {
    for (t, d) in theta.iter_mut().zip(dz) {
        *t = ee_update_component(*t, *d, cfg.learning_rate, cfg.parameter_floor);
    }
}

/// Contrastive-divergence initialization on an existing chain: performs the
/// configured number of update steps in which each burst's proposals are
/// evaluated against the start outcome but never committed, so the chain's
/// outcome is untouched (only its random stream advances).
fn algorithm_s_on(model: &Model, data: Data, state: &mut ChainState, cfg: &EeConfig) -> Vec<f64> {
    let p = model.p();
    let mut theta = vec![0.0; p];
    let mut dz = vec![0.0; p];
    state.set_theta(&theta);
    for _ in 0..cfg.init_steps {
        dz.iter_mut().for_each(|d| *d = 0.0);
        for _ in 0..cfg.steps_per_iteration {
            metropolis_step_virtual(model, data, state, &mut dz);
        }
        ee_update(&mut theta, &dz, cfg);
        state.set_theta(&theta);
    }
    theta
}

/// Contrastive-divergence starting point for the EE iterations: from the
/// zero vector, `init_steps` updates driven by uncommitted proposals
/// against the observed outcome. Deterministic given the seed.
pub fn algorithm_s(
    model: &Model,
    data: Data,
    y_obs: &OutcomeVector,
    cfg: &EeConfig,
    seed: u64,
) -> Vec<f64> {
    cfg.assert_valid();
    let mut state = ChainState::new(model, y_obs.clone(), vec![0.0; model.p()], seed);
    algorithm_s_on(model, data, &mut state, cfg)
}

/// One full EE run: contrastive initialization, then `iterations` bursts of
/// `steps_per_iteration` proposals on a single persistent chain starting at
/// the observed outcome, with one parameter update after each burst.
///
/// The recorded divergence rows are the chain's accumulated accepted
/// change statistics, identical to the statistics of the current outcome
/// minus the observed statistics (neither is ever recomputed). A parameter
/// leaving `[-max_abs_theta, max_abs_theta]` (or the finite range) stops
/// the run with `failed = Some(Diverged)`.
pub fn run_ee(
    model: &Model,
    data: Data,
    y_obs: &OutcomeVector,
    cfg: &EeConfig,
    seed: u64,
) -> EeChain {
    cfg.assert_valid();
    let p = model.p();
    let mut state = ChainState::new(model, y_obs.clone(), vec![0.0; p], seed);
    let theta_init = algorithm_s_on(model, data, &mut state, cfg);

    let mut theta = theta_init.clone();
    let mut theta_trace = Vec::with_capacity(cfg.iterations);
    let mut dz_trace = Vec::with_capacity(cfg.iterations);
    let mut accept_rates = Vec::with_capacity(cfg.iterations);
    let mut failed = None;

    for _ in 0..cfg.iterations {
        let before = (state.accepted(), state.proposals());
        run_chain(model, data, &mut state, cfg.steps_per_iteration as u64);
        let accepted = state.accepted() - before.0;
        let proposed = state.proposals() - before.1;
        let dz = state.z_relative().to_vec();
        ee_update(&mut theta, &dz, cfg);

        theta_trace.push(theta.clone());
        dz_trace.push(dz);
        accept_rates.push(accepted as f64 / proposed as f64);

        if theta.iter().any(|v| !v.is_finite() || v.abs() > cfg.max_abs_theta) {
            failed = Some(EeFailReason::Diverged);
            break;
        }
        state.set_theta(&theta);
    }

    #[cfg(debug_assertions)]
    if failed.is_none() {
        // The accumulated divergence must equal a fresh recount of the
        // current statistics minus the observed ones.
        let z_obs = model.observed_stats(data.net, data.attrs, y_obs);
        let z_now = model.observed_stats(data.net, data.attrs, state.outcome());
        for i in 0..p {
            debug_assert!(
                (state.z_relative()[i] - (z_now[i] - z_obs[i])).abs() < 1e-4,
                "divergence bookkeeping drifted from a recount"
            );
        }
    }

    EeChain { theta_init, theta_trace, dz_trace, accept_rates, failed }
}

/// Runs `runs` independent EE runs in parallel, each summarized. Run `k`
/// is seeded with [`run_seed`]`(base_seed, k)`, so each run's output
/// depends only on its own seed and the results are identical however the
/// work is scheduled.
pub fn run_ee_many(
    model: &Model,
    data: Data,
    y_obs: &OutcomeVector,
    cfg: &EeConfig,
    runs: usize,
    base_seed: u64,
) -> Vec<(EeChain, RunEstimate)> {
    (0..runs)
        .into_par_iter()
        .map(|k| {
            let chain = run_ee(model, data, y_obs, cfg, run_seed(base_seed, k as u64));
            let est = summarize_run(&chain, cfg);
            (chain, est)
        })
        .collect()
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BatchMeansError {
    #[error("batch means needs at least 4 rows, got {0}")]
    InsufficientData(usize),
}

/// Multivariate batch means: splits a trace of `n` rows into `a = ⌊n/b⌋`
/// batches of `b = ⌊√n⌋` consecutive rows (trailing remainder dropped) and
/// estimates the asymptotic covariance
/// `Sigma = (b/(a−1)) Σ_k (m_k − m̄)(m_k − m̄)ᵀ` from the batch means
/// `m_k`. Returns the mean of the used rows and `Sigma`.
pub fn batch_means(rows: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>), BatchMeansError> {
    let n = rows.len();
    if n < 4 {
        return Err(BatchMeansError::InsufficientData(n));
    }
    let p = rows[0].len();
    let b = (n as f64).sqrt().floor() as usize;
    let a = n / b;

    let mut means = Vec::with_capacity(a);
    for k in 0..a {
        let mut m = DVector::zeros(p);
        for row in &rows[k * b..(k + 1) * b] {
            for (j, v) in row.iter().enumerate() {
                m[j] += v;
            }
        }
        means.push(m / b as f64);
    }
    let grand = means.iter().sum::<DVector<f64>>() / a as f64;

    let mut sigma = DMatrix::zeros(p, p);
    for m in &means {
        let dev = m - &grand;
        sigma += &dev * dev.transpose();
    }
    sigma *= b as f64 / (a - 1) as f64;

    Ok((grand.iter().copied().collect(), sigma))
}

/// Summarizes one run: thins both traces, estimates the point estimate and
/// the two asymptotic covariances by [`batch_means`], and combines them
/// into standard errors via `W = T/Nm + (V/Nm)⁻¹`, `se = √diag(W)`.
///
/// Convergence requires all of: the run did not diverge, `V` is invertible
/// (a singular `V` suggests a degenerate model), and every divergence
/// component's thinned |mean/sd| is within the configured limit.
pub fn summarize_run(chain: &EeChain, cfg: &EeConfig) -> RunEstimate {
    let p = chain.theta_init.len();
    let not_converged = |reason: EeFailReason, theta: Vec<f64>, t: DMatrix<f64>, v: DMatrix<f64>, n_m: usize| RunEstimate {
        theta,
        std_error: vec![f64::NAN; p],
        t_cov: t,
        v_cov: v,
        n_m,
        converged: false,
        fail_reason: Some(reason),
    };

    if let Some(reason) = chain.failed {
        return not_converged(
            reason,
            vec![f64::NAN; p],
            DMatrix::zeros(p, p),
            DMatrix::zeros(p, p),
            0,
        );
    }
    assert_eq!(
        chain.theta_trace.len(),
        cfg.iterations,
        "a complete run records one row per iteration"
    );

    let keep: Vec<usize> = (cfg.burnin_iterations..cfg.iterations)
        .step_by(cfg.thin_interval)
        .collect();
    let thin = |trace: &[Vec<f64>]| -> Vec<Vec<f64>> {
        keep.iter().map(|&t| trace[t].clone()).collect()
    };
    let theta_rows = thin(&chain.theta_trace);
    let dz_rows = thin(&chain.dz_trace);
    let n_m = keep.len();

    let (theta, t_cov) = batch_means(&theta_rows).expect("thinned trace is long enough");
    let (_, v_cov) = batch_means(&dz_rows).expect("thinned trace is long enough");

    // W = T/Nm + (V/Nm)⁻¹, symmetrized against inversion round-off.
    let nm = n_m as f64;
    let Some(v_scaled_inv) = invert_checked(&(&v_cov / nm)) else {
        return not_converged(EeFailReason::DegenerateModel, theta, t_cov, v_cov, n_m);
    };
    let w = &t_cov / nm + v_scaled_inv;
    let w = (&w + w.transpose()) / 2.0;
    let std_error: Vec<f64> = (0..p).map(|i| w[(i, i)].sqrt()).collect();

    for j in 0..p {
        let col: Vec<f64> = dz_rows.iter().map(|r| r[j]).collect();
        let (mean, sd) = mean_sd(&col);
        let ratio = t_ratio(mean, 0.0, sd);
        if !(ratio.abs() <= cfg.dz_ratio_limit) {
            return RunEstimate {
                theta,
                std_error,
                t_cov,
                v_cov,
                n_m,
                converged: false,
                fail_reason: Some(EeFailReason::DriftExceedsLimit),
            };
        }
    }

    RunEstimate { theta, std_error, t_cov, v_cov, n_m, converged: true, fail_reason: None }
}
