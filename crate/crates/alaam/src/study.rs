//! Simulation-study harness: generate outcomes from a known model, fit
//! them, and report how well the estimates recover the truth.
//!
//! A study runs one or more *arms*. The main arm simulates and estimates
//! at the full generating parameters; each *null arm* zeroes one effect's
//! generating value (optionally overriding others, since removing a strong
//! effect can require rebalancing the intercept to keep outcomes healthy)
//! and measures how often the estimator claims the absent effect anyway.
//!
//! Per arm and effect the report carries bias, RMSE, 95%-CI coverage, and
//! an error rate: the false-positive rate where the generating value is
//! zero (the interval excludes zero although the effect is absent) and the
//! false-negative rate elsewhere (the interval covers zero although the
//! effect is present), each with a Wilson score interval.
//!
//! Work is keyed by arm and sample indices with seeds derived from the
//! master seed, so reports are identical however the samples are scheduled.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::path::PathBuf;

use crate::attributes::{AttrColumn, AttributeTable};
use crate::ee::EeConfig;
use crate::effects::{EffectError, Model};
use crate::fileio::{load_network, LoadError};
use crate::inference::pool_runs;
use crate::network::{Network, NetworkKind};
use crate::outcome::{Outcome, OutcomeVector};
use crate::rng::{chain_rng, run_seed, substream};
use crate::sa::SaConfig;
use crate::sampler::run_chain;
use crate::stats::normal_quantile;
use crate::Data;

/// Where the study network comes from.
#[derive(Clone, Debug)]
pub enum NetworkSource {
    /// Load from a network file of the given kind.
    File(PathBuf, NetworkKind),
    /// Generate an Erdős–Rényi graph with the given size and mean degree.
    ErdosRenyi { nodes: usize, mean_degree: f64 },
}

/// Which estimator the study exercises.
#[derive(Clone, Debug)]
pub enum StudyEstimator {
    /// Stochastic approximation: one estimate per sample.
    Sa(SaConfig),
    /// Equilibrium expectation: `runs_per_sample` pooled runs per sample.
    Ee { config: EeConfig, runs_per_sample: usize },
}

/// One null arm: the named effect's generating value is zeroed, and any
/// listed overrides are applied on top (by effect label).
#[derive(Clone, Debug)]
pub struct NullArm {
    pub effect: String,
    pub overrides: Vec<(String, f64)>,
}

/// Full study description.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub source: NetworkSource,
    /// Effect grammar for the generating (and fitted) model.
    pub model: String,
    /// Generating parameter per effect, in model order.
    pub theta: Vec<f64>,
    /// Outcome vectors to simulate and fit per arm.
    pub sample_count: usize,
    pub estimator: StudyEstimator,
    pub null_arms: Vec<NullArm>,
    pub seed: u64,
}

/// Whether a rate row counts false positives or false negatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateKind {
    FalsePositive,
    FalseNegative,
}

impl RateKind {
    pub fn token(&self) -> &'static str {
        match self {
            RateKind::FalsePositive => "FPR",
            RateKind::FalseNegative => "FNR",
        }
    }
}

/// Recovery metrics for one effect in one arm, over converged samples.
#[derive(Clone, Debug)]
pub struct EffectSummary {
    pub effect: String,
    pub theta_true: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Share of converged samples whose 95% CI covers the truth, in percent.
    pub coverage_pct: f64,
    pub rate_kind: RateKind,
    pub rate_pct: f64,
    pub rate_ci_low_pct: f64,
    pub rate_ci_high_pct: f64,
}

/// One arm's aggregated results.
#[derive(Clone, Debug)]
pub struct ArmReport {
    pub arm: String,
    /// Generating parameters used by this arm.
    pub theta: Vec<f64>,
    pub effects: Vec<EffectSummary>,
    pub converged_samples: usize,
    pub sample_count: usize,
    /// Mean converged-run count per sample (for SA, 1 when converged).
    pub mean_runs_converged: f64,
    pub runs_per_sample: usize,
}

#[derive(Clone, Debug)]
pub struct StudyReport {
    pub model_labels: Vec<String>,
    pub arms: Vec<ArmReport>,
}

/// A study's report together with the network and attributes it ran on,
/// so callers can persist the exact inputs.
pub struct StudyOutput {
    pub report: StudyReport,
    pub net: Network,
    pub attrs: AttributeTable,
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Effect(#[from] EffectError),
    #[error("theta has {got} entries but the model has {expected} effects")]
    ThetaLength { expected: usize, got: usize },
    #[error("no effect labelled '{0}' in the model")]
    UnknownEffect(String),
    #[error("arm '{0}': no sample produced a converged estimate")]
    ArmFailed(String),
    #[error("sample_count must be at least 1")]
    NoSamples,
}

/// Synthetic node covariates: a binary column ("binary") that is one for
/// exactly half the nodes (⌊N/2⌋, drawn without replacement) and an i.i.d.
/// standard-normal column ("continuous"). Deterministic per seed.
pub fn generate_synthetic_attributes(net: &Network, seed: u64) -> AttributeTable {
    let n = net.node_count();
    let mut rng = chain_rng(seed);
    let mut flags = vec![Some(false); n];
    for idx in sample_indices(&mut rng, n, n / 2) {
        flags[idx] = Some(true);
    }
    let values: Vec<Option<f64>> =
        (0..n).map(|_| Some(StandardNormal.sample(&mut rng))).collect();
    let mut attrs = AttributeTable::new();
    attrs.add_column("binary", AttrColumn::Binary(flags)).expect("fresh table");
    attrs.add_column("continuous", AttrColumn::Continuous(values)).expect("fresh table");
    attrs
}

/// Erdős–Rényi graph on `nodes` nodes with edge probability
/// `mean_degree/(nodes−1)` (clamped to [0, 1]). Deterministic per seed.
pub fn erdos_renyi(nodes: usize, mean_degree: f64, seed: u64) -> Network {
    let mut net = Network::new(NetworkKind::Undirected, nodes);
    let p = (mean_degree / (nodes.max(2) - 1) as f64).clamp(0.0, 1.0);
    let mut rng = chain_rng(seed);
    for i in 0..nodes as u32 {
        for j in (i + 1)..nodes as u32 {
            if rng.gen::<f64>() < p {
                net.add_edge(i, j).expect("valid pair");
            }
        }
    }
    net
}

/// Wilson score interval for a binomial proportion, on the [0, 1] scale.
///
/// The boundary cases are pinned exactly: `k = 0` gives a lower bound of
/// zero and `k = n` an upper bound of one (the algebraic values, which
/// plain evaluation would miss by rounding).
pub fn wilson_interval(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    assert!(n >= 1, "need at least one trial");
    assert!(k <= n, "successes cannot exceed trials");
    assert!((0.0..1.0).contains(&confidence) && confidence > 0.0);
    let z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    let nf = n as f64;
    let p_hat = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let low = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if k == n { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

/// Simulates one outcome vector from the model at `theta`: every free node
/// starts active with probability 0.15, then the chain runs a burn-in of
/// `1000·N` proposals and the final state is returned.
pub fn simulate_study_outcome(
    model: &Model,
    data: Data,
    theta: &[f64],
    seed: u64,
) -> OutcomeVector {
    let n = data.net.node_count();
    let mut rng = chain_rng(seed);
    let values: Vec<Outcome> = (0..n)
        .map(|i| {
            if data.net.kind() == NetworkKind::Bipartite && !data.net.is_mode_a(i as u32) {
                Outcome::Fixed
            } else if rng.gen::<f64>() < 0.15 {
                Outcome::One
            } else {
                Outcome::Zero
            }
        })
        .collect();
    let mut state = crate::sampler::ChainState::new(
        model,
        OutcomeVector::new(values),
        theta.to_vec(),
        substream(seed, 1),
    );
    run_chain(model, data, &mut state, (1000 * n) as u64);
    state.outcome().clone()
}

/// Resolves the study's network and generates its synthetic attributes.
pub fn build_study_inputs(cfg: &StudyConfig) -> Result<(Network, AttributeTable), StudyError> {
    let net = match &cfg.source {
        NetworkSource::File(path, kind) => load_network(path, *kind)?,
        NetworkSource::ErdosRenyi { nodes, mean_degree } => {
            erdos_renyi(*nodes, *mean_degree, substream(cfg.seed, 0xA1))
        }
    };
    let attrs = generate_synthetic_attributes(&net, substream(cfg.seed, 0xA2));
    Ok((net, attrs))
}

/// One sample's estimate, reduced to what the aggregation needs.
struct SampleFit {
    theta: Vec<f64>,
    ci_low: Vec<f64>,
    ci_high: Vec<f64>,
    runs_converged: usize,
}

fn fit_sample(
    model: &Model,
    data: Data,
    y: &OutcomeVector,
    estimator: &StudyEstimator,
    seed: u64,
) -> Option<SampleFit> {
    match estimator {
        StudyEstimator::Sa(sa_cfg) => {
            let r = crate::sa::estimate_sa(model, data, y, sa_cfg, None, seed).ok()?;
            if !r.converged {
                return None;
            }
            let p = r.theta.len();
            Some(SampleFit {
                ci_low: (0..p).map(|i| r.theta[i] - 1.96 * r.std_error[i]).collect(),
                ci_high: (0..p).map(|i| r.theta[i] + 1.96 * r.std_error[i]).collect(),
                theta: r.theta,
                runs_converged: 1,
            })
        }
        StudyEstimator::Ee { config, runs_per_sample } => {
            let runs = crate::ee::run_ee_many(model, data, y, config, *runs_per_sample, seed);
            let estimates: Vec<_> = runs.into_iter().map(|(_, e)| e).collect();
            let pooled = pool_runs(&estimates).ok()?;
            Some(SampleFit {
                theta: pooled.theta,
                ci_low: pooled.ci95_low,
                ci_high: pooled.ci95_high,
                runs_converged: pooled.n_converged,
            })
        }
    }
}

fn summarize_arm(
    name: &str,
    theta_true: &[f64],
    labels: &[String],
    fits: &[Option<SampleFit>],
    runs_per_sample: usize,
) -> Result<ArmReport, StudyError> {
    let converged: Vec<&SampleFit> = fits.iter().flatten().collect();
    if converged.is_empty() {
        return Err(StudyError::ArmFailed(name.to_string()));
    }
    let nc = converged.len();
    let p = labels.len();
    let mut effects = Vec::with_capacity(p);
    for i in 0..p {
        let truth = theta_true[i];
        let ests: Vec<f64> = converged.iter().map(|f| f.theta[i]).collect();
        let mean = ests.iter().sum::<f64>() / nc as f64;
        let rmse =
            (ests.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>() / nc as f64).sqrt();
        let covered = converged
            .iter()
            .filter(|f| f.ci_low[i] <= truth && truth <= f.ci_high[i])
            .count();
        // Significant = the interval excludes zero.
        let significant = |f: &&SampleFit| f.ci_low[i] > 0.0 || f.ci_high[i] < 0.0;
        let (rate_kind, hits) = if truth == 0.0 {
            (RateKind::FalsePositive, converged.iter().filter(|f| significant(f)).count())
        } else {
            (RateKind::FalseNegative, converged.iter().filter(|f| !significant(f)).count())
        };
        let (lo, hi) = wilson_interval(hits, nc, 0.95);
        effects.push(EffectSummary {
            effect: labels[i].clone(),
            theta_true: truth,
            bias: mean - truth,
            rmse,
            coverage_pct: 100.0 * covered as f64 / nc as f64,
            rate_kind,
            rate_pct: 100.0 * hits as f64 / nc as f64,
            rate_ci_low_pct: 100.0 * lo,
            rate_ci_high_pct: 100.0 * hi,
        });
    }
    let mean_runs_converged =
        fits.iter().map(|f| f.as_ref().map_or(0, |s| s.runs_converged)).sum::<usize>() as f64
            / fits.len() as f64;
    Ok(ArmReport {
        arm: name.to_string(),
        theta: theta_true.to_vec(),
        effects,
        converged_samples: nc,
        sample_count: fits.len(),
        mean_runs_converged,
        runs_per_sample,
    })
}

/// Runs the full study: the main arm at the generating parameters plus one
/// arm per configured null effect. Deterministic per master seed.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput, StudyError> {
    if cfg.sample_count == 0 {
        return Err(StudyError::NoSamples);
    }
    let (net, attrs) = build_study_inputs(cfg)?;
    let model = Model::parse(&cfg.model, &net, &attrs)?;
    if cfg.theta.len() != model.p() {
        return Err(StudyError::ThetaLength { expected: model.p(), got: cfg.theta.len() });
    }
    let labels = model.labels().to_vec();
    let effect_index = |label: &str| -> Result<usize, StudyError> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| StudyError::UnknownEffect(label.to_string()))
    };

    // Arm list: the main arm, then one per null effect.
    let mut arms: Vec<(String, Vec<f64>)> = vec![("main".to_string(), cfg.theta.clone())];
    for null in &cfg.null_arms {
        let mut theta = cfg.theta.clone();
        theta[effect_index(&null.effect)?] = 0.0;
        for (label, value) in &null.overrides {
            theta[effect_index(label)?] = *value;
        }
        arms.push((format!("null_{}", null.effect), theta));
    }

    let runs_per_sample = match &cfg.estimator {
        StudyEstimator::Sa(_) => 1,
        StudyEstimator::Ee { runs_per_sample, .. } => *runs_per_sample,
    };

    let data = Data::new(&net, &attrs);
    let mut reports = Vec::with_capacity(arms.len());
    for (arm_index, (name, theta_true)) in arms.iter().enumerate() {
        let arm_seed = substream(cfg.seed, 0xB000 + arm_index as u64);
        let fits: Vec<Option<SampleFit>> = (0..cfg.sample_count)
            .into_par_iter()
            .map(|s| {
                let sample_seed = run_seed(arm_seed, s as u64);
                let y = simulate_study_outcome(
                    &model,
                    data,
                    theta_true,
                    substream(sample_seed, 1),
                );
                fit_sample(&model, data, &y, &cfg.estimator, substream(sample_seed, 2))
            })
            .collect();
        reports.push(summarize_arm(name, theta_true, &labels, &fits, runs_per_sample)?);
    }

    Ok(StudyOutput {
        report: StudyReport { model_labels: labels, arms: reports },
        net,
        attrs,
    })
}
