//! Pooling of parallel estimation runs, goodness-of-fit testing, and the
//! degeneracy check.
//!
//! Individual equilibrium-expectation runs are noisy; their point estimates
//! are combined by the inverse-variance weighted average over the converged
//! runs, which also yields a pooled standard error and a 95% normal
//! confidence interval per effect (an effect is *significant* when that
//! interval excludes zero).
//!
//! Goodness of fit simulates outcomes at the fitted parameters and compares
//! simulated statistics against the observed ones by t-ratio, both for the
//! fitted effects (which must reproduce their statistics closely — the same
//! criterion the estimators use for convergence) and for extra effects left
//! out of the model, which are tracked at zero weight and judged against a
//! looser threshold.
//!
//! The degeneracy check emits the simulated statistics trace itself plus a
//! per-effect verdict on whether the observed statistic lies inside the
//! simulated central 95% band — the plot-ready form of the "does the model
//! even reach the data" diagnostic.

use crate::ee::RunEstimate;
use crate::effects::{EffectError, EffectSpec, Model};
use crate::outcome::OutcomeVector;
use crate::sampler::{simulate_outcomes, SimOptions};
use crate::stats::{mean_sd_pop, percentile, t_ratio};
use crate::Data;

/// t-ratio magnitude a fitted effect must stay under in a goodness-of-fit
/// report (the same bound the estimators use to declare convergence).
pub const IN_MODEL_T_LIMIT: f64 = 0.1;

/// Default t-ratio magnitude bound for effects outside the fitted model.
pub const OUT_MODEL_T_LIMIT: f64 = 2.0;

/// Inverse-variance pooled estimate over the converged runs.
#[derive(Clone, Debug)]
pub struct PooledEstimate {
    pub theta: Vec<f64>,
    pub std_error: Vec<f64>,
    /// Converged runs that entered the pool.
    pub n_converged: usize,
    /// All runs offered, converged or not.
    pub total_runs: usize,
    pub ci95_low: Vec<f64>,
    pub ci95_high: Vec<f64>,
    /// Whether the 95% interval excludes zero, per effect.
    pub significant: Vec<bool>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PoolError {
    #[error("no converged runs to pool")]
    NoConvergedRuns,
}

/// Pools run estimates by inverse-variance weighting, using converged runs
/// only: `θ̂ = Σ θ_j/s_j² / Σ 1/s_j²`, `se = 1/√(Σ 1/s_j²)`, per effect.
/// The 95% interval is `θ̂ ∓ 1.96·se`.
pub fn pool_runs(estimates: &[RunEstimate]) -> Result<PooledEstimate, PoolError> {
    let converged: Vec<&RunEstimate> = estimates.iter().filter(|e| e.converged).collect();
    if converged.is_empty() {
        return Err(PoolError::NoConvergedRuns);
    }
    let p = converged[0].theta.len();
    let mut theta = vec![0.0; p];
    let mut std_error = vec![0.0; p];
    for i in 0..p {
        let mut num = 0.0;
        let mut den = 0.0;
        for run in &converged {
            let w = 1.0 / (run.std_error[i] * run.std_error[i]);
            num += run.theta[i] * w;
            den += w;
        }
        theta[i] = num / den;
        std_error[i] = 1.0 / den.sqrt();
    }
    let ci95_low: Vec<f64> = (0..p).map(|i| theta[i] - 1.96 * std_error[i]).collect();
    let ci95_high: Vec<f64> = (0..p).map(|i| theta[i] + 1.96 * std_error[i]).collect();
    let significant: Vec<bool> =
        (0..p).map(|i| ci95_low[i] > 0.0 || ci95_high[i] < 0.0).collect();
    Ok(PooledEstimate {
        theta,
        std_error,
        n_converged: converged.len(),
        total_runs: estimates.len(),
        ci95_low,
        ci95_high,
        significant,
    })
}

/// One effect's goodness-of-fit line.
#[derive(Clone, Debug)]
pub struct GofRow {
    pub label: String,
    pub observed: f64,
    pub sim_mean: f64,
    pub sim_sd: f64,
    /// `(sim_mean − observed) / sim_sd`.
    pub t_ratio: f64,
    /// Whether the effect was part of the fitted model.
    pub in_model: bool,
    /// Whether the t-ratio violates this row's threshold.
    pub flagged: bool,
    /// The simulated statistic never varied; its t-ratio is unusable
    /// unless the constant equals the observed value.
    pub degenerate: bool,
}

/// Goodness-of-fit table: fitted-effect rows first, then the extra effects
/// simulated at zero weight.
#[derive(Clone, Debug)]
pub struct GofReport {
    pub rows: Vec<GofRow>,
    pub in_threshold: f64,
    pub out_threshold: f64,
}

impl GofReport {
    /// True when no row is flagged.
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| !r.flagged)
    }
}

/// Pure aggregation step of the goodness-of-fit test: per-effect simulated
/// mean, sd, and t-ratio against the observed statistic, with the first
/// `fitted_p` effects judged against `in_threshold` and the rest against
/// `out_threshold`. The sd uses the same denominator-`n` convention as the
/// estimators' covariance, so a t-ratio computed here on a converged fit's
/// own samples reproduces the estimator's convergence t-ratio.
pub fn gof_rows_from_samples(
    labels: &[String],
    observed: &[f64],
    samples: &[Vec<f64>],
    fitted_p: usize,
    in_threshold: f64,
    out_threshold: f64,
) -> Vec<GofRow> {
    (0..labels.len())
        .map(|i| {
            let col: Vec<f64> = samples.iter().map(|z| z[i]).collect();
            let (mean, sd) = mean_sd_pop(&col);
            let t = t_ratio(mean, observed[i], sd);
            let in_model = i < fitted_p;
            let limit = if in_model { in_threshold } else { out_threshold };
            GofRow {
                label: labels[i].clone(),
                observed: observed[i],
                sim_mean: mean,
                sim_sd: sd,
                t_ratio: t,
                in_model,
                flagged: !(t.abs() <= limit),
                degenerate: sd == 0.0,
            }
        })
        .collect()
}

/// Simulates at the fitted parameters and reports per-effect t-ratios for
/// the fitted effects plus `extra` effects (tracked with zero weight, so
/// they do not alter the sampled distribution). `out_threshold` is the
/// bound applied to the extra effects; fitted effects use
/// [`IN_MODEL_T_LIMIT`].
pub fn gof_test(
    model: &Model,
    extra: &[EffectSpec],
    data: Data,
    y_obs: &OutcomeVector,
    theta_hat: &[f64],
    opts: SimOptions,
    out_threshold: f64,
    seed: u64,
) -> Result<GofReport, EffectError> {
    assert_eq!(theta_hat.len(), model.p(), "theta must match the fitted model");
    let mut specs = model.specs().to_vec();
    specs.extend_from_slice(extra);
    let combined = Model::bind(specs, data.net, data.attrs)?;

    let mut theta = vec![0.0; combined.p()];
    theta[..model.p()].copy_from_slice(theta_hat);

    let observed = combined.observed_stats(data.net, data.attrs, y_obs);
    let sims = simulate_outcomes(&combined, data, &theta, opts, y_obs, seed);
    let samples: Vec<Vec<f64>> = sims.into_iter().map(|(z, _)| z).collect();
    let rows = gof_rows_from_samples(
        combined.labels(),
        &observed,
        &samples,
        model.p(),
        IN_MODEL_T_LIMIT,
        out_threshold,
    );
    Ok(GofReport { rows, in_threshold: IN_MODEL_T_LIMIT, out_threshold })
}

/// Simulated-statistics trace plus a per-effect verdict on whether the
/// observed statistic lies inside the central 95% simulated band.
#[derive(Clone, Debug)]
pub struct DegeneracyCheck {
    pub labels: Vec<String>,
    pub observed: Vec<f64>,
    /// 2.5th percentile of each simulated statistic.
    pub band_low: Vec<f64>,
    /// 97.5th percentile of each simulated statistic.
    pub band_high: Vec<f64>,
    pub inside: Vec<bool>,
    /// One row of statistics per retained sample.
    pub samples: Vec<Vec<f64>>,
    /// Acceptance rate over each sample's window.
    pub accept_rates: Vec<f64>,
}

/// Band computation of the degeneracy check on an existing simulation: the
/// central 95% band of each statistic column, and whether the observed
/// value falls inside it.
pub fn degeneracy_from_samples(
    labels: &[String],
    observed: Vec<f64>,
    samples: Vec<Vec<f64>>,
    accept_rates: Vec<f64>,
) -> DegeneracyCheck {
    let p = labels.len();
    let mut band_low = vec![0.0; p];
    let mut band_high = vec![0.0; p];
    let mut inside = vec![false; p];
    for i in 0..p {
        let col: Vec<f64> = samples.iter().map(|z| z[i]).collect();
        band_low[i] = percentile(&col, 0.025);
        band_high[i] = percentile(&col, 0.975);
        inside[i] = band_low[i] <= observed[i] && observed[i] <= band_high[i];
    }
    DegeneracyCheck {
        labels: labels.to_vec(),
        observed,
        band_low,
        band_high,
        inside,
        samples,
        accept_rates,
    }
}

/// Simulates at `theta_hat` and checks, per effect, whether the observed
/// statistic falls inside the simulated central 95% band. A model whose
/// band cannot reach the data is degenerate at those parameters no matter
/// how the estimate was obtained.
pub fn degeneracy_check(
    model: &Model,
    data: Data,
    y_obs: &OutcomeVector,
    theta_hat: &[f64],
    opts: SimOptions,
    seed: u64,
) -> DegeneracyCheck {
    let observed = model.observed_stats(data.net, data.attrs, y_obs);
    let sims = simulate_outcomes(model, data, theta_hat, opts, y_obs, seed);
    let mut samples = Vec::with_capacity(sims.len());
    let mut accept_rates = Vec::with_capacity(sims.len());
    for (z, rate) in sims {
        samples.push(z);
        accept_rates.push(rate);
    }
    degeneracy_from_samples(model.labels(), observed, samples, accept_rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::AttributeTable;
    use crate::ee::RunEstimate;
    use crate::network::{Network, NetworkKind};
    use crate::outcome::Outcome;
    use nalgebra::DMatrix;

    fn run(theta: &[f64], se: &[f64], converged: bool) -> RunEstimate {
        let p = theta.len();
        RunEstimate {
            theta: theta.to_vec(),
            std_error: se.to_vec(),
            t_cov: DMatrix::zeros(p, p),
            v_cov: DMatrix::zeros(p, p),
            n_m: 0,
            converged,
            fail_reason: None,
        }
    }

    #[test]
    fn single_run_pools_to_itself() {
        let pooled = pool_runs(&[run(&[1.25, -0.5], &[1.0, 0.5], true)]).unwrap();
        assert_eq!(pooled.theta, vec![1.25, -0.5]);
        assert_eq!(pooled.std_error, vec![1.0, 0.5]);
        assert_eq!(pooled.n_converged, 1);
        assert_eq!(pooled.total_runs, 1);
    }

    #[test]
    fn equal_weight_runs_average_exactly() {
        let pooled =
            pool_runs(&[run(&[1.0], &[1.0], true), run(&[3.0], &[1.0], true)]).unwrap();
        assert_eq!(pooled.theta, vec![2.0]);
        assert_eq!(pooled.std_error, vec![1.0 / 2f64.sqrt()]);
    }

    #[test]
    fn heavy_weight_dominates() {
        // Weights 1 and 1/100: the pooled estimate moves 1/101 of the gap.
        let pooled =
            pool_runs(&[run(&[2.0], &[1.0], true), run(&[3.0], &[10.0], true)]).unwrap();
        assert!((pooled.theta[0] - (2.0 + 1.0 / 101.0)).abs() < 1e-12);
        assert!((pooled.theta[0] - 2.0).abs() <= 0.01 * 2.0);
    }

    #[test]
    fn equal_se_pool_shrinks_exactly_by_root_k() {
        let runs: Vec<RunEstimate> =
            (0..4).map(|k| run(&[k as f64], &[2.0], true)).collect();
        let pooled = pool_runs(&runs).unwrap();
        assert_eq!(pooled.std_error, vec![1.0]); // 2/√4
        assert_eq!(pooled.theta, vec![1.5]);
    }

    #[test]
    fn pooling_ignores_non_converged_runs_and_errors_without_any() {
        let good = run(&[1.0], &[1.0], true);
        let bad = run(&[1e9], &[1e-9], false);
        let pooled = pool_runs(&[bad.clone(), good.clone()]).unwrap();
        assert_eq!(pooled.theta, vec![1.0]);
        assert_eq!(pooled.n_converged, 1);
        assert_eq!(pooled.total_runs, 2);
        assert_eq!(pool_runs(&[bad]).unwrap_err(), PoolError::NoConvergedRuns);
    }

    #[test]
    fn pooling_is_permutation_invariant_and_never_widens() {
        let runs = vec![
            run(&[0.4], &[0.7], true),
            run(&[1.1], &[0.3], true),
            run(&[-0.2], &[1.9], true),
            run(&[0.9], &[0.45], true),
        ];
        let a = pool_runs(&runs).unwrap();
        let mut rev = runs.clone();
        rev.reverse();
        let b = pool_runs(&rev).unwrap();
        assert!((a.theta[0] - b.theta[0]).abs() < 1e-12);
        assert!((a.std_error[0] - b.std_error[0]).abs() < 1e-12);
        let min_se = runs.iter().map(|r| r.std_error[0]).fold(f64::INFINITY, f64::min);
        assert!(a.std_error[0] < min_se);
    }

    #[test]
    fn significance_follows_the_interval() {
        let pooled = pool_runs(&[run(&[3.0, 0.5, -3.0], &[1.0, 1.0, 1.0], true)]).unwrap();
        assert_eq!(pooled.significant, vec![true, false, true]);
        assert!((pooled.ci95_low[0] - (3.0 - 1.96)).abs() < 1e-12);
        assert!((pooled.ci95_high[0] - (3.0 + 1.96)).abs() < 1e-12);
    }

    #[test]
    fn gof_rows_match_the_estimator_t_convention() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let observed = vec![4.0, 10.0];
        let samples = vec![vec![5.0, 10.0], vec![3.0, 10.0], vec![4.0, 10.0], vec![6.0, 10.0]];
        let rows = gof_rows_from_samples(&labels, &observed, &samples, 1, 0.1, 2.0);

        // Same t-ratio as the stochastic-approximation convergence check
        // computes from its phase-3 sample covariance.
        let cov = crate::stats::covariance_from_rows(&samples);
        let means = crate::stats::mean_of_rows(&samples);
        let t_sa = (means[0] - observed[0]) / cov[(0, 0)].sqrt();
        assert!((rows[0].t_ratio - t_sa).abs() < 1e-12);
        assert!(rows[0].in_model);

        // A constant simulated statistic equal to the observed value is
        // degenerate but not a misfit.
        assert_eq!(rows[1].t_ratio, 0.0);
        assert!(rows[1].degenerate);
        assert!(!rows[1].flagged);
    }

    fn triangle_cluster_graph() -> Network {
        // A 5-clique head with a 10-node tail of degree-2 nodes.
        let mut g = Network::new(NetworkKind::Undirected, 15);
        for i in 0..5u32 {
            for j in (i + 1)..5 {
                g.add_edge(i, j).unwrap();
            }
        }
        for i in 5..14u32 {
            g.add_edge(i, i + 1).unwrap();
        }
        g.add_edge(4, 5).unwrap();
        g
    }

    #[test]
    fn planted_clustering_flags_the_left_out_triangle_effect() {
        // All five clique members are active and nobody else: an
        // intercept-only model cannot reproduce the active triangles.
        let g = triangle_cluster_graph();
        let attrs = AttributeTable::new();
        let model = Model::parse("Density", &g, &attrs).unwrap();
        let mut v = vec![Outcome::Zero; 15];
        for i in 0..5 {
            v[i] = Outcome::One;
        }
        let y = OutcomeVector::new(v);
        // Exact fit for the intercept-only model: log-odds of 5/15.
        let theta = vec![(5.0f64 / 10.0).ln()];
        let extra = vec![EffectSpec::plain(crate::effects::EffectKind::TriangleT3)];
        let opts = SimOptions { burnin: 15_000, interval: 150, samples: 200 };
        let report = gof_test(
            &model,
            &extra,
            Data::new(&g, &attrs),
            &y,
            &theta,
            opts,
            OUT_MODEL_T_LIMIT,
            17,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        let density = &report.rows[0];
        assert!(density.in_model);
        assert!(!density.flagged, "intercept fits: t {}", density.t_ratio);
        let t3 = &report.rows[1];
        assert!(!t3.in_model);
        assert!(t3.flagged, "planted clustering must be flagged: t {}", t3.t_ratio);
        assert!(t3.t_ratio < -2.0, "simulation undershoots the observed triangles");
        assert!(!report.passes());
    }

    #[test]
    fn degeneracy_check_covers_a_well_specified_model_and_catches_saturation() {
        let g = triangle_cluster_graph();
        let attrs = AttributeTable::new();
        let model = Model::parse("Density", &g, &attrs).unwrap();
        let mut v = vec![Outcome::Zero; 15];
        for i in [0, 3, 7, 11] {
            v[i] = Outcome::One;
        }
        let y = OutcomeVector::new(v);
        let opts = SimOptions { burnin: 15_000, interval: 150, samples: 200 };
        let data = Data::new(&g, &attrs);

        let fair = degeneracy_check(&model, data, &y, &[(4.0f64 / 11.0).ln()], opts, 29);
        assert_eq!(fair.samples.len(), 200);
        assert_eq!(fair.accept_rates.len(), 200);
        assert!(fair.inside[0], "band [{}, {}] vs {}", fair.band_low[0], fair.band_high[0], fair.observed[0]);

        // A +10 intercept saturates the simulation; the sparse observation
        // falls far below the band.
        let hot = degeneracy_check(&model, data, &y, &[10.0], opts, 29);
        assert!(!hot.inside[0]);
        assert!(hot.band_low[0] > hot.observed[0]);
    }
}
