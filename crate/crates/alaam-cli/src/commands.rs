//! The six subcommands. Each follows the same shape: merge flags over the
//! optional `--config` file, validate the effective settings, write a
//! manifest recording them into `--out-dir`, run, and write reports.
//!
//! The manifest is written before estimation starts, so a non-converged
//! invocation (exit code 3) still leaves a reproducible record next to
//! whatever partial outputs exist.

use std::fs;
use std::path::PathBuf;

use alaam::inference::{degeneracy_from_samples, OUT_MODEL_T_LIMIT};
use alaam::rng::run_seed;
use alaam::study::{NetworkSource, NullArm, StudyEstimator, StudyError};
use alaam::{
    estimate_sa, fileio, gof_test, parse_effect, pool_runs, run_ee, run_study, simulate_outcomes,
    summarize_run, AttributeTable, Data, EeChain, EeConfig, EeFailReason, EffectSpec, Model,
    Network, SaConfig, SimOptions, StudyConfig,
};

use crate::config::{ensure_out_dir, merged, merged_str, require, Manifest, Settings};
use crate::errors::CliError;
use crate::inputs;
use crate::reports;
use crate::{DataArgs, EstimateEeArgs, EstimateSaArgs, GofArgs, PoolArgs, SimulateArgs, StudyArgs};

fn load_settings(config: &Option<PathBuf>, subcommand: &str) -> Result<Settings, CliError> {
    match config {
        Some(path) => Settings::load(path, subcommand),
        None => Ok(Settings::empty()),
    }
}

fn join_display(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Rejects config keys this subcommand does not read, so a typo fails
/// loudly instead of silently falling back to a default.
fn reject_unknown_keys(
    cfg: &Settings,
    allowed: &[&str],
    prefixes: &[&str],
) -> Result<(), CliError> {
    let unknown: Vec<&str> = cfg
        .keys()
        .into_iter()
        .filter(|k| !allowed.contains(k) && !prefixes.iter().any(|p| k.starts_with(p)))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "unknown config keys for this subcommand: {}",
            unknown.join(", ")
        )))
    }
}

/// Effective dataset settings after flag/config merging, kept as the raw
/// strings so the manifest can echo them verbatim.
struct DatasetSettings {
    network: String,
    kind: String,
    attrs: Option<String>,
    model: String,
}

fn merge_dataset(args: &DataArgs, cfg: &Settings) -> Result<DatasetSettings, CliError> {
    Ok(DatasetSettings {
        network: require(merged_str(&args.network, cfg, "network"), "network")?,
        kind: require(merged_str(&args.kind, cfg, "kind"), "kind")?,
        attrs: merged_str(&args.attrs, cfg, "attrs"),
        model: require(merged_str(&args.model, cfg, "model"), "model")?,
    })
}

struct Dataset {
    net: Network,
    attrs: AttributeTable,
    model: Model,
}

impl Dataset {
    fn data(&self) -> Data<'_> {
        Data::new(&self.net, &self.attrs)
    }
}

fn load_dataset(s: &DatasetSettings) -> Result<Dataset, CliError> {
    let kind = inputs::parse_kind(&s.kind)?;
    let net = inputs::load_network(&s.network, kind)?;
    let attrs = inputs::load_attribute_files(s.attrs.as_deref(), net.node_count())?;
    let model = inputs::bind_model(&s.model, &net, &attrs)?;
    Ok(Dataset { net, attrs, model })
}

fn record_dataset(man: &mut Manifest, s: &DatasetSettings) {
    man.set("network", &s.network)
        .set("kind", &s.kind)
        .set_opt("attrs", s.attrs.as_ref())
        .set("model", &s.model);
}

/// Equilibrium-run tuning flags; every field falls back to the config
/// file and then to the standard defaults.
#[derive(Default)]
pub struct EeKnobs {
    pub mee: Option<usize>,
    pub ms: Option<usize>,
    pub r: Option<f64>,
    pub floor: Option<f64>,
    pub burnin: Option<usize>,
    pub thin: Option<usize>,
    pub init_steps: Option<usize>,
}

fn ee_config(knobs: EeKnobs, cfg: &Settings) -> Result<EeConfig, CliError> {
    let mut ee = EeConfig::default();
    if let Some(v) = merged(knobs.mee, cfg, "mee")? {
        ee.iterations = v;
    }
    if let Some(v) = merged(knobs.ms, cfg, "ms")? {
        ee.steps_per_iteration = v;
    }
    if let Some(v) = merged(knobs.r, cfg, "r")? {
        ee.learning_rate = v;
    }
    if let Some(v) = merged(knobs.floor, cfg, "floor")? {
        ee.parameter_floor = v;
    }
    if let Some(v) = merged(knobs.burnin, cfg, "burnin")? {
        ee.burnin_iterations = v;
    }
    if let Some(v) = merged(knobs.thin, cfg, "thin")? {
        ee.thin_interval = v;
    }
    if let Some(v) = merged(knobs.init_steps, cfg, "init-steps")? {
        ee.init_steps = v;
    }
    validate_ee(&ee)?;
    Ok(ee)
}

fn validate_ee(ee: &EeConfig) -> Result<(), CliError> {
    let usage = |msg: &str| Err(CliError::Usage(msg.to_string()));
    if ee.steps_per_iteration == 0 {
        return usage("--ms must be positive");
    }
    if ee.iterations == 0 {
        return usage("--mee must be positive");
    }
    if !(ee.learning_rate > 0.0) {
        return usage("--r must be positive");
    }
    if !(ee.parameter_floor > 0.0) {
        return usage("--floor must be positive");
    }
    if ee.thin_interval == 0 {
        return usage("--thin must be positive");
    }
    if ee.burnin_iterations >= ee.iterations {
        return usage("--burnin must be smaller than --mee");
    }
    if ee.thinned_count() < 4 {
        return usage("thinning leaves fewer than 4 rows; lower --burnin or --thin, or raise --mee");
    }
    Ok(())
}

fn record_ee(man: &mut Manifest, ee: &EeConfig) {
    man.set("mee", ee.iterations)
        .set("ms", ee.steps_per_iteration)
        .set("r", ee.learning_rate)
        .set("floor", ee.parameter_floor)
        .set("burnin", ee.burnin_iterations)
        .set("thin", ee.thin_interval)
        .set("init-steps", ee.init_steps);
}

const SA_KEYS: &[&str] = &[
    "network", "kind", "attrs", "model", "outcome", "zones", "theta0", "seed", "out-dir",
];

/// `estimate-sa`: fit by stochastic approximation, write `sa_report.txt`.
pub fn estimate_sa_cmd(args: &EstimateSaArgs) -> Result<(), CliError> {
    let cfg = load_settings(&args.out.config, "estimate-sa")?;
    reject_unknown_keys(&cfg, SA_KEYS, &[])?;
    let ds = merge_dataset(&args.data, &cfg)?;
    let outcome = require(merged_str(&args.outcome, &cfg, "outcome"), "outcome")?;
    let zones = merged_str(&args.zones, &cfg, "zones");
    let theta0_raw = merged_str(&args.theta0, &cfg, "theta0");
    let seed = require(merged(args.seed, &cfg, "seed")?, "seed")?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;

    let d = load_dataset(&ds)?;
    let y = inputs::load_outcome(&outcome, &d.net, zones.as_deref())?;
    let theta0 = theta0_raw
        .as_deref()
        .map(|raw| inputs::parse_theta(raw, d.model.p(), "theta0"))
        .transpose()?;

    ensure_out_dir(&out_dir)?;
    let mut man = Manifest::new("estimate-sa");
    record_dataset(&mut man, &ds);
    man.set("outcome", &outcome)
        .set_opt("zones", zones.as_ref())
        .set_opt("theta0", theta0_raw.as_ref())
        .set("seed", seed)
        .set("out-dir", out_dir.display());
    man.write(&out_dir)?;

    let result = estimate_sa(&d.model, d.data(), &y, &SaConfig::default(), theta0.as_deref(), seed)
        .map_err(|e| CliError::NonConverged(e.to_string()))?;
    let text = reports::sa_report(d.model.labels(), &result);
    reports::write_file(&out_dir.join("sa_report.txt"), &text)?;
    print!("{text}");
    if !result.converged {
        return Err(CliError::NonConverged(format!(
            "estimation did not converge after {} restarts; see {}",
            result.restarts_used,
            out_dir.join("sa_report.txt").display()
        )));
    }
    Ok(())
}

const EE_KEYS: &[&str] = &[
    "network", "kind", "attrs", "model", "outcome", "zones", "seed", "out-dir", "runs",
    "run-index", "mee", "ms", "r", "floor", "burnin", "thin", "init-steps",
];

/// `estimate-ee`: run equilibrium chains (all of them, or just
/// `--run-index` for external parallel launchers), writing one trace CSV
/// and status sidecar per run.
pub fn estimate_ee_cmd(args: &EstimateEeArgs) -> Result<(), CliError> {
    let cfg = load_settings(&args.out.config, "estimate-ee")?;
    reject_unknown_keys(&cfg, EE_KEYS, &[])?;
    let ds = merge_dataset(&args.data, &cfg)?;
    let outcome = require(merged_str(&args.outcome, &cfg, "outcome"), "outcome")?;
    let zones = merged_str(&args.zones, &cfg, "zones");
    let seed = require(merged(args.seed, &cfg, "seed")?, "seed")?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;
    let runs = require(merged(args.runs, &cfg, "runs")?, "runs")?;
    let run_index = merged(args.run_index, &cfg, "run-index")?;
    let ee = ee_config(
        EeKnobs {
            mee: args.mee,
            ms: args.ms,
            r: args.r,
            floor: args.floor,
            burnin: args.burnin,
            thin: args.thin,
            init_steps: args.init_steps,
        },
        &cfg,
    )?;

    if runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".to_string()));
    }
    let indices: Vec<usize> = match run_index {
        Some(k) if k < runs => vec![k],
        Some(k) => {
            return Err(CliError::Usage(format!(
                "--run-index {k} is out of range for --runs {runs}"
            )))
        }
        None => (0..runs).collect(),
    };

    let d = load_dataset(&ds)?;
    let y = inputs::load_outcome(&outcome, &d.net, zones.as_deref())?;

    ensure_out_dir(&out_dir)?;
    let mut man = Manifest::new("estimate-ee");
    record_dataset(&mut man, &ds);
    man.set("outcome", &outcome).set_opt("zones", zones.as_ref()).set("runs", runs);
    man.set_opt("run-index", run_index);
    record_ee(&mut man, &ee);
    man.set("seed", seed).set("out-dir", out_dir.display());
    man.write(&out_dir)?;

    let mut converged = 0usize;
    for &k in &indices {
        let chain = run_ee(&d.model, d.data(), &y, &ee, run_seed(seed, k as u64));
        let estimate = summarize_run(&chain, &ee);
        reports::write_file(
            &out_dir.join(format!("run_{k}.csv")),
            &reports::run_csv(d.model.labels(), &chain),
        )?;
        reports::write_file(
            &out_dir.join(format!("run_{k}.status")),
            &reports::run_status(&estimate),
        )?;
        if estimate.converged {
            converged += 1;
            println!("run {k}: converged");
        } else {
            println!(
                "run {k}: not converged ({})",
                estimate.fail_reason.map_or("unknown", |r| r.token())
            );
        }
    }
    println!(
        "{converged} of {} runs converged; traces written to {}",
        indices.len(),
        out_dir.display()
    );
    if converged == 0 {
        return Err(CliError::NonConverged(format!(
            "0 of {} runs converged",
            indices.len()
        )));
    }
    Ok(())
}

const POOL_KEYS: &[&str] = &["out-dir", "burnin", "thin"];

/// `pool`: read every `run_<index>.csv` under `--out-dir`, re-summarize
/// each trace, and pool the converged runs into `pooled_estimates.csv`.
///
/// A sidecar `.status` file is consulted only for the Diverged flag (a
/// diverged trace is truncated, so it cannot be re-summarized); every
/// other verdict is re-derived from the trace itself, so traces produced
/// by external launchers pool fine without sidecars.
pub fn pool_cmd(args: &PoolArgs) -> Result<(), CliError> {
    let cfg = load_settings(&args.out.config, "pool")?;
    reject_unknown_keys(&cfg, POOL_KEYS, &[])?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;
    let burnin = merged(args.burnin, &cfg, "burnin")?.unwrap_or(1000);
    let thin = merged(args.thin, &cfg, "thin")?.unwrap_or(100);
    if thin == 0 {
        return Err(CliError::Usage("--thin must be positive".to_string()));
    }

    let mut run_files: Vec<(usize, PathBuf)> = Vec::new();
    let entries =
        fs::read_dir(&out_dir).map_err(|e| CliError::data(out_dir.display(), e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::data(out_dir.display(), e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(index) = name
            .strip_prefix("run_")
            .and_then(|s| s.strip_suffix(".csv"))
            .and_then(|s| s.parse::<usize>().ok())
        {
            run_files.push((index, entry.path()));
        }
    }
    run_files.sort_by_key(|(index, _)| *index);
    if run_files.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no run_<index>.csv files found",
            out_dir.display()
        )));
    }

    let mut labels: Option<Vec<String>> = None;
    let mut estimates = Vec::new();
    for (_, path) in &run_files {
        let trace = reports::read_run_csv(path)?;
        match &labels {
            None => labels = Some(trace.labels.clone()),
            Some(first) if *first != trace.labels => {
                return Err(CliError::Data(format!(
                    "{}: effect columns differ from run_{}.csv",
                    path.display(),
                    run_files[0].0
                )))
            }
            _ => {}
        }
        let status_path = path.with_extension("status");
        let status = if status_path.exists() {
            Some(reports::read_run_status(&status_path)?)
        } else {
            None
        };
        let failed = match status.as_ref().and_then(|s| s.fail_reason) {
            Some(EeFailReason::Diverged) => Some(EeFailReason::Diverged),
            _ => None,
        };
        let rows = trace.theta_trace.len();
        let run_cfg = EeConfig {
            iterations: rows,
            burnin_iterations: burnin,
            thin_interval: thin,
            ..EeConfig::default()
        };
        if failed.is_none() {
            if rows <= burnin {
                return Err(CliError::Usage(format!(
                    "{}: {rows} iterations is not more than --burnin {burnin}",
                    path.display()
                )));
            }
            if run_cfg.thinned_count() < 4 {
                return Err(CliError::Usage(format!(
                    "{}: thinning leaves fewer than 4 rows; lower --burnin or --thin",
                    path.display()
                )));
            }
        }
        let chain = EeChain {
            theta_init: vec![0.0; trace.labels.len()],
            theta_trace: trace.theta_trace,
            dz_trace: trace.dz_trace,
            accept_rates: trace.accept_rates,
            failed,
        };
        let estimate = summarize_run(&chain, &run_cfg);
        if let Some(status) = status {
            if status.converged != estimate.converged {
                eprintln!(
                    "alaam: note: {}: sidecar recorded converged = {} (theta {}, stdError {}), \
                     but re-summarizing with --burnin {burnin} --thin {thin} says {}; the \
                     producing run may have used different settings",
                    path.display(),
                    status.converged,
                    join_display(&status.theta),
                    join_display(&status.std_error),
                    estimate.converged,
                );
            }
        }
        estimates.push(estimate);
    }
    let labels = labels.expect("at least one run file was read");

    let mut man = Manifest::new("pool");
    man.set("out-dir", out_dir.display()).set("burnin", burnin).set("thin", thin);
    man.write(&out_dir)?;

    let pooled = pool_runs(&estimates).map_err(|e| CliError::NonConverged(e.to_string()))?;
    let csv_path = out_dir.join("pooled_estimates.csv");
    reports::write_file(&csv_path, &reports::pooled_csv(&labels, &pooled))?;
    println!(
        "pooled {} of {} runs into {}",
        pooled.n_converged,
        pooled.total_runs,
        csv_path.display()
    );
    Ok(())
}

const SIMULATE_KEYS: &[&str] = &[
    "network", "kind", "attrs", "model", "outcome", "zones", "theta", "samples", "burnin",
    "interval", "seed", "out-dir",
];

/// `simulate`: draw outcome-statistic samples at fixed parameters into
/// `simulated_stats.csv`; with an observed outcome, also compare it to
/// the simulated 95% band in `degeneracy_summary.txt`.
pub fn simulate_cmd(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = load_settings(&args.out.config, "simulate")?;
    reject_unknown_keys(&cfg, SIMULATE_KEYS, &[])?;
    let ds = merge_dataset(&args.data, &cfg)?;
    let outcome = merged_str(&args.outcome, &cfg, "outcome");
    let zones = merged_str(&args.zones, &cfg, "zones");
    if outcome.is_none() && zones.is_some() {
        return Err(CliError::Usage("--zones requires --outcome".to_string()));
    }
    let theta_raw = require(merged_str(&args.theta, &cfg, "theta"), "theta")?;
    let seed = require(merged(args.seed, &cfg, "seed")?, "seed")?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;

    let d = load_dataset(&ds)?;
    let theta = inputs::parse_theta(&theta_raw, d.model.p(), "theta")?;
    let mut opts = SimOptions::for_network_size(d.net.node_count());
    if let Some(v) = merged(args.samples, &cfg, "samples")? {
        opts.samples = v;
    }
    if let Some(v) = merged(args.burnin, &cfg, "burnin")? {
        opts.burnin = v;
    }
    if let Some(v) = merged(args.interval, &cfg, "interval")? {
        opts.interval = v;
    }
    if opts.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".to_string()));
    }
    if opts.interval == 0 {
        return Err(CliError::Usage("--interval must be positive".to_string()));
    }
    let start = match &outcome {
        Some(path) => inputs::load_outcome(path, &d.net, zones.as_deref())?,
        None => inputs::default_start(&d.net),
    };

    ensure_out_dir(&out_dir)?;
    let mut man = Manifest::new("simulate");
    record_dataset(&mut man, &ds);
    man.set_opt("outcome", outcome.as_ref())
        .set_opt("zones", zones.as_ref())
        .set("theta", &theta_raw)
        .set("samples", opts.samples)
        .set("burnin", opts.burnin)
        .set("interval", opts.interval)
        .set("seed", seed)
        .set("out-dir", out_dir.display());
    man.write(&out_dir)?;

    let drawn = simulate_outcomes(&d.model, d.data(), &theta, opts, &start, seed);
    let (samples, accept_rates): (Vec<Vec<f64>>, Vec<f64>) = drawn.into_iter().unzip();
    let csv_path = out_dir.join("simulated_stats.csv");
    reports::write_file(&csv_path, &reports::sim_csv(d.model.labels(), &samples, &accept_rates))?;
    println!("wrote {} samples to {}", samples.len(), csv_path.display());

    if outcome.is_some() {
        let observed = d.model.observed_stats(&d.net, &d.attrs, &start);
        let check = degeneracy_from_samples(d.model.labels(), observed, samples, accept_rates);
        let text = reports::degeneracy_text(&check);
        reports::write_file(&out_dir.join("degeneracy_summary.txt"), &text)?;
        print!("{text}");
    }
    Ok(())
}

const GOF_KEYS: &[&str] = &[
    "network", "kind", "attrs", "model", "outcome", "zones", "theta", "extra", "out-threshold",
    "samples", "burnin", "interval", "seed", "out-dir",
];

/// `gof`: simulate at the fitted parameters and report per-effect
/// t-ratios for the fitted model plus any `--extra` statistics, into
/// `gof_report.txt`. Flagged rows are diagnostic, not an error.
pub fn gof_cmd(args: &GofArgs) -> Result<(), CliError> {
    let cfg = load_settings(&args.out.config, "gof")?;
    reject_unknown_keys(&cfg, GOF_KEYS, &[])?;
    let ds = merge_dataset(&args.data, &cfg)?;
    let outcome = require(merged_str(&args.outcome, &cfg, "outcome"), "outcome")?;
    let zones = merged_str(&args.zones, &cfg, "zones");
    let theta_raw = require(merged_str(&args.theta, &cfg, "theta"), "theta")?;
    let extra_raw = merged_str(&args.extra, &cfg, "extra");
    let out_threshold =
        merged(args.out_threshold, &cfg, "out-threshold")?.unwrap_or(OUT_MODEL_T_LIMIT);
    let seed = require(merged(args.seed, &cfg, "seed")?, "seed")?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;
    if !(out_threshold > 0.0) {
        return Err(CliError::Usage("--out-threshold must be positive".to_string()));
    }

    let d = load_dataset(&ds)?;
    let y = inputs::load_outcome(&outcome, &d.net, zones.as_deref())?;
    let theta = inputs::parse_theta(&theta_raw, d.model.p(), "theta")?;
    let extra: Vec<EffectSpec> = match &extra_raw {
        Some(raw) => raw
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| parse_effect(t).map_err(|e| CliError::data("extra", e)))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let mut opts = SimOptions::for_network_size(d.net.node_count());
    if let Some(v) = merged(args.samples, &cfg, "samples")? {
        opts.samples = v;
    }
    if let Some(v) = merged(args.burnin, &cfg, "burnin")? {
        opts.burnin = v;
    }
    if let Some(v) = merged(args.interval, &cfg, "interval")? {
        opts.interval = v;
    }
    if opts.samples < 2 {
        return Err(CliError::Usage(
            "--samples must be at least 2 to estimate a spread".to_string(),
        ));
    }
    if opts.interval == 0 {
        return Err(CliError::Usage("--interval must be positive".to_string()));
    }

    ensure_out_dir(&out_dir)?;
    let mut man = Manifest::new("gof");
    record_dataset(&mut man, &ds);
    man.set("outcome", &outcome)
        .set_opt("zones", zones.as_ref())
        .set("theta", &theta_raw)
        .set_opt("extra", extra_raw.as_ref())
        .set("out-threshold", out_threshold)
        .set("samples", opts.samples)
        .set("burnin", opts.burnin)
        .set("interval", opts.interval)
        .set("seed", seed)
        .set("out-dir", out_dir.display());
    man.write(&out_dir)?;

    let report = gof_test(&d.model, &extra, d.data(), &y, &theta, opts, out_threshold, seed)
        .map_err(|e| CliError::data("extra", e))?;
    let text = reports::gof_text(&report);
    reports::write_file(&out_dir.join("gof_report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

const STUDY_KEYS: &[&str] = &[
    "network", "kind", "model", "theta", "samples", "estimator", "runs", "null", "seed",
    "out-dir", "mee", "ms", "r", "floor", "burnin", "thin", "init-steps",
];

fn cfg_require(cfg: &Settings, key: &str) -> Result<String, CliError> {
    cfg.get(key)
        .map(str::to_string)
        .ok_or_else(|| CliError::Usage(format!("missing '{key}' in --config")))
}

fn parse_network_source(raw: &str, cfg: &Settings) -> Result<NetworkSource, CliError> {
    if let Some(rest) = raw.strip_prefix("er:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [nodes, mean_degree] = parts.as_slice() else {
            return Err(CliError::Usage(format!(
                "network '{raw}' must be er:<nodes>:<meanDegree>"
            )));
        };
        let nodes = nodes
            .parse::<usize>()
            .map_err(|e| CliError::Usage(format!("network '{raw}': {e}")))?;
        let mean_degree = mean_degree
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("network '{raw}': {e}")))?;
        if nodes < 2 || !(mean_degree > 0.0) {
            return Err(CliError::Usage(format!(
                "network '{raw}': need at least 2 nodes and a positive mean degree"
            )));
        }
        return Ok(NetworkSource::ErdosRenyi { nodes, mean_degree });
    }
    if let Some(path) = raw.strip_prefix("file:") {
        let kind = inputs::parse_kind(&cfg_require(cfg, "kind")?)?;
        return Ok(NetworkSource::File(PathBuf::from(path), kind));
    }
    Err(CliError::Usage(format!(
        "network '{raw}' must be er:<nodes>:<meanDegree> or file:<path>"
    )))
}

fn parse_null_arms(cfg: &Settings) -> Result<Vec<NullArm>, CliError> {
    let Some(raw) = cfg.get("null") else { return Ok(Vec::new()) };
    let mut arms = Vec::new();
    for label in raw.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let mut overrides = Vec::new();
        if let Some(ov) = cfg.get(&format!("override_{label}")) {
            for item in ov.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let Some((effect, value)) = item.split_once('=') else {
                    return Err(CliError::Usage(format!(
                        "override_{label}: '{item}' must be <effect>=<value>"
                    )));
                };
                let value = value.trim().parse::<f64>().map_err(|e| {
                    CliError::Usage(format!("override_{label}: '{item}': {e}"))
                })?;
                overrides.push((effect.trim().to_string(), value));
            }
        }
        arms.push(NullArm { effect: label.to_string(), overrides });
    }
    Ok(arms)
}

/// `study`: run the bias/coverage/error-rate simulation study described
/// by `--config`, writing `study_report.csv` (and the generated network,
/// when synthetic).
pub fn study_cmd(args: &StudyArgs) -> Result<(), CliError> {
    let Some(config_path) = &args.out.config else {
        return Err(CliError::Usage("study requires --config".to_string()));
    };
    let cfg = Settings::load(config_path, "study")?;
    reject_unknown_keys(&cfg, STUDY_KEYS, &["override_"])?;
    let out_dir: PathBuf = require(merged(args.out.out_dir.clone(), &cfg, "out-dir")?, "out-dir")?;
    let seed = require(merged(args.seed, &cfg, "seed")?, "seed")?;
    let samples = merged(args.samples, &cfg, "samples")?.unwrap_or(20);
    if samples == 0 {
        return Err(CliError::Usage("samples must be at least 1".to_string()));
    }

    let network_raw = cfg_require(&cfg, "network")?;
    let source = parse_network_source(&network_raw, &cfg)?;
    let model = cfg_require(&cfg, "model")?;
    let theta_raw = cfg_require(&cfg, "theta")?;
    let theta = inputs::parse_f64_list(&theta_raw, "theta")?;
    let estimator_token = cfg.get("estimator").unwrap_or("sa").to_string();
    let mut ee_runs = None;
    let estimator = match estimator_token.as_str() {
        "sa" => StudyEstimator::Sa(SaConfig::default()),
        "ee" => {
            let runs = merged(args.runs, &cfg, "runs")?.unwrap_or(20);
            if runs == 0 {
                return Err(CliError::Usage("runs must be at least 1".to_string()));
            }
            ee_runs = Some(runs);
            StudyEstimator::Ee { config: ee_config(EeKnobs::default(), &cfg)?, runs_per_sample: runs }
        }
        other => {
            return Err(CliError::Usage(format!(
                "estimator must be sa or ee, not '{other}'"
            )))
        }
    };
    let null_arms = parse_null_arms(&cfg)?;

    ensure_out_dir(&out_dir)?;
    let mut man = Manifest::new("study");
    man.set("network", &network_raw);
    if matches!(source, NetworkSource::File(..)) {
        man.set("kind", cfg_require(&cfg, "kind")?);
    }
    man.set("model", &model)
        .set("theta", &theta_raw)
        .set("samples", samples)
        .set("estimator", &estimator_token);
    if let StudyEstimator::Ee { config, .. } = &estimator {
        man.set("runs", ee_runs.expect("set when estimator is ee"));
        record_ee(&mut man, config);
    }
    if let Some(null) = cfg.get("null") {
        man.set("null", null);
        for arm in &null_arms {
            if let Some(ov) = cfg.get(&format!("override_{}", arm.effect)) {
                man.set(&format!("override_{}", arm.effect), ov);
            }
        }
    }
    man.set("seed", seed).set("out-dir", out_dir.display());
    man.write(&out_dir)?;

    let study_cfg = StudyConfig {
        source,
        model,
        theta,
        sample_count: samples,
        estimator,
        null_arms,
        seed,
    };
    let output = run_study(&study_cfg).map_err(|e| {
        let msg = e.to_string();
        match e {
            StudyError::ArmFailed(_) => CliError::NonConverged(msg),
            _ => CliError::Data(msg),
        }
    })?;

    let csv_path = out_dir.join("study_report.csv");
    reports::write_file(&csv_path, &reports::study_csv(&output.report))?;
    if matches!(study_cfg.source, NetworkSource::ErdosRenyi { .. }) {
        reports::write_file(&out_dir.join("network.txt"), &fileio::write_network(&output.net))?;
    }
    for arm in &output.report.arms {
        println!(
            "arm {}: {}/{} samples converged",
            arm.arm, arm.converged_samples, arm.sample_count
        );
    }
    println!("wrote {}", csv_path.display());
    Ok(())
}
