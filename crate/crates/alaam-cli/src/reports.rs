//! Report rendering and parsing: human-readable estimate tables, trace and
//! summary CSVs, and the sidecar status files `pool` reads back.
//!
//! CSVs print floats with `{}` (shortest round-trip form) so re-reading a
//! trace reproduces the run bit for bit; the human tables use fixed
//! decimals for alignment.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use alaam::{
    DegeneracyCheck, EeChain, EeFailReason, GofReport, PooledEstimate, RunEstimate, SaResult,
    StudyReport,
};

use crate::errors::CliError;

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::data(&path.display().to_string(), e))
}

fn label_width(labels: &[&str], minimum: usize) -> usize {
    labels.iter().map(|l| l.len()).max().unwrap_or(0).max(minimum)
}

/// Human-readable estimate table: one row per effect with estimate,
/// standard error, convergence t-ratio, and a significance star when
/// |estimate/stdError| > 1.96.
pub fn sa_report(labels: &[String], result: &SaResult) -> String {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let w = label_width(&refs, "effect".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<w$}  {:>12}  {:>12}  {:>12}", "effect", "estimate", "stdError", "tRatio");
    for (i, label) in labels.iter().enumerate() {
        let est = result.theta[i];
        let se = result.std_error[i];
        let star = if se > 0.0 && (est / se).abs() > 1.96 { " *" } else { "" };
        let _ = writeln!(
            out,
            "{label:<w$}  {est:>12.4}  {se:>12.4}  {t:>12.4}{star}",
            t = result.t_ratios[i],
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "converged: {} (restarts used: {})",
        if result.converged { "yes" } else { "no" },
        result.restarts_used
    );
    let _ = writeln!(out, "* |estimate/stdError| > 1.96");
    out
}

fn push_f64_row(out: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(out, ",{v}");
    }
}

/// Per-iteration trace of one equilibrium run:
/// `t,theta_<e1>,...,dz_<e1>,...,acceptRate`.
pub fn run_csv(labels: &[String], chain: &EeChain) -> String {
    let mut out = String::from("t");
    for l in labels {
        let _ = write!(out, ",theta_{l}");
    }
    for l in labels {
        let _ = write!(out, ",dz_{l}");
    }
    out.push_str(",acceptRate\n");
    for (t, (theta, dz)) in chain.theta_trace.iter().zip(&chain.dz_trace).enumerate() {
        let _ = write!(out, "{t}");
        push_f64_row(&mut out, theta);
        push_f64_row(&mut out, dz);
        let _ = writeln!(out, ",{}", chain.accept_rates[t]);
    }
    out
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Sidecar summary for one run: convergence flag, failure reason, and the
/// per-run estimate so `pool` does not have to re-summarize the trace.
pub fn run_status(estimate: &RunEstimate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "converged = {}", estimate.converged);
    let _ = writeln!(
        out,
        "failReason = {}",
        estimate.fail_reason.map_or("none", |r| r.token())
    );
    let _ = writeln!(out, "nm = {}", estimate.n_m);
    let _ = writeln!(out, "theta = {}", join_f64(&estimate.theta));
    let _ = writeln!(out, "stdError = {}", join_f64(&estimate.std_error));
    out
}

/// Parsed form of a run sidecar file.
pub struct RunStatus {
    pub converged: bool,
    pub fail_reason: Option<EeFailReason>,
    pub theta: Vec<f64>,
    pub std_error: Vec<f64>,
}

fn parse_f64_list(raw: &str, path: &Path) -> Result<Vec<f64>, CliError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::data(&path.display().to_string(), e))
        })
        .collect()
}

pub fn read_run_status(path: &Path) -> Result<RunStatus, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::data(&path.display().to_string(), e))?;
    let mut converged = None;
    let mut fail_reason = None;
    let mut theta = Vec::new();
    let mut std_error = Vec::new();
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else { continue };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "converged" => {
                converged = Some(value.parse::<bool>().map_err(|e| {
                    CliError::data(&path.display().to_string(), e)
                })?);
            }
            "failReason" => {
                fail_reason = match value {
                    "none" => None,
                    "Diverged" => Some(EeFailReason::Diverged),
                    "DegenerateModel" => Some(EeFailReason::DegenerateModel),
                    "DriftExceedsLimit" => Some(EeFailReason::DriftExceedsLimit),
                    other => {
                        return Err(CliError::Data(format!(
                            "{}: unknown failReason '{other}'",
                            path.display()
                        )))
                    }
                };
            }
            "theta" => theta = parse_f64_list(value, path)?,
            "stdError" => std_error = parse_f64_list(value, path)?,
            _ => {}
        }
    }
    let Some(converged) = converged else {
        return Err(CliError::Data(format!(
            "{}: missing 'converged' line",
            path.display()
        )));
    };
    Ok(RunStatus { converged, fail_reason, theta, std_error })
}

/// Parsed form of a run trace CSV: the effect labels recovered from the
/// header plus the three per-iteration columns groups.
pub struct RunTrace {
    pub labels: Vec<String>,
    pub theta_trace: Vec<Vec<f64>>,
    pub dz_trace: Vec<Vec<f64>>,
    pub accept_rates: Vec<f64>,
}

pub fn read_run_csv(path: &Path) -> Result<RunTrace, CliError> {
    let data_err = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
    let text =
        fs::read_to_string(path).map_err(|e| CliError::data(&path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| data_err("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols.len() % 2 != 0 || cols[0] != "t" || cols[cols.len() - 1] != "acceptRate"
    {
        return Err(data_err("header is not t,theta_...,dz_...,acceptRate".into()));
    }
    let p = (cols.len() - 2) / 2;
    let mut labels = Vec::with_capacity(p);
    for i in 0..p {
        let theta_col = cols[1 + i]
            .strip_prefix("theta_")
            .ok_or_else(|| data_err(format!("column {} must start with theta_", 1 + i)))?;
        let dz_col = cols[1 + p + i]
            .strip_prefix("dz_")
            .ok_or_else(|| data_err(format!("column {} must start with dz_", 1 + p + i)))?;
        if theta_col != dz_col {
            return Err(data_err(format!(
                "theta/dz column order disagrees: '{theta_col}' vs '{dz_col}'"
            )));
        }
        labels.push(theta_col.to_string());
    }
    let mut trace = RunTrace {
        labels,
        theta_trace: Vec::new(),
        dz_trace: Vec::new(),
        accept_rates: Vec::new(),
    };
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(data_err(format!(
                "row {row} has {} fields, expected {}",
                fields.len(),
                cols.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| data_err(format!("row {row}: {e}")))
        };
        let theta: Result<Vec<f64>, _> = fields[1..1 + p].iter().map(|s| parse(s)).collect();
        let dz: Result<Vec<f64>, _> =
            fields[1 + p..1 + 2 * p].iter().map(|s| parse(s)).collect();
        trace.theta_trace.push(theta?);
        trace.dz_trace.push(dz?);
        trace.accept_rates.push(parse(fields[1 + 2 * p])?);
    }
    if trace.theta_trace.is_empty() {
        return Err(data_err("no data rows".into()));
    }
    Ok(trace)
}

/// Combined estimate across runs:
/// `effect,estimate,stdError,ci95Low,ci95High,Nc,totalRuns,significant`.
pub fn pooled_csv(labels: &[String], pooled: &PooledEstimate) -> String {
    let mut out =
        String::from("effect,estimate,stdError,ci95Low,ci95High,Nc,totalRuns,significant\n");
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{},{},{}",
            pooled.theta[i],
            pooled.std_error[i],
            pooled.ci95_low[i],
            pooled.ci95_high[i],
            pooled.n_converged,
            pooled.total_runs,
            pooled.significant[i],
        );
    }
    out
}

/// Simulated-statistics trace: `t,<effect names...>,acceptRate`, one row
/// per retained sample.
pub fn sim_csv(labels: &[String], samples: &[Vec<f64>], accept_rates: &[f64]) -> String {
    let mut out = String::from("t");
    for l in labels {
        let _ = write!(out, ",{l}");
    }
    out.push_str(",acceptRate\n");
    for (t, row) in samples.iter().enumerate() {
        let _ = write!(out, "{t}");
        push_f64_row(&mut out, row);
        let _ = writeln!(out, ",{}", accept_rates[t]);
    }
    out
}

fn gof_block(out: &mut String, report: &GofReport, in_model: bool, w: usize) {
    let rows = report.rows.iter().filter(|r| r.in_model == in_model);
    for row in rows {
        let _ = write!(
            out,
            "  {:<w$}  {:>12.4}  {:>12.4}  {:>12.4}  ",
            row.label, row.observed, row.sim_mean, row.sim_sd
        );
        if row.degenerate {
            let _ = write!(out, "{:>12}", "constant");
        } else {
            let _ = write!(out, "{:>12.4}", row.t_ratio);
        }
        let _ = writeln!(out, "{}", if row.flagged { " !" } else { "" });
    }
}

/// Two-block goodness-of-fit table: effects in the fitted model first
/// (tight threshold), auxiliary statistics second (loose threshold).
/// Flagged rows end with `!`.
pub fn gof_text(report: &GofReport) -> String {
    let refs: Vec<&str> = report.rows.iter().map(|r| r.label.as_str()).collect();
    let w = label_width(&refs, "effect".len());
    let mut out = String::new();
    let _ = writeln!(out, "goodness-of-fit t-ratios\n");
    let _ = writeln!(
        out,
        "  {:<w$}  {:>12}  {:>12}  {:>12}  {:>12}",
        "effect", "observed", "simMean", "simSd", "tRatio"
    );
    let _ = writeln!(out, "effects in the model (|t| <= {} expected):", report.in_threshold);
    gof_block(&mut out, report, true, w);
    if report.rows.iter().any(|r| !r.in_model) {
        let _ = writeln!(
            out,
            "effects not in the model (|t| <= {} expected):",
            report.out_threshold
        );
        gof_block(&mut out, report, false, w);
    }
    let flagged = report.rows.iter().filter(|r| r.flagged).count();
    let _ = writeln!(out);
    let _ = writeln!(out, "{flagged} of {} statistics flagged (!)", report.rows.len());
    out
}

/// Per-effect summary of whether the observed statistic sits inside the
/// central 95% band of statistics simulated at the estimate.
pub fn degeneracy_text(check: &DegeneracyCheck) -> String {
    let refs: Vec<&str> = check.labels.iter().map(String::as_str).collect();
    let w = label_width(&refs, "effect".len());
    let mut out = String::new();
    let _ = writeln!(out, "simulated 95% band vs observed statistics\n");
    let _ = writeln!(
        out,
        "  {:<w$}  {:>12}  {:>12}  {:>12}  inside",
        "effect", "observed", "bandLow", "bandHigh"
    );
    for (i, label) in check.labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {label:<w$}  {:>12.4}  {:>12.4}  {:>12.4}  {}",
            check.observed[i],
            check.band_low[i],
            check.band_high[i],
            if check.inside[i] { "yes" } else { "NO" },
        );
    }
    let all_inside = check.inside.iter().all(|&b| b);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{}",
        if all_inside {
            "all observed statistics inside the simulated band"
        } else {
            "observed statistics OUTSIDE the simulated band: possible degeneracy or poor fit"
        }
    );
    out
}

/// Study metrics, one row per (arm, effect):
/// `arm,effect,bias,rmse,rate,rateCILow,rateCIHigh,coverage,samplesConverged,meanRunsConverged,runsPerSample`.
pub fn study_csv(report: &StudyReport) -> String {
    let mut out = String::from(
        "arm,effect,rateKind,bias,rmse,rate,rateCILow,rateCIHigh,coverage,samplesConverged,meanRunsConverged,runsPerSample\n",
    );
    for arm in &report.arms {
        for e in &arm.effects {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                arm.arm,
                e.effect,
                e.rate_kind.token(),
                e.bias,
                e.rmse,
                e.rate_pct,
                e.rate_ci_low_pct,
                e.rate_ci_high_pct,
                e.coverage_pct,
                arm.converged_samples,
                arm.mean_runs_converged,
                arm.runs_per_sample,
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alaam::EeConfig;

    fn two_effect_chain() -> EeChain {
        EeChain {
            theta_init: vec![0.0, 0.0],
            theta_trace: vec![vec![0.5, -1.25], vec![0.625, -1.5]],
            dz_trace: vec![vec![1.0, -2.0], vec![0.0, 3.5]],
            accept_rates: vec![0.25, 0.5],
            failed: None,
        }
    }

    #[test]
    fn run_csv_round_trips_through_the_reader() {
        let chain = two_effect_chain();
        let labels = vec!["Density".to_string(), "Contagion".to_string()];
        let text = run_csv(&labels, &chain);
        assert!(text.starts_with("t,theta_Density,theta_Contagion,dz_Density,dz_Contagion,acceptRate\n"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run_0.csv");
        fs::write(&path, &text).unwrap();
        let trace = read_run_csv(&path).unwrap();
        assert_eq!(trace.labels, labels);
        assert_eq!(trace.theta_trace, chain.theta_trace);
        assert_eq!(trace.dz_trace, chain.dz_trace);
        assert_eq!(trace.accept_rates, chain.accept_rates);
    }

    #[test]
    fn malformed_run_csvs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cases: &[&str] = &[
            "x,theta_A,dz_A,acceptRate\n0,1,2,0.5\n",        // wrong t column
            "t,theta_A,dz_B,acceptRate\n0,1,2,0.5\n",        // label mismatch
            "t,theta_A,dz_A,acceptRate\n0,1,0.5\n",          // short row
            "t,theta_A,dz_A,acceptRate\n",                   // no data
        ];
        for (i, text) in cases.iter().enumerate() {
            let path = dir.path().join(format!("bad_{i}.csv"));
            fs::write(&path, text).unwrap();
            assert!(read_run_csv(&path).is_err(), "case {i} should fail");
        }
    }

    #[test]
    fn status_files_round_trip_reason_and_estimate() {
        let cfg = EeConfig::default();
        let estimate = RunEstimate {
            theta: vec![1.5, -0.25],
            std_error: vec![0.5, 0.125],
            t_cov: nalgebra::DMatrix::zeros(2, 2),
            v_cov: nalgebra::DMatrix::zeros(2, 2),
            n_m: cfg.thinned_count(),
            converged: false,
            fail_reason: Some(EeFailReason::DriftExceedsLimit),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run_0.status");
        fs::write(&path, run_status(&estimate)).unwrap();
        let status = read_run_status(&path).unwrap();
        assert!(!status.converged);
        assert_eq!(status.fail_reason, Some(EeFailReason::DriftExceedsLimit));
        assert_eq!(status.theta, estimate.theta);
        assert_eq!(status.std_error, estimate.std_error);
    }

    #[test]
    fn significance_stars_follow_the_z_rule() {
        let result = SaResult {
            theta: vec![2.0, 0.5],
            std_error: vec![0.5, 0.5],
            t_ratios: vec![0.01, -0.02],
            converged: true,
            cov: nalgebra::DMatrix::identity(2, 2),
            restarts_used: 0,
        };
        let labels = vec!["Density".to_string(), "Contagion".to_string()];
        let text = sa_report(&labels, &result);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].ends_with('*'), "z = 4 row should be starred: {}", lines[1]);
        assert!(!lines[2].ends_with('*'), "z = 1 row should not be starred: {}", lines[2]);
        assert!(text.contains("converged: yes"));
    }

    #[test]
    fn gof_text_separates_blocks_and_flags() {
        let report = GofReport {
            rows: vec![
                alaam::inference::GofRow {
                    label: "Density".into(),
                    observed: 10.0,
                    sim_mean: 10.1,
                    sim_sd: 2.0,
                    t_ratio: 0.05,
                    in_model: true,
                    flagged: false,
                    degenerate: false,
                },
                alaam::inference::GofRow {
                    label: "TriangleT3".into(),
                    observed: 4.0,
                    sim_mean: 30.0,
                    sim_sd: 5.0,
                    t_ratio: 5.2,
                    in_model: false,
                    flagged: true,
                    degenerate: false,
                },
            ],
            in_threshold: 0.1,
            out_threshold: 2.0,
        };
        let text = gof_text(&report);
        let in_pos = text.find("effects in the model").unwrap();
        let out_pos = text.find("effects not in the model").unwrap();
        assert!(in_pos < out_pos);
        assert!(text.contains("5.2000 !"));
        assert!(text.contains("1 of 2 statistics flagged"));
    }
}
