//! Fits the bundled `data/lifestyle50` dataset and checks that the planted
//! story comes back out: the fit converges, the contagion and alcohol
//! effects are significant and positive, and the inert covariates are not
//! flagged. The dataset is regenerated by
//! `cargo run -p alaam --example make_lifestyle50`.

mod util;

use std::fs;
use std::path::PathBuf;

use tempfile::tempdir;
use util::{alaam, expect_code};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lifestyle50")
}

#[test]
fn bundled_dataset_recovers_the_planted_effects() {
    let data = data_dir();
    let dir = tempdir().unwrap();
    let out_dir = dir.path().join("fit");
    let attrs = format!(
        "continuous:{},binary:{}",
        data.join("alcohol.txt").display(),
        data.join("sport.txt").display()
    );
    let out = alaam(&[
        "estimate-sa",
        "--network",
        data.join("friendship.net").to_str().unwrap(),
        "--kind",
        "directed",
        "--attrs",
        &attrs,
        "--outcome",
        data.join("smoking.txt").to_str().unwrap(),
        "--model",
        "Density,Contagion,Sender,Receiver,oOc:alcohol,oOb:sport",
        "--seed",
        "1",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    expect_code(&out, 0, "estimate-sa on the bundled dataset");

    let report = fs::read_to_string(out_dir.join("sa_report.txt")).unwrap();
    assert!(report.contains("converged: yes"), "fit converges:\n{report}");

    let row = |label: &str| -> (f64, bool) {
        let line = report
            .lines()
            .find(|l| l.trim_start().starts_with(label))
            .unwrap_or_else(|| panic!("report has a {label} row:\n{report}"));
        let estimate: f64 = line
            .split_whitespace()
            .nth(1)
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| panic!("unparseable row: {line}"));
        (estimate, line.trim_end().ends_with('*'))
    };

    for label in ["Contagion", "oOc:alcohol"] {
        let (estimate, starred) = row(label);
        assert!(estimate > 0.0, "{label} estimate is positive, got {estimate}");
        assert!(starred, "{label} is significant:\n{report}");
    }
    for label in ["Sender", "Receiver", "oOb:sport"] {
        let (_, starred) = row(label);
        assert!(!starred, "{label} stays insignificant:\n{report}");
    }
}
