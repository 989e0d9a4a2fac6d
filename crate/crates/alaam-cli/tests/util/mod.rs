//! Helpers for driving the compiled binary in integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// A 12-node undirected ring with five chords, 1-based ids.
pub const NETWORK: &str = "*vertices 12
*edges
1 2
2 3
3 4
4 5
5 6
6 7
7 8
8 9
9 10
10 11
11 12
12 1
1 4
2 7
5 10
8 11
3 9
";

/// Four active nodes (0, 3, 6, 9 once zero-based).
pub const OUTCOME: &str = "1\n0\n0\n1\n0\n0\n1\n0\n0\n1\n0\n0\n";

/// One binary column, alternating.
pub const ATTRS: &str = "sport\n1\n0\n1\n0\n1\n0\n1\n0\n1\n0\n1\n0\n";

pub const MODEL: &str = "Density,Contagion,oOb:sport";

/// Writes the fixture dataset into `dir`, returning the three file paths.
pub fn write_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let net = dir.join("network.txt");
    let outcome = dir.join("outcome.txt");
    let attrs = dir.join("attrs.txt");
    fs::write(&net, NETWORK).unwrap();
    fs::write(&outcome, OUTCOME).unwrap();
    fs::write(&attrs, ATTRS).unwrap();
    (net, outcome, attrs)
}

/// Runs the binary with the given arguments, capturing everything.
pub fn alaam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alaam"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// All regular files directly inside `dir`, name → bytes.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in fs::read_dir(dir).expect("output directory exists") {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            map.insert(
                entry.file_name().to_string_lossy().into_owned(),
                fs::read(entry.path()).unwrap(),
            );
        }
    }
    map
}

/// Asserts an exit code, printing the captured streams on mismatch.
pub fn expect_code(out: &Output, want: i32, context: &str) {
    assert_eq!(
        exit_code(out),
        want,
        "{context}: expected exit {want}\nstdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}
