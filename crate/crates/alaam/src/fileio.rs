//! Plain-text file formats for networks, covariates, outcomes, and zones.
//!
//! Network files follow the Pajek-style layout:
//!
//! ```text
//! *vertices 5        (or `*vertices 5 3` for bipartite, 3 = mode-A size)
//! *edges             (undirected/bipartite; directed files use `*arcs`)
//! 1 2
//! 2 3
//! ```
//!
//! Node ids are 1-based in files and 0-based in memory. Lines starting with
//! `%` are comments; keywords are case-insensitive; blank lines are ignored.
//!
//! Covariate files carry a whitespace-separated header of column names and
//! one row per node; outcome files a single headerless column of `0`/`1`/
//! `NA`; zone files a single headerless column of non-negative integers.
//! `NA` marks a missing value everywhere.

use std::fs;
use std::path::Path;

use crate::attributes::{AttrColumn, AttrKind, AttributeError, AttributeTable};
use crate::network::{Network, NetworkError, NetworkKind};
use crate::outcome::{Outcome, OutcomeVector, ZoneAssignment};

/// Loader failures; line numbers are 1-based positions in the named file.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: cannot read: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: expected {expected}, found \"{found}\"")]
    Malformed { path: String, line: usize, expected: &'static str, found: String },
    #[error("{path} line {line}: {source}")]
    BadStructure {
        path: String,
        line: usize,
        #[source]
        source: NetworkError,
    },
    #[error("{path}: a {kind} network file must declare its ties with \"{expected}\"")]
    WrongTieSection { path: String, kind: &'static str, expected: &'static str },
    #[error("{path}: has {found} data rows, expected {expected} (one per node)")]
    RowCount { path: String, expected: usize, found: usize },
    #[error("{path}: {source}")]
    Column {
        path: String,
        #[source]
        source: AttributeError,
    },
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: display(path), source })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Numbered, comment- and blank-stripped lines of a file.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| (idx + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('%'))
}

/// Reads a network file of the given kind.
pub fn load_network(path: &Path, kind: NetworkKind) -> Result<Network, LoadError> {
    let text = read(path)?;
    let p = display(path);
    let mut lines = data_lines(&text);

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| LoadError::Malformed { path: p.clone(), line: 1, expected: "*vertices header", found: String::new() })?;
    let mut tokens = header.split_whitespace();
    let keyword = tokens.next().unwrap_or("");
    if !keyword.eq_ignore_ascii_case("*vertices") {
        return Err(LoadError::Malformed { path: p, line: line_no, expected: "*vertices header", found: header.to_string() });
    }
    let counts: Vec<usize> = tokens
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| LoadError::Malformed { path: p.clone(), line: line_no, expected: "node counts on *vertices line", found: header.to_string() })?;

    let mut net = match (kind, counts.as_slice()) {
        (NetworkKind::Bipartite, &[n, mode_a]) => Network::new_bipartite(n, mode_a)
            .map_err(|source| LoadError::BadStructure { path: p.clone(), line: line_no, source })?,
        (NetworkKind::Bipartite, _) => {
            return Err(LoadError::Malformed {
                path: p,
                line: line_no,
                expected: "\"*vertices N M\" (M = mode-A size) for a bipartite network",
                found: header.to_string(),
            })
        }
        (k, &[n]) => Network::new(k, n),
        _ => {
            return Err(LoadError::Malformed {
                path: p,
                line: line_no,
                expected: "\"*vertices N\" for a one-mode network",
                found: header.to_string(),
            })
        }
    };

    let expected_section = if kind == NetworkKind::Directed { "*arcs" } else { "*edges" };
    let (line_no, section) = lines
        .next()
        .ok_or_else(|| LoadError::Malformed { path: p.clone(), line: line_no + 1, expected: "*edges or *arcs section", found: String::new() })?;
    if !section.eq_ignore_ascii_case(expected_section) {
        if section.eq_ignore_ascii_case("*edges") || section.eq_ignore_ascii_case("*arcs") {
            return Err(LoadError::WrongTieSection { path: p, kind: kind.name(), expected: expected_section });
        }
        return Err(LoadError::Malformed { path: p, line: line_no, expected: "*edges or *arcs section", found: section.to_string() });
    }

    let n = net.node_count();
    for (line_no, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let pair: Option<(usize, usize)> = match toks.as_slice() {
            [a, b] => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        let (i, j) = pair.ok_or_else(|| LoadError::Malformed {
            path: p.clone(),
            line: line_no,
            expected: "a 1-based node id pair \"i j\"",
            found: line.to_string(),
        })?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(LoadError::Malformed {
                path: p,
                line: line_no,
                expected: "node ids in 1..=node count",
                found: line.to_string(),
            });
        }
        let (i, j) = (i as u32 - 1, j as u32 - 1);
        let added = if kind == NetworkKind::Directed { net.add_arc(i, j) } else { net.add_edge(i, j) };
        added.map_err(|source| LoadError::BadStructure { path: p.clone(), line: line_no, source })?;
    }
    Ok(net)
}

/// Serializes a network in the format read by [`load_network`], ties sorted
/// ascending so structurally equal networks serialize identically.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    match net.kind() {
        NetworkKind::Bipartite => {
            out.push_str(&format!("*vertices {} {}\n*edges\n", net.node_count(), net.mode_a_size()))
        }
        NetworkKind::Directed => out.push_str(&format!("*vertices {}\n*arcs\n", net.node_count())),
        NetworkKind::Undirected => out.push_str(&format!("*vertices {}\n*edges\n", net.node_count())),
    }
    for (i, j) in net.tie_pairs() {
        out.push_str(&format!("{} {}\n", i + 1, j + 1));
    }
    out
}

fn parse_binary(tok: &str) -> Option<Option<bool>> {
    match tok {
        "NA" => Some(None),
        "0" => Some(Some(false)),
        "1" => Some(Some(true)),
        _ => None,
    }
}

/// Reads a covariate file whose columns all hold values of `kind`.
pub fn load_attributes(path: &Path, kind: AttrKind, node_count: usize) -> Result<AttributeTable, LoadError> {
    let text = read(path)?;
    let p = display(path);
    let mut lines = data_lines(&text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| LoadError::Malformed { path: p.clone(), line: 1, expected: "header row of column names", found: String::new() })?;
    let names: Vec<&str> = header.split_whitespace().collect();

    let mut cells: Vec<Vec<&str>> = Vec::new();
    for (line_no, line) in lines {
        let row: Vec<&str> = line.split_whitespace().collect();
        if row.len() != names.len() {
            return Err(LoadError::Malformed {
                path: p,
                line: line_no,
                expected: "one value per header column",
                found: line.to_string(),
            });
        }
        cells.push(row);
    }
    if cells.len() != node_count {
        return Err(LoadError::RowCount { path: p, expected: node_count, found: cells.len() });
    }

    // Re-derive data line numbers for error messages on bad tokens.
    let line_of_row: Vec<usize> = data_lines(&text).skip(1).map(|(no, _)| no).collect();

    let mut table = AttributeTable::new();
    for (c, name) in names.iter().enumerate() {
        let column = match kind {
            AttrKind::Binary => {
                let mut v = Vec::with_capacity(cells.len());
                for (r, row) in cells.iter().enumerate() {
                    v.push(parse_binary(row[c]).ok_or_else(|| LoadError::Malformed {
                        path: p.clone(),
                        line: line_of_row[r],
                        expected: "binary value 0, 1, or NA",
                        found: row[c].to_string(),
                    })?);
                }
                AttrColumn::Binary(v)
            }
            AttrKind::Continuous => {
                let mut v = Vec::with_capacity(cells.len());
                for (r, row) in cells.iter().enumerate() {
                    let val = match row[c] {
                        "NA" => None,
                        tok => Some(tok.parse::<f64>().map_err(|_| LoadError::Malformed {
                            path: p.clone(),
                            line: line_of_row[r],
                            expected: "real value or NA",
                            found: tok.to_string(),
                        })?),
                    };
                    v.push(val);
                }
                AttrColumn::Continuous(v)
            }
            AttrKind::Categorical => {
                let mut v = Vec::with_capacity(cells.len());
                for (r, row) in cells.iter().enumerate() {
                    let val = match row[c] {
                        "NA" => None,
                        tok => Some(tok.parse::<u32>().map_err(|_| LoadError::Malformed {
                            path: p.clone(),
                            line: line_of_row[r],
                            expected: "non-negative integer category or NA",
                            found: tok.to_string(),
                        })?),
                    };
                    v.push(val);
                }
                AttrColumn::Categorical(v)
            }
        };
        table
            .add_column(name, column)
            .map_err(|source| LoadError::Column { path: p.clone(), source })?;
    }
    Ok(table)
}

/// Reads a single-column outcome file (`0` / `1` / `NA`, no header).
pub fn load_outcome(path: &Path, node_count: usize) -> Result<OutcomeVector, LoadError> {
    let text = read(path)?;
    let p = display(path);
    let mut values = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let v = match line {
            "0" => Outcome::Zero,
            "1" => Outcome::One,
            "NA" => Outcome::Fixed,
            other => {
                return Err(LoadError::Malformed {
                    path: p,
                    line: line_no,
                    expected: "outcome value 0, 1, or NA",
                    found: other.to_string(),
                })
            }
        };
        values.push(v);
    }
    if values.len() != node_count {
        return Err(LoadError::RowCount { path: p, expected: node_count, found: values.len() });
    }
    Ok(OutcomeVector::new(values))
}

/// Serializes an outcome vector in the format read by [`load_outcome`].
pub fn write_outcome(y: &OutcomeVector) -> String {
    let mut out = String::new();
    for i in 0..y.len() as u32 {
        out.push_str(match y.get(i) {
            Outcome::Zero => "0\n",
            Outcome::One => "1\n",
            Outcome::Fixed => "NA\n",
        });
    }
    out
}

/// Reads a single-column snowball zone file (non-negative integers, no header).
pub fn load_zones(path: &Path, node_count: usize) -> Result<ZoneAssignment, LoadError> {
    let text = read(path)?;
    let p = display(path);
    let mut zones = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let z: u32 = line.parse().map_err(|_| LoadError::Malformed {
            path: p.clone(),
            line: line_no,
            expected: "non-negative integer zone",
            found: line.to_string(),
        })?;
        zones.push(z);
    }
    if zones.len() != node_count {
        return Err(LoadError::RowCount { path: p, expected: node_count, found: zones.len() });
    }
    Ok(ZoneAssignment::new(zones))
}
