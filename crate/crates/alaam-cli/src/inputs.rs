//! Shared input loading: network, attribute files, outcome, zones, model
//! binding, and parameter-vector parsing. All failures are data errors
//! (exit code 2) carrying the offending file or value.

use std::path::Path;

use alaam::attributes::{AttrKind, AttributeTable};
use alaam::effects::Model;
use alaam::fileio;
use alaam::network::{Network, NetworkKind};
use alaam::outcome::{Outcome, OutcomeVector};

use crate::errors::CliError;

pub fn parse_kind(value: &str) -> Result<NetworkKind, CliError> {
    match value {
        "undirected" => Ok(NetworkKind::Undirected),
        "directed" => Ok(NetworkKind::Directed),
        "bipartite" => Ok(NetworkKind::Bipartite),
        other => Err(CliError::Usage(format!(
            "unknown network kind '{other}' (expected undirected, directed, or bipartite)"
        ))),
    }
}

fn parse_attr_kind(value: &str) -> Result<AttrKind, CliError> {
    match value {
        "binary" => Ok(AttrKind::Binary),
        "continuous" => Ok(AttrKind::Continuous),
        "categorical" => Ok(AttrKind::Categorical),
        other => Err(CliError::Usage(format!(
            "unknown attribute kind '{other}' (expected binary, continuous, or categorical)"
        ))),
    }
}

pub fn load_network(path: &str, kind: NetworkKind) -> Result<Network, CliError> {
    fileio::load_network(Path::new(path), kind).map_err(|e| CliError::data(path, e))
}

/// Loads a comma-separated `kind:path` attribute list into one table.
pub fn load_attribute_files(
    spec: Option<&str>,
    node_count: usize,
) -> Result<AttributeTable, CliError> {
    let mut table = AttributeTable::new();
    let Some(spec) = spec else { return Ok(table) };
    for item in spec.split(',').filter(|s| !s.is_empty()) {
        let Some((kind, path)) = item.split_once(':') else {
            return Err(CliError::Usage(format!(
                "attribute spec '{item}' must be kind:path (e.g. continuous:alcohol.txt)"
            )));
        };
        let kind = parse_attr_kind(kind)?;
        let loaded = fileio::load_attributes(Path::new(path), kind, node_count)
            .map_err(|e| CliError::data(path, e))?;
        table.merge(loaded).map_err(|e| CliError::data(path, e))?;
    }
    Ok(table)
}

/// Loads the outcome, validates it against the network, and — when a zone
/// file is given — fixes every outermost-zone node so estimation conditions
/// on the snowball boundary.
pub fn load_outcome(
    path: &str,
    net: &Network,
    zones: Option<&str>,
) -> Result<OutcomeVector, CliError> {
    let mut y = fileio::load_outcome(Path::new(path), net.node_count())
        .map_err(|e| CliError::data(path, e))?;
    y.check_against(net).map_err(|e| CliError::data(path, e))?;
    if let Some(zone_path) = zones {
        let z = fileio::load_zones(Path::new(zone_path), net.node_count())
            .map_err(|e| CliError::data(zone_path, e))?;
        z.check_against(net).map_err(|e| CliError::data(zone_path, e))?;
        y.restrict_to_inner_zones(&z).map_err(|e| CliError::data(zone_path, e))?;
    }
    if y.free_nodes().is_empty() {
        return Err(CliError::Data(format!("{path}: no free nodes left to model")));
    }
    Ok(y)
}

/// Parses and binds the model grammar, warning (on standard error) when the
/// first effect is not the Density intercept analog.
pub fn bind_model(
    grammar: &str,
    net: &Network,
    attrs: &AttributeTable,
) -> Result<Model, CliError> {
    let model =
        Model::parse(grammar, net, attrs).map_err(|e| CliError::data("--model", e))?;
    if !model.starts_with_density() {
        eprintln!("alaam: warning: model does not start with Density; estimates of the remaining effects are rarely interpretable without the intercept analog");
    }
    Ok(model)
}

/// Parses a comma-separated list of reals.
pub fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Data(format!("{what} '{raw}': {e}")))
        })
        .collect()
}

/// Parses a comma-separated parameter vector and checks its length against
/// the model.
pub fn parse_theta(raw: &str, expected: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values = parse_f64_list(raw, what)?;
    if values.len() != expected {
        return Err(CliError::Data(format!(
            "{what} has {} values but the model has {expected} effects",
            values.len()
        )));
    }
    Ok(values)
}

/// All-inactive starting outcome: every node free and zero, except mode-B
/// nodes of a bipartite network, which are structurally fixed.
pub fn default_start(net: &Network) -> OutcomeVector {
    let values: Vec<Outcome> = (0..net.node_count() as u32)
        .map(|i| {
            if net.kind() == NetworkKind::Bipartite && !net.is_mode_a(i) {
                Outcome::Fixed
            } else {
                Outcome::Zero
            }
        })
        .collect();
    OutcomeVector::new(values)
}
