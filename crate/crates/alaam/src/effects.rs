//! Model effects and their change statistics.
//!
//! A model is an ordered list of effects. Each effect contributes one
//! sufficient statistic `z_I(y)` to the exponential-family probability of an
//! outcome vector `y` given the fixed network and covariates, and is
//! implemented through its *change statistic*: the amount `z_I` rises when a
//! single node's outcome flips from 0 to 1 with everything else held fixed.
//! Samplers and estimators only ever touch change statistics; full statistic
//! vectors are recovered by [`Model::observed_stats`], which activates nodes
//! one at a time from an empty state.
//!
//! Conventions shared by the whole catalogue:
//! - nodes with a structurally missing outcome contribute 0 to every term
//!   that reads a neighbor's outcome, but still count in purely structural
//!   terms (degrees, triangles, reciprocity, category matches);
//! - missing covariate values contribute 0, and a missing category matches
//!   nothing;
//! - on directed networks, neighbor sums run over out- and in-arcs, so a
//!   mutual dyad counts twice.

use crate::attributes::{AttrKind, AttributeTable};
use crate::network::{Network, NetworkKind, TwoPathMatrix};
use crate::outcome::{Outcome, OutcomeVector};

/// Catalogue of effect kinds.
///
/// Grammar tokens (as written in model strings, reports, and CSV headers)
/// are listed with each kind; `oOb`, `oOc`, `oO_Osame`, and `partner-oOc`
/// take an attribute name argument and `GWActivity` a positive decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EffectKind {
    /// `Density`: intercept; change statistic 1.
    Density,
    /// `Activity`: degree of the toggled node (undirected/bipartite).
    Activity,
    /// `Contagion`: active neighbors (undirected), or active arc partners
    /// counted per arc (directed).
    Contagion,
    /// `oOb:<attr>`: the toggled node's binary covariate.
    BinaryCovariate,
    /// `oOc:<attr>`: the toggled node's continuous covariate.
    ContinuousCovariate,
    /// `oO_Osame:<attr>`: neighbors sharing the toggled node's category.
    CategoryMatch,
    /// `partner-oOc:<attr>`: sum of neighbors' continuous covariate.
    PartnerSum,
    /// `GWActivity:<decay>`: geometrically weighted degree,
    /// `e^a (1 - (1 - e^{-a})^d)`.
    GwActivity,
    /// `TriangleT1`: edges among the toggled node's neighbors.
    TriangleT1,
    /// `TriangleT2`: over triangles closed by the toggled node, the number
    /// of active corners.
    TriangleT2,
    /// `TriangleT3`: triangles closed by the toggled node whose other two
    /// corners are both active.
    TriangleT3,
    /// `Sender`: out-degree (directed).
    Sender,
    /// `Receiver`: in-degree (directed).
    Receiver,
    /// `EgoInTwoStar`: in-degree choose 2 (directed).
    EgoInTwoStar,
    /// `EgoOutTwoStar`: out-degree choose 2 (directed).
    EgoOutTwoStar,
    /// `Reciprocity`: mutual-dyad partners of the toggled node (directed).
    Reciprocity,
    /// `ContagionReciprocity`: active mutual-dyad partners (directed).
    ContagionReciprocity,
    /// `TwoPathContagion`: two-path-weighted active same-mode nodes
    /// (bipartite).
    TwoPathContagion,
}

impl EffectKind {
    /// Grammar token for this kind.
    pub fn token(self) -> &'static str {
        match self {
            EffectKind::Density => "Density",
            EffectKind::Activity => "Activity",
            EffectKind::Contagion => "Contagion",
            EffectKind::BinaryCovariate => "oOb",
            EffectKind::ContinuousCovariate => "oOc",
            EffectKind::CategoryMatch => "oO_Osame",
            EffectKind::PartnerSum => "partner-oOc",
            EffectKind::GwActivity => "GWActivity",
            EffectKind::TriangleT1 => "TriangleT1",
            EffectKind::TriangleT2 => "TriangleT2",
            EffectKind::TriangleT3 => "TriangleT3",
            EffectKind::Sender => "Sender",
            EffectKind::Receiver => "Receiver",
            EffectKind::EgoInTwoStar => "EgoInTwoStar",
            EffectKind::EgoOutTwoStar => "EgoOutTwoStar",
            EffectKind::Reciprocity => "Reciprocity",
            EffectKind::ContagionReciprocity => "ContagionReciprocity",
            EffectKind::TwoPathContagion => "TwoPathContagion",
        }
    }

    fn from_token(tok: &str) -> Option<EffectKind> {
        Some(match tok {
            "Density" => EffectKind::Density,
            "Activity" => EffectKind::Activity,
            "Contagion" => EffectKind::Contagion,
            "oOb" => EffectKind::BinaryCovariate,
            "oOc" => EffectKind::ContinuousCovariate,
            "oO_Osame" => EffectKind::CategoryMatch,
            "partner-oOc" => EffectKind::PartnerSum,
            "GWActivity" => EffectKind::GwActivity,
            "TriangleT1" => EffectKind::TriangleT1,
            "TriangleT2" => EffectKind::TriangleT2,
            "TriangleT3" => EffectKind::TriangleT3,
            "Sender" => EffectKind::Sender,
            "Receiver" => EffectKind::Receiver,
            "EgoInTwoStar" => EffectKind::EgoInTwoStar,
            "EgoOutTwoStar" => EffectKind::EgoOutTwoStar,
            "Reciprocity" => EffectKind::Reciprocity,
            "ContagionReciprocity" => EffectKind::ContagionReciprocity,
            "TwoPathContagion" => EffectKind::TwoPathContagion,
            _ => return None,
        })
    }

    /// Attribute column kind this effect requires, if any.
    fn attr_requirement(self) -> Option<AttrKind> {
        match self {
            EffectKind::BinaryCovariate => Some(AttrKind::Binary),
            EffectKind::ContinuousCovariate | EffectKind::PartnerSum => Some(AttrKind::Continuous),
            EffectKind::CategoryMatch => Some(AttrKind::Categorical),
            _ => None,
        }
    }

    fn takes_decay(self) -> bool {
        self == EffectKind::GwActivity
    }

    /// Network kinds this effect is defined for. The bipartite catalogue is
    /// deliberately minimal.
    fn allowed_on(self, kind: NetworkKind) -> bool {
        use EffectKind::*;
        use NetworkKind::*;
        match self {
            Density => true,
            Activity => matches!(kind, Undirected | Bipartite),
            Contagion => matches!(kind, Undirected | Directed),
            BinaryCovariate | ContinuousCovariate | CategoryMatch | PartnerSum => {
                matches!(kind, Undirected | Directed)
            }
            GwActivity | TriangleT1 | TriangleT2 | TriangleT3 => kind == Undirected,
            Sender | Receiver | EgoInTwoStar | EgoOutTwoStar | Reciprocity
            | ContagionReciprocity => kind == Directed,
            TwoPathContagion => kind == Bipartite,
        }
    }

    /// True when change statistics of this kind read two-path counts, so a
    /// model containing it builds the cache at bind time.
    fn wants_two_paths(self) -> bool {
        matches!(
            self,
            EffectKind::TriangleT1
                | EffectKind::TriangleT2
                | EffectKind::TriangleT3
                | EffectKind::TwoPathContagion
        )
    }
}

/// A parsed effect: kind plus its argument.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectSpec {
    pub kind: EffectKind,
    /// Attribute name for covariate effects.
    pub attr: Option<String>,
    /// Decay for geometrically weighted effects.
    pub decay: Option<f64>,
}

impl EffectSpec {
    /// Effect without arguments.
    pub fn plain(kind: EffectKind) -> EffectSpec {
        EffectSpec { kind, attr: None, decay: None }
    }

    /// Covariate effect on a named attribute.
    pub fn with_attr(kind: EffectKind, attr: &str) -> EffectSpec {
        EffectSpec { kind, attr: Some(attr.to_string()), decay: None }
    }

    /// Geometrically weighted effect with a decay.
    pub fn with_decay(kind: EffectKind, decay: f64) -> EffectSpec {
        EffectSpec { kind, attr: None, decay: Some(decay) }
    }

    /// Canonical label used in reports and CSV headers: the grammar token,
    /// plus `:<attr>` or `:<decay>` when the effect takes an argument.
    pub fn label(&self) -> String {
        match (&self.attr, self.decay) {
            (Some(a), _) => format!("{}:{}", self.kind.token(), a),
            (None, Some(d)) => format!("{}:{}", self.kind.token(), d),
            _ => self.kind.token().to_string(),
        }
    }
}

/// Effect-grammar and binding failures.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EffectError {
    #[error("unknown effect kind \"{0}\"")]
    UnknownKind(String),
    #[error("effect \"{0}\" does not take an argument")]
    UnexpectedArgument(String),
    #[error("effect \"{0}\" needs an attribute name, e.g. \"{0}:<attr>\"")]
    MissingAttribute(String),
    #[error("effect \"{0}\" needs a positive decay, e.g. \"{0}:2.0\"")]
    MissingDecay(String),
    #[error("effect \"{token}\": decay must be a positive finite number")]
    BadDecay { token: String },
    #[error("effect \"{effect}\": no attribute column named \"{attr}\"")]
    NoSuchAttribute { effect: String, attr: String },
    #[error("effect \"{effect}\": attribute \"{attr}\" is {found}, but this effect needs a {expected} column")]
    WrongAttributeKind { effect: String, attr: String, expected: &'static str, found: &'static str },
    #[error("effect \"{effect}\" is not defined for {kind} networks")]
    IncompatibleNetworkKind { effect: String, kind: &'static str },
    #[error("effect \"{0}\" appears more than once")]
    DuplicateEffect(String),
    #[error("a model needs at least one effect")]
    EmptyModel,
}

/// Parses one grammar token `Kind[:attr][:decay]`.
pub fn parse_effect(token: &str) -> Result<EffectSpec, EffectError> {
    let token = token.trim();
    let (head, arg) = match token.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (token, None),
    };
    let kind = EffectKind::from_token(head).ok_or_else(|| EffectError::UnknownKind(head.to_string()))?;
    if kind.attr_requirement().is_some() {
        let attr = arg.filter(|a| !a.is_empty()).ok_or_else(|| EffectError::MissingAttribute(head.to_string()))?;
        return Ok(EffectSpec::with_attr(kind, attr));
    }
    if kind.takes_decay() {
        let raw = arg.filter(|a| !a.is_empty()).ok_or_else(|| EffectError::MissingDecay(head.to_string()))?;
        let decay: f64 = raw.parse().map_err(|_| EffectError::BadDecay { token: token.to_string() })?;
        if !decay.is_finite() || decay <= 0.0 {
            return Err(EffectError::BadDecay { token: token.to_string() });
        }
        return Ok(EffectSpec::with_decay(kind, decay));
    }
    if arg.is_some() {
        return Err(EffectError::UnexpectedArgument(head.to_string()));
    }
    Ok(EffectSpec::plain(kind))
}

/// Parses a comma-separated model string, preserving order.
pub fn parse_model(text: &str) -> Result<Vec<EffectSpec>, EffectError> {
    let specs: Vec<EffectSpec> = text
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_effect)
        .collect::<Result<_, _>>()?;
    if specs.is_empty() {
        return Err(EffectError::EmptyModel);
    }
    Ok(specs)
}

/// An effect resolved against a concrete network and attribute table.
#[derive(Clone, Debug)]
enum BoundEffect {
    Density,
    Activity,
    ContagionUndirected,
    ContagionDirected,
    CovariateValue { col: usize },
    CategoryMatch { col: usize },
    PartnerSum { col: usize },
    /// Change statistic precomputed per degree.
    GwActivity { by_degree: Vec<f64> },
    TriangleT1,
    TriangleT2,
    TriangleT3,
    Sender,
    Receiver,
    EgoInTwoStar,
    EgoOutTwoStar,
    Reciprocity,
    ContagionReciprocity,
    TwoPathContagion,
}

/// A model bound to one dataset: validated effects, resolved attribute
/// columns, and the two-path cache when any effect needs it.
///
/// A bound model must only be used with the network and attribute table it
/// was bound against (checked by debug assertions on sizes).
#[derive(Clone, Debug)]
pub struct Model {
    specs: Vec<EffectSpec>,
    bound: Vec<BoundEffect>,
    labels: Vec<String>,
    two_paths: Option<TwoPathMatrix>,
    node_count: usize,
}

impl Model {
    /// Validates and binds `specs` against a dataset.
    pub fn bind(specs: Vec<EffectSpec>, net: &Network, attrs: &AttributeTable) -> Result<Model, EffectError> {
        Model::bind_with_cache(specs, net, attrs, true)
    }

    /// Parses a comma-separated model string and binds it.
    pub fn parse(text: &str, net: &Network, attrs: &AttributeTable) -> Result<Model, EffectError> {
        Model::bind(parse_model(text)?, net, attrs)
    }

    /// [`Model::bind`] with the two-path cache forced off; change statistics
    /// then fall back to on-the-fly neighbor intersection. Results are
    /// identical either way — this knob exists so that equivalence can be
    /// verified and costs compared.
    pub fn bind_with_cache(
        specs: Vec<EffectSpec>,
        net: &Network,
        attrs: &AttributeTable,
        use_cache: bool,
    ) -> Result<Model, EffectError> {
        if specs.is_empty() {
            return Err(EffectError::EmptyModel);
        }
        let mut labels: Vec<String> = Vec::with_capacity(specs.len());
        let mut bound = Vec::with_capacity(specs.len());
        for spec in &specs {
            let label = spec.label();
            if labels.contains(&label) {
                return Err(EffectError::DuplicateEffect(label));
            }
            if !spec.kind.allowed_on(net.kind()) {
                return Err(EffectError::IncompatibleNetworkKind {
                    effect: label,
                    kind: net.kind().name(),
                });
            }
            bound.push(Model::bind_one(spec, net, attrs, &label)?);
            labels.push(label);
        }
        let two_paths = if use_cache && specs.iter().any(|s| s.kind.wants_two_paths()) {
            Some(TwoPathMatrix::build(net))
        } else {
            None
        };
        Ok(Model { specs, bound, labels, two_paths, node_count: net.node_count() })
    }

    fn bind_one(
        spec: &EffectSpec,
        net: &Network,
        attrs: &AttributeTable,
        label: &str,
    ) -> Result<BoundEffect, EffectError> {
        if let Some(required) = spec.kind.attr_requirement() {
            let attr = spec.attr.as_deref().expect("covariate specs carry an attribute name");
            let col = attrs.index_of(attr).ok_or_else(|| EffectError::NoSuchAttribute {
                effect: label.to_string(),
                attr: attr.to_string(),
            })?;
            let found = attrs.column_at(col).kind();
            if found != required {
                return Err(EffectError::WrongAttributeKind {
                    effect: label.to_string(),
                    attr: attr.to_string(),
                    expected: required.name(),
                    found: found.name(),
                });
            }
            return Ok(match spec.kind {
                EffectKind::BinaryCovariate | EffectKind::ContinuousCovariate => {
                    BoundEffect::CovariateValue { col }
                }
                EffectKind::CategoryMatch => BoundEffect::CategoryMatch { col },
                EffectKind::PartnerSum => BoundEffect::PartnerSum { col },
                _ => unreachable!("only covariate kinds require attributes"),
            });
        }
        Ok(match spec.kind {
            EffectKind::Density => BoundEffect::Density,
            EffectKind::Activity => BoundEffect::Activity,
            EffectKind::Contagion => {
                if net.kind() == NetworkKind::Directed {
                    BoundEffect::ContagionDirected
                } else {
                    BoundEffect::ContagionUndirected
                }
            }
            EffectKind::GwActivity => {
                let decay = spec.decay.expect("geometrically weighted specs carry a decay");
                let max_degree = (0..net.node_count() as u32).map(|i| net.degree(i)).max().unwrap_or(0);
                let scale = decay.exp();
                let base = 1.0 - (-decay).exp();
                let by_degree = (0..=max_degree as i32)
                    .map(|d| scale * (1.0 - base.powi(d)))
                    .collect();
                BoundEffect::GwActivity { by_degree }
            }
            EffectKind::TriangleT1 => BoundEffect::TriangleT1,
            EffectKind::TriangleT2 => BoundEffect::TriangleT2,
            EffectKind::TriangleT3 => BoundEffect::TriangleT3,
            EffectKind::Sender => BoundEffect::Sender,
            EffectKind::Receiver => BoundEffect::Receiver,
            EffectKind::EgoInTwoStar => BoundEffect::EgoInTwoStar,
            EffectKind::EgoOutTwoStar => BoundEffect::EgoOutTwoStar,
            EffectKind::Reciprocity => BoundEffect::Reciprocity,
            EffectKind::ContagionReciprocity => BoundEffect::ContagionReciprocity,
            EffectKind::TwoPathContagion => BoundEffect::TwoPathContagion,
            _ => unreachable!("covariate kinds handled above"),
        })
    }

    /// Number of effects (the model dimension).
    pub fn p(&self) -> usize {
        self.bound.len()
    }

    /// Canonical effect labels, in model order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The parsed effect list this model was bound from.
    pub fn specs(&self) -> &[EffectSpec] {
        &self.specs
    }

    /// Position of the `Density` intercept, if the model has one.
    pub fn density_index(&self) -> Option<usize> {
        self.specs.iter().position(|s| s.kind == EffectKind::Density)
    }

    /// True when the model leads with the `Density` intercept, the
    /// recommended layout.
    pub fn starts_with_density(&self) -> bool {
        self.specs.first().map(|s| s.kind) == Some(EffectKind::Density)
    }

    /// The two-path cache, when one was built.
    pub fn two_path_cache(&self) -> Option<&TwoPathMatrix> {
        self.two_paths.as_ref()
    }

    /// Writes the change-statistic vector for toggling node `i` from 0 to 1
    /// into `out`.
    ///
    /// Preconditions (programming errors when violated): `y[i]` is 0, `i` is
    /// a free node, and `out` has length `p`.
    pub fn change_stats(
        &self,
        net: &Network,
        attrs: &AttributeTable,
        y: &OutcomeVector,
        i: u32,
        out: &mut [f64],
    ) {
        debug_assert_eq!(y.get(i), Outcome::Zero, "change statistics require y[i] = 0");
        // The free list is ascending, so membership is a binary search; this
        // assert sits on the sampler's hot path and must stay cheap.
        debug_assert!(y.free_nodes().binary_search(&i).is_ok(), "node {i} is not free");
        debug_assert_eq!(out.len(), self.p());
        debug_assert_eq!(y.len(), self.node_count);
        let tp = self.two_paths.as_ref();
        for (slot, effect) in out.iter_mut().zip(&self.bound) {
            *slot = delta(effect, net, attrs, tp, y, i);
        }
    }

    /// Statistic vector of an observed outcome, accumulated by activating
    /// its active nodes one at a time (ascending id) from an empty state.
    /// The result is insertion-order independent.
    pub fn observed_stats(&self, net: &Network, attrs: &AttributeTable, y: &OutcomeVector) -> Vec<f64> {
        let mut work = y.cleared();
        let mut z = vec![0.0; self.p()];
        let mut buf = vec![0.0; self.p()];
        for i in 0..y.len() as u32 {
            if y.is_one(i) {
                self.change_stats(net, attrs, &work, i, &mut buf);
                for (acc, d) in z.iter_mut().zip(&buf) {
                    *acc += d;
                }
                work.set(i, Outcome::One);
            }
        }
        z
    }
}

/// Number of common neighbors of `i` and `u`, via the cache when present.
fn common_neighbors(net: &Network, tp: Option<&TwoPathMatrix>, i: u32, u: u32) -> f64 {
    match tp {
        Some(tp) => tp.count(i, u) as f64,
        None => net.neighbors(u).filter(|&v| v != i && net.has_edge(i, v)).count() as f64,
    }
}

fn choose2(d: usize) -> f64 {
    (d * d.saturating_sub(1) / 2) as f64
}

fn delta(
    effect: &BoundEffect,
    net: &Network,
    attrs: &AttributeTable,
    tp: Option<&TwoPathMatrix>,
    y: &OutcomeVector,
    i: u32,
) -> f64 {
    match effect {
        BoundEffect::Density => 1.0,
        BoundEffect::Activity => net.degree(i) as f64,
        BoundEffect::ContagionUndirected => net.neighbors(i).map(|u| y.value(u)).sum(),
        BoundEffect::ContagionDirected => {
            net.neighbors(i).map(|u| y.value(u)).sum::<f64>()
                + net.in_neighbors(i).map(|u| y.value(u)).sum::<f64>()
        }
        BoundEffect::CovariateValue { col } => attrs.column_at(*col).numeric(i),
        BoundEffect::CategoryMatch { col } => {
            let column = attrs.column_at(*col);
            match column.category(i) {
                None => 0.0,
                Some(ci) => {
                    let matches = |u: u32| (column.category(u) == Some(ci)) as u8 as f64;
                    let out_sum: f64 = net.neighbors(i).map(matches).sum();
                    if net.kind() == NetworkKind::Directed {
                        out_sum + net.in_neighbors(i).map(matches).sum::<f64>()
                    } else {
                        out_sum
                    }
                }
            }
        }
        BoundEffect::PartnerSum { col } => {
            let column = attrs.column_at(*col);
            let out_sum: f64 = net.neighbors(i).map(|u| column.numeric(u)).sum();
            if net.kind() == NetworkKind::Directed {
                out_sum + net.in_neighbors(i).map(|u| column.numeric(u)).sum::<f64>()
            } else {
                out_sum
            }
        }
        BoundEffect::GwActivity { by_degree } => by_degree[net.degree(i)],
        BoundEffect::TriangleT1 => {
            // Each edge among N(i) closes one triangle and is seen from both
            // endpoints.
            let paths: f64 = net.neighbors(i).map(|u| common_neighbors(net, tp, i, u)).sum();
            0.5 * paths
        }
        BoundEffect::TriangleT2 => net
            .neighbors(i)
            .filter(|&u| y.is_one(u))
            .map(|u| common_neighbors(net, tp, i, u))
            .sum(),
        BoundEffect::TriangleT3 => {
            // Active-active edges among N(i); each seen from both endpoints.
            let pairs: usize = net
                .neighbors(i)
                .filter(|&u| y.is_one(u))
                .map(|u| {
                    net.neighbors(u)
                        .filter(|&v| v != i && y.is_one(v) && net.has_edge(i, v))
                        .count()
                })
                .sum();
            0.5 * pairs as f64
        }
        BoundEffect::Sender => net.degree(i) as f64,
        BoundEffect::Receiver => net.in_degree(i) as f64,
        BoundEffect::EgoInTwoStar => choose2(net.in_degree(i)),
        BoundEffect::EgoOutTwoStar => choose2(net.degree(i)),
        BoundEffect::Reciprocity => {
            net.neighbors(i).filter(|&u| net.has_edge(u, i)).count() as f64
        }
        BoundEffect::ContagionReciprocity => {
            net.neighbors(i).filter(|&u| y.is_one(u) && net.has_edge(u, i)).count() as f64
        }
        BoundEffect::TwoPathContagion => match tp {
            Some(tp) => tp
                .row(i)
                .filter(|&(u, _)| y.is_one(u))
                .map(|(_, c)| c as f64)
                .sum(),
            None => net
                .neighbors(i)
                .map(|b| net.neighbors(b).filter(|&u| u != i && y.is_one(u)).count())
                .sum::<usize>() as f64,
        },
    }
}
