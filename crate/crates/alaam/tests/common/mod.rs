//! Shared test oracles.
//!
//! Everything in this module is deliberately naive: statistics are computed
//! by enumerating nodes, pairs, and triples with nested loops, and model
//! distributions are computed by visiting every one of the `2^F` outcome
//! states. Correctness is meant to be checkable by eye, so the fast
//! incremental implementations in the library can be verified against code
//! that shares none of their structure.

#![allow(dead_code)]

use alaam::{
    AttrColumn, AttributeTable, Data, EffectKind, EffectSpec, Model, Network, NetworkKind,
    Outcome, OutcomeVector,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Brute-force statistic counting
// ---------------------------------------------------------------------------

fn is_one(y: &OutcomeVector, i: u32) -> bool {
    y.get(i) == Outcome::One
}

/// Out-neighborhood by probing every ordered pair. On undirected and
/// bipartite networks this is the full neighborhood.
fn nbrs_out(net: &Network, i: u32) -> Vec<u32> {
    (0..net.node_count() as u32).filter(|&j| j != i && net.has_edge(i, j)).collect()
}

fn nbrs_in(net: &Network, i: u32) -> Vec<u32> {
    (0..net.node_count() as u32).filter(|&j| j != i && net.has_edge(j, i)).collect()
}

fn attr_numeric(attrs: &AttributeTable, name: &str, i: u32) -> f64 {
    let col = attrs.column_at(attrs.index_of(name).expect("attribute exists"));
    match col {
        AttrColumn::Binary(v) => v[i as usize].map(|b| b as u8 as f64).unwrap_or(0.0),
        AttrColumn::Continuous(v) => v[i as usize].unwrap_or(0.0),
        AttrColumn::Categorical(_) => panic!("numeric read of a categorical column"),
    }
}

fn attr_category(attrs: &AttributeTable, name: &str, i: u32) -> Option<u32> {
    let col = attrs.column_at(attrs.index_of(name).expect("attribute exists"));
    match col {
        AttrColumn::Categorical(v) => v[i as usize],
        _ => panic!("category read of a non-categorical column"),
    }
}

fn binomial2(k: usize) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// All triangles `{a < b < c}` of an undirected network.
fn triangles(net: &Network) -> Vec<(u32, u32, u32)> {
    let n = net.node_count() as u32;
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if !net.has_edge(a, b) {
                continue;
            }
            for c in (b + 1)..n {
                if net.has_edge(a, c) && net.has_edge(b, c) {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

/// Global statistic of one effect, counted configuration by configuration.
pub fn brute_stat(
    spec: &EffectSpec,
    net: &Network,
    attrs: &AttributeTable,
    y: &OutcomeVector,
) -> f64 {
    let n = net.node_count() as u32;
    let ones: Vec<u32> = (0..n).filter(|&i| is_one(y, i)).collect();
    let directed = net.kind() == NetworkKind::Directed;
    match spec.kind {
        EffectKind::Density => ones.len() as f64,
        EffectKind::Activity => ones.iter().map(|&i| nbrs_out(net, i).len() as f64).sum(),
        EffectKind::Contagion => {
            if directed {
                // One count per arc whose endpoints are both active.
                let mut total = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if i != j && net.has_edge(i, j) && is_one(y, i) && is_one(y, j) {
                            total += 1.0;
                        }
                    }
                }
                total
            } else {
                // One count per edge whose endpoints are both active.
                let mut total = 0.0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if net.has_edge(i, j) && is_one(y, i) && is_one(y, j) {
                            total += 1.0;
                        }
                    }
                }
                total
            }
        }
        EffectKind::BinaryCovariate | EffectKind::ContinuousCovariate => {
            let name = spec.attr.as_deref().expect("covariate effect names an attribute");
            ones.iter().map(|&i| attr_numeric(attrs, name, i)).sum()
        }
        EffectKind::CategoryMatch => {
            let name = spec.attr.as_deref().expect("covariate effect names an attribute");
            let mut total = 0.0;
            for &i in &ones {
                let Some(ci) = attr_category(attrs, name, i) else { continue };
                let same = |j: &&u32| attr_category(attrs, name, **j) == Some(ci);
                total += nbrs_out(net, i).iter().filter(same).count() as f64;
                if directed {
                    total += nbrs_in(net, i).iter().filter(same).count() as f64;
                }
            }
            total
        }
        EffectKind::PartnerSum => {
            let name = spec.attr.as_deref().expect("covariate effect names an attribute");
            let mut total = 0.0;
            for &i in &ones {
                for j in nbrs_out(net, i) {
                    total += attr_numeric(attrs, name, j);
                }
                if directed {
                    for j in nbrs_in(net, i) {
                        total += attr_numeric(attrs, name, j);
                    }
                }
            }
            total
        }
        EffectKind::GwActivity => {
            let a = spec.decay.expect("geometrically weighted effect carries a decay");
            ones.iter()
                .map(|&i| {
                    let d = nbrs_out(net, i).len() as f64;
                    a.exp() * (1.0 - (1.0 - (-a).exp()).powf(d))
                })
                .sum()
        }
        EffectKind::TriangleT1 => {
            // Triangles incident to each active node, counted per incidence.
            let mut total = 0.0;
            for (a, b, c) in triangles(net) {
                total += [a, b, c].iter().filter(|&&v| is_one(y, v)).count() as f64;
            }
            total
        }
        EffectKind::TriangleT2 => {
            // Per triangle: active pairs of corners.
            triangles(net)
                .iter()
                .map(|&(a, b, c)| {
                    let k = [a, b, c].iter().filter(|&&v| is_one(y, v)).count();
                    binomial2(k)
                })
                .sum()
        }
        EffectKind::TriangleT3 => triangles(net)
            .iter()
            .filter(|&&(a, b, c)| is_one(y, a) && is_one(y, b) && is_one(y, c))
            .count() as f64,
        EffectKind::Sender => ones.iter().map(|&i| nbrs_out(net, i).len() as f64).sum(),
        EffectKind::Receiver => ones.iter().map(|&i| nbrs_in(net, i).len() as f64).sum(),
        EffectKind::EgoInTwoStar => {
            ones.iter().map(|&i| binomial2(nbrs_in(net, i).len())).sum()
        }
        EffectKind::EgoOutTwoStar => {
            ones.iter().map(|&i| binomial2(nbrs_out(net, i).len())).sum()
        }
        EffectKind::Reciprocity => {
            // Mutual-dyad incidences of active nodes, whatever the partner's
            // outcome.
            let mut total = 0.0;
            for &i in &ones {
                for j in 0..n {
                    if j != i && net.has_edge(i, j) && net.has_edge(j, i) {
                        total += 1.0;
                    }
                }
            }
            total
        }
        EffectKind::ContagionReciprocity => {
            // One count per mutual dyad with both endpoints active.
            let mut total = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if net.has_edge(i, j)
                        && net.has_edge(j, i)
                        && is_one(y, i)
                        && is_one(y, j)
                    {
                        total += 1.0;
                    }
                }
            }
            total
        }
        EffectKind::TwoPathContagion => {
            // Shared partners summed over active pairs.
            let mut total = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if !(is_one(y, i) && is_one(y, j)) {
                        continue;
                    }
                    let paths = (0..n)
                        .filter(|&b| b != i && b != j && net.has_edge(i, b) && net.has_edge(j, b))
                        .count();
                    total += paths as f64;
                }
            }
            total
        }
    }
}

/// Brute-force statistic vector for a whole model.
pub fn brute_stats(
    specs: &[EffectSpec],
    net: &Network,
    attrs: &AttributeTable,
    y: &OutcomeVector,
) -> Vec<f64> {
    specs.iter().map(|s| brute_stat(s, net, attrs, y)).collect()
}

// ---------------------------------------------------------------------------
// Exact enumeration of small models
// ---------------------------------------------------------------------------

/// Statistic vectors of every outcome state of a small model, indexed by a
/// bitmask over the free nodes (bit `j` set means free node `j` is active).
pub struct Enumeration {
    pub free: Vec<u32>,
    pub stats: Vec<Vec<f64>>,
    pub p: usize,
}

impl Enumeration {
    /// Enumerates all `2^F` states reachable from `template` (whose fixed
    /// nodes stay fixed).
    pub fn build(model: &Model, data: Data, template: &OutcomeVector) -> Enumeration {
        let free = template.free_nodes().to_vec();
        assert!(free.len() <= 20, "enumeration over {} free nodes is too large", free.len());
        let states = 1usize << free.len();
        let mut stats = Vec::with_capacity(states);
        for mask in 0..states {
            let y = outcome_of_mask(template, &free, mask);
            stats.push(model.observed_stats(data.net, data.attrs, &y));
        }
        Enumeration { free, stats, p: model.p() }
    }

    pub fn state_count(&self) -> usize {
        self.stats.len()
    }

    /// Bitmask of an outcome over this enumeration's free nodes.
    pub fn mask_of(&self, y: &OutcomeVector) -> usize {
        let mut mask = 0usize;
        for (j, &node) in self.free.iter().enumerate() {
            if y.get(node) == Outcome::One {
                mask |= 1 << j;
            }
        }
        mask
    }

    /// Log normalizer `log Σ_s exp(θᵀ z_s)`, via log-sum-exp.
    pub fn log_normalizer(&self, theta: &[f64]) -> f64 {
        let scores: Vec<f64> = self.stats.iter().map(|z| dot(theta, z)).collect();
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
    }

    /// Exact probability of every state.
    pub fn probabilities(&self, theta: &[f64]) -> Vec<f64> {
        let log_k = self.log_normalizer(theta);
        self.stats.iter().map(|z| (dot(theta, z) - log_k).exp()).collect()
    }

    /// Exact expected statistic vector.
    pub fn mean(&self, theta: &[f64]) -> Vec<f64> {
        let probs = self.probabilities(theta);
        let mut mean = vec![0.0; self.p];
        for (z, pr) in self.stats.iter().zip(&probs) {
            for (m, v) in mean.iter_mut().zip(z) {
                *m += pr * v;
            }
        }
        mean
    }

    /// Exact covariance of the statistic vector.
    pub fn covariance(&self, theta: &[f64]) -> DMatrix<f64> {
        let probs = self.probabilities(theta);
        let mean = self.mean(theta);
        let mut cov = DMatrix::zeros(self.p, self.p);
        for (z, pr) in self.stats.iter().zip(&probs) {
            for a in 0..self.p {
                for b in 0..self.p {
                    cov[(a, b)] += pr * (z[a] - mean[a]) * (z[b] - mean[b]);
                }
            }
        }
        cov
    }

    /// Exact maximum-likelihood estimate for an observed statistic vector,
    /// by Newton iteration on the exact mean and covariance. Returns the
    /// estimate and the statistic covariance at it (the inverse Fisher
    /// information is that covariance's inverse), or `None` when the
    /// iteration cannot converge — which happens exactly when `z_obs` sits
    /// on the boundary of the attainable set.
    pub fn mle(&self, z_obs: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let mut theta = vec![0.0; self.p];
        for _ in 0..200 {
            let mean = self.mean(&theta);
            let grad: Vec<f64> = z_obs.iter().zip(&mean).map(|(o, m)| o - m).collect();
            let gnorm = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
            if gnorm < 1e-10 {
                let cov = self.covariance(&theta);
                return Some((theta, cov));
            }
            let cov = self.covariance(&theta);
            let chol = cov.cholesky()?;
            let step = chol.solve(&nalgebra::DVector::from_column_slice(&grad));
            // Cap the step so early iterations cannot overshoot into the
            // flat tails of the likelihood.
            let norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            let scale = if norm > 2.0 { 2.0 / norm } else { 1.0 };
            for (t, s) in theta.iter_mut().zip(step.iter()) {
                *t += scale * s;
            }
            if theta.iter().any(|t| !t.is_finite() || t.abs() > 50.0) {
                return None;
            }
        }
        None
    }

    /// Exact draw from the model by inverse-CDF over the enumerated states.
    pub fn sample_mask(&self, theta: &[f64], rng: &mut ChaCha8Rng) -> usize {
        let probs = self.probabilities(theta);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (mask, pr) in probs.iter().enumerate() {
            acc += pr;
            if u < acc {
                return mask;
            }
        }
        probs.len() - 1
    }
}

/// Outcome built from a template by activating the free nodes selected by
/// `mask`.
pub fn outcome_of_mask(template: &OutcomeVector, free: &[u32], mask: usize) -> OutcomeVector {
    let mut values: Vec<Outcome> = (0..template.len() as u32).map(|i| template.get(i)).collect();
    for &node in free {
        values[node as usize] = Outcome::Zero;
    }
    for (j, &node) in free.iter().enumerate() {
        if mask & (1 << j) != 0 {
            values[node as usize] = Outcome::One;
        }
    }
    OutcomeVector::new(values)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Random fixtures
// ---------------------------------------------------------------------------

/// Random network of the given kind with up to `max_nodes` nodes.
pub fn random_network(rng: &mut ChaCha8Rng, kind: NetworkKind, max_nodes: usize) -> Network {
    let n = rng.gen_range(4..=max_nodes.max(4));
    match kind {
        NetworkKind::Undirected => {
            let mut net = Network::new(NetworkKind::Undirected, n);
            let p = rng.gen_range(0.05..0.35);
            for i in 0..n as u32 {
                for j in (i + 1)..n as u32 {
                    if rng.gen::<f64>() < p {
                        net.add_edge(i, j).unwrap();
                    }
                }
            }
            net
        }
        NetworkKind::Directed => {
            let mut net = Network::new(NetworkKind::Directed, n);
            let p = rng.gen_range(0.05..0.25);
            for i in 0..n as u32 {
                for j in 0..n as u32 {
                    if i != j && rng.gen::<f64>() < p {
                        net.add_arc(i, j).unwrap();
                    }
                }
            }
            net
        }
        NetworkKind::Bipartite => {
            let a = rng.gen_range(2..n.max(3));
            let mut net = Network::new_bipartite(n, a).unwrap();
            let p = rng.gen_range(0.1..0.5);
            for i in 0..a as u32 {
                for j in a as u32..n as u32 {
                    if rng.gen::<f64>() < p {
                        net.add_edge(i, j).unwrap();
                    }
                }
            }
            net
        }
    }
}

/// Random outcome: mode-B nodes of a bipartite network are always missing,
/// other nodes are missing with a small probability and active with a
/// random incidence otherwise.
pub fn random_outcome(rng: &mut ChaCha8Rng, net: &Network) -> OutcomeVector {
    let incidence = rng.gen_range(0.2..0.8);
    let values: Vec<Outcome> = (0..net.node_count() as u32)
        .map(|i| {
            if net.kind() == NetworkKind::Bipartite && !net.is_mode_a(i) {
                Outcome::Fixed
            } else if rng.gen::<f64>() < 0.1 {
                Outcome::Fixed
            } else if rng.gen::<f64>() < incidence {
                Outcome::One
            } else {
                Outcome::Zero
            }
        })
        .collect();
    OutcomeVector::new(values)
}

/// Attribute table with one column of each kind, including missing entries.
/// Continuous values are quarter-integers, so sums of them are exact in
/// floating point whatever the summation order.
pub fn random_attrs(rng: &mut ChaCha8Rng, n: usize) -> AttributeTable {
    let binary: Vec<Option<bool>> = (0..n)
        .map(|_| if rng.gen::<f64>() < 0.1 { None } else { Some(rng.gen::<bool>()) })
        .collect();
    let continuous: Vec<Option<f64>> = (0..n)
        .map(|_| {
            if rng.gen::<f64>() < 0.1 {
                None
            } else {
                Some(rng.gen_range(-8i32..=8) as f64 / 4.0)
            }
        })
        .collect();
    let categorical: Vec<Option<u32>> = (0..n)
        .map(|_| if rng.gen::<f64>() < 0.1 { None } else { Some(rng.gen_range(0..3)) })
        .collect();
    let mut attrs = AttributeTable::new();
    attrs.add_column("b", AttrColumn::Binary(binary)).unwrap();
    attrs.add_column("c", AttrColumn::Continuous(continuous)).unwrap();
    attrs.add_column("g", AttrColumn::Categorical(categorical)).unwrap();
    attrs
}

/// Every catalogue effect defined for the given network kind, with the
/// attribute arguments of [`random_attrs`].
pub fn full_catalogue(kind: NetworkKind) -> Vec<EffectSpec> {
    let mut specs = vec![EffectSpec::plain(EffectKind::Density)];
    match kind {
        NetworkKind::Undirected => {
            specs.push(EffectSpec::plain(EffectKind::Activity));
            specs.push(EffectSpec::plain(EffectKind::Contagion));
            specs.push(EffectSpec::with_attr(EffectKind::BinaryCovariate, "b"));
            specs.push(EffectSpec::with_attr(EffectKind::ContinuousCovariate, "c"));
            specs.push(EffectSpec::with_attr(EffectKind::CategoryMatch, "g"));
            specs.push(EffectSpec::with_attr(EffectKind::PartnerSum, "c"));
            specs.push(EffectSpec::with_decay(EffectKind::GwActivity, 1.5));
            specs.push(EffectSpec::plain(EffectKind::TriangleT1));
            specs.push(EffectSpec::plain(EffectKind::TriangleT2));
            specs.push(EffectSpec::plain(EffectKind::TriangleT3));
        }
        NetworkKind::Directed => {
            specs.push(EffectSpec::plain(EffectKind::Contagion));
            specs.push(EffectSpec::with_attr(EffectKind::BinaryCovariate, "b"));
            specs.push(EffectSpec::with_attr(EffectKind::ContinuousCovariate, "c"));
            specs.push(EffectSpec::with_attr(EffectKind::CategoryMatch, "g"));
            specs.push(EffectSpec::with_attr(EffectKind::PartnerSum, "c"));
            specs.push(EffectSpec::plain(EffectKind::Sender));
            specs.push(EffectSpec::plain(EffectKind::Receiver));
            specs.push(EffectSpec::plain(EffectKind::EgoInTwoStar));
            specs.push(EffectSpec::plain(EffectKind::EgoOutTwoStar));
            specs.push(EffectSpec::plain(EffectKind::Reciprocity));
            specs.push(EffectSpec::plain(EffectKind::ContagionReciprocity));
        }
        NetworkKind::Bipartite => {
            specs.push(EffectSpec::plain(EffectKind::Activity));
            specs.push(EffectSpec::plain(EffectKind::TwoPathContagion));
        }
    }
    specs
}

/// True when sums of this effect's statistic are exact in floating point,
/// so oracle and implementation must agree to the last bit.
pub fn stat_is_exact(kind: EffectKind) -> bool {
    !matches!(kind, EffectKind::GwActivity)
}

/// Directed random graph where a fraction of arcs is deliberately
/// reciprocated, so mutual-dyad effects have mass. Deterministic per seed.
pub fn directed_with_mutuals(
    rng: &mut ChaCha8Rng,
    n: usize,
    mean_out_degree: f64,
    reciprocate: f64,
) -> Network {
    let mut net = Network::new(NetworkKind::Directed, n);
    let p = mean_out_degree / (n as f64 - 1.0);
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if i != j && !net.has_edge(i, j) && rng.gen::<f64>() < p {
                net.add_arc(i, j).unwrap();
                if !net.has_edge(j, i) && rng.gen::<f64>() < reciprocate {
                    net.add_arc(j, i).unwrap();
                }
            }
        }
    }
    net
}
