//! The binary node outcome vector and snowball-zone conditioning.
//!
//! Each node's outcome is 0, 1, or structurally missing (`Fixed`). Missing
//! outcomes never change during simulation and contribute zero to every
//! contagion-type statistic. Snowball sampling zones conditionally fix the
//! outermost wave as well: nodes in the maximum zone keep their observed
//! value, inner waves stay free.

use crate::network::Network;

/// One node's outcome state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Zero,
    One,
    /// Structurally missing: held fixed, contributes zero to statistics.
    Fixed,
}

/// Outcome states for all nodes plus the set of nodes a sampler may toggle.
#[derive(Clone, Debug)]
pub struct OutcomeVector {
    values: Vec<Outcome>,
    free: Vec<u32>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OutcomeError {
    #[error("outcome has {found} rows, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bipartite mode-B node {0} must have a missing (NA) outcome")]
    ModeBNotMissing(u32),
    #[error("zone assignment has {found} rows, expected {expected}")]
    ZoneLengthMismatch { expected: usize, found: usize },
    #[error("edge {i}-{j} spans zones {zi} and {zj}; snowball zones may differ by at most 1")]
    ZoneSkip { i: u32, j: u32, zi: u32, zj: u32 },
}

impl OutcomeVector {
    /// Wraps raw states; every non-missing node starts free.
    pub fn new(values: Vec<Outcome>) -> OutcomeVector {
        let free = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != Outcome::Fixed)
            .map(|(i, _)| i as u32)
            .collect();
        OutcomeVector { values, free }
    }

    /// All-zero vector over `n` free nodes.
    pub fn zeros(n: usize) -> OutcomeVector {
        OutcomeVector::new(vec![Outcome::Zero; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: u32) -> Outcome {
        self.values[i as usize]
    }

    /// True when node `i` has outcome 1 (missing counts as 0).
    pub fn is_one(&self, i: u32) -> bool {
        self.values[i as usize] == Outcome::One
    }

    /// Numeric outcome used in sums: 1.0 for `One`, else 0.0.
    pub fn value(&self, i: u32) -> f64 {
        (self.values[i as usize] == Outcome::One) as u8 as f64
    }

    pub(crate) fn set(&mut self, i: u32, v: Outcome) {
        debug_assert!(self.values[i as usize] != Outcome::Fixed, "missing outcomes are immutable");
        self.values[i as usize] = v;
    }

    /// Nodes a sampler may toggle.
    pub fn free_nodes(&self) -> &[u32] {
        &self.free
    }

    /// Copy with every observed outcome reset to 0; missingness and the
    /// free set are preserved.
    pub fn cleared(&self) -> OutcomeVector {
        OutcomeVector {
            values: self
                .values
                .iter()
                .map(|&v| if v == Outcome::Fixed { Outcome::Fixed } else { Outcome::Zero })
                .collect(),
            free: self.free.clone(),
        }
    }

    /// Number of nodes with outcome 1.
    pub fn active_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == Outcome::One).count()
    }

    /// Number of nodes with a non-missing outcome.
    pub fn observed_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != Outcome::Fixed).count()
    }

    /// Share of non-missing nodes with outcome 1 (0 when none observed).
    pub fn incidence(&self) -> f64 {
        let obs = self.observed_count();
        if obs == 0 {
            0.0
        } else {
            self.active_count() as f64 / obs as f64
        }
    }

    /// Checks mode agreement with `net`: same length, and for bipartite
    /// networks every mode-B outcome missing.
    pub fn check_against(&self, net: &Network) -> Result<(), OutcomeError> {
        if self.len() != net.node_count() {
            return Err(OutcomeError::LengthMismatch {
                expected: net.node_count(),
                found: self.len(),
            });
        }
        if net.kind() == crate::network::NetworkKind::Bipartite {
            for i in net.mode_a_size() as u32..net.node_count() as u32 {
                if self.get(i) != Outcome::Fixed {
                    return Err(OutcomeError::ModeBNotMissing(i));
                }
            }
        }
        Ok(())
    }

    /// Applies snowball conditioning: nodes in the outermost wave
    /// (`zones.max_zone()`) are removed from the free set, keeping their
    /// observed outcome fixed. Inner waves stay free.
    pub fn restrict_to_inner_zones(&mut self, zones: &ZoneAssignment) -> Result<(), OutcomeError> {
        if zones.len() != self.len() {
            return Err(OutcomeError::ZoneLengthMismatch {
                expected: self.len(),
                found: zones.len(),
            });
        }
        let max = zones.max_zone();
        self.free.retain(|&i| zones.zone(i) < max);
        Ok(())
    }
}

/// Snowball-sampling wave of every node (0 = seed wave).
#[derive(Clone, Debug)]
pub struct ZoneAssignment {
    zones: Vec<u32>,
    max_zone: u32,
}

impl ZoneAssignment {
    pub fn new(zones: Vec<u32>) -> ZoneAssignment {
        let max_zone = zones.iter().copied().max().unwrap_or(0);
        ZoneAssignment { zones, max_zone }
    }

    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn zone(&self, i: u32) -> u32 {
        self.zones[i as usize]
    }

    pub fn max_zone(&self) -> u32 {
        self.max_zone
    }

    /// Validates snowball structure against a network: zones cover all
    /// nodes and no tie skips a wave.
    pub fn check_against(&self, net: &Network) -> Result<(), OutcomeError> {
        if self.len() != net.node_count() {
            return Err(OutcomeError::ZoneLengthMismatch {
                expected: net.node_count(),
                found: self.len(),
            });
        }
        for (i, j) in net.tie_pairs() {
            let (zi, zj) = (self.zone(i), self.zone(j));
            if zi.abs_diff(zj) > 1 {
                return Err(OutcomeError::ZoneSkip { i, j, zi, zj });
            }
        }
        Ok(())
    }
}
