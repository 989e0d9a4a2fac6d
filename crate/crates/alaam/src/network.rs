//! Fixed network data model: undirected, directed, and two-mode (bipartite)
//! graphs, plus a sparse cache of two-path counts.
//!
//! Node ids are dense `0..n`. Adjacency is stored as one insertion-ordered
//! set per node, giving O(1) expected edge tests, O(deg) neighbor iteration,
//! and — unlike a std `HashSet` — an iteration order that is a pure function
//! of the construction sequence, which keeps every downstream simulation
//! byte-reproducible.

use indexmap::{IndexMap, IndexSet};

/// Which dyad structure the network carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetworkKind {
    /// One-mode, unordered edges.
    Undirected,
    /// One-mode, ordered arcs.
    Directed,
    /// Two-mode: every edge joins a mode-A node to a mode-B node.
    Bipartite,
}

impl NetworkKind {
    /// Lower-case name used in files, flags, and reports.
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Undirected => "undirected",
            NetworkKind::Directed => "directed",
            NetworkKind::Bipartite => "bipartite",
        }
    }
}

/// An immutable network over nodes `0..node_count`.
///
/// For undirected and bipartite networks only `adj_out` is populated and it
/// is symmetric. For directed networks `adj_out[i]` holds arc targets of `i`
/// and `adj_in[i]` holds arc sources pointing at `i`.
#[derive(Clone, Debug)]
pub struct Network {
    kind: NetworkKind,
    node_count: usize,
    /// Bipartite only: nodes `0..mode_a_size` are mode A. Equals
    /// `node_count` for one-mode networks.
    mode_a_size: usize,
    adj_out: Vec<IndexSet<u32>>,
    adj_in: Vec<IndexSet<u32>>,
}

/// Construction-time rule violations.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("node id {id} out of range (node count {node_count})")]
    NodeOutOfRange { id: u32, node_count: usize },
    #[error("self-loop at node {0} is not allowed")]
    SelfLoop(u32),
    #[error("bipartite edge {i}-{j} joins two nodes of the same mode")]
    SameModeEdge { i: u32, j: u32 },
    #[error("bipartite mode-A size {mode_a} exceeds node count {node_count}")]
    BadModeSize { mode_a: usize, node_count: usize },
}

impl Network {
    /// Creates an empty one-mode network.
    pub fn new(kind: NetworkKind, node_count: usize) -> Network {
        assert!(kind != NetworkKind::Bipartite, "bipartite networks need a mode-A size");
        Network {
            kind,
            node_count,
            mode_a_size: node_count,
            adj_out: vec![IndexSet::new(); node_count],
            adj_in: if kind == NetworkKind::Directed {
                vec![IndexSet::new(); node_count]
            } else {
                Vec::new()
            },
        }
    }

    /// Creates an empty bipartite network; nodes `0..mode_a_size` form mode A.
    pub fn new_bipartite(node_count: usize, mode_a_size: usize) -> Result<Network, NetworkError> {
        if mode_a_size > node_count {
            return Err(NetworkError::BadModeSize { mode_a: mode_a_size, node_count });
        }
        Ok(Network {
            kind: NetworkKind::Bipartite,
            node_count,
            mode_a_size,
            adj_out: vec![IndexSet::new(); node_count],
            adj_in: Vec::new(),
        })
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Mode-A size (equals the node count for one-mode networks).
    pub fn mode_a_size(&self) -> usize {
        self.mode_a_size
    }

    /// True when `i` belongs to mode A (always true for one-mode networks).
    pub fn is_mode_a(&self, i: u32) -> bool {
        (i as usize) < self.mode_a_size
    }

    fn check_node(&self, id: u32) -> Result<(), NetworkError> {
        if (id as usize) < self.node_count {
            Ok(())
        } else {
            Err(NetworkError::NodeOutOfRange { id, node_count: self.node_count })
        }
    }

    /// Inserts an undirected edge (one-mode or bipartite). Parallel edges
    /// collapse silently; self-loops and within-mode bipartite edges are
    /// errors.
    pub fn add_edge(&mut self, i: u32, j: u32) -> Result<(), NetworkError> {
        assert!(self.kind != NetworkKind::Directed, "directed networks take arcs, not edges");
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(NetworkError::SelfLoop(i));
        }
        if self.kind == NetworkKind::Bipartite && self.is_mode_a(i) == self.is_mode_a(j) {
            return Err(NetworkError::SameModeEdge { i, j });
        }
        self.adj_out[i as usize].insert(j);
        self.adj_out[j as usize].insert(i);
        Ok(())
    }

    /// Inserts a directed arc `i -> j`. Parallel arcs collapse silently.
    pub fn add_arc(&mut self, i: u32, j: u32) -> Result<(), NetworkError> {
        assert!(self.kind == NetworkKind::Directed, "only directed networks take arcs");
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(NetworkError::SelfLoop(i));
        }
        self.adj_out[i as usize].insert(j);
        self.adj_in[j as usize].insert(i);
        Ok(())
    }

    /// Undirected/bipartite: neighbor test. Directed: arc `i -> j` test.
    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.adj_out[i as usize].contains(&j)
    }

    /// Neighbors of `i` (undirected/bipartite) or arc targets of `i` (directed).
    pub fn neighbors(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.adj_out[i as usize].iter().copied()
    }

    /// Arc sources pointing at `i` (directed only).
    pub fn in_neighbors(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.adj_in[i as usize].iter().copied()
    }

    /// Degree (undirected/bipartite) or out-degree (directed).
    pub fn degree(&self, i: u32) -> usize {
        self.adj_out[i as usize].len()
    }

    /// In-degree (directed only; 0 otherwise).
    pub fn in_degree(&self, i: u32) -> usize {
        self.adj_in.get(i as usize).map_or(0, IndexSet::len)
    }

    /// Number of edges (one-mode undirected, bipartite) or arcs (directed).
    pub fn tie_count(&self) -> usize {
        let total: usize = self.adj_out.iter().map(IndexSet::len).sum();
        if self.kind == NetworkKind::Directed {
            total
        } else {
            total / 2
        }
    }

    /// All ties as ordered pairs: each undirected edge once with `i < j`
    /// (insertion-independent, ascending), each arc once as `(source, target)`.
    pub fn tie_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs = Vec::with_capacity(self.tie_count());
        for i in 0..self.node_count as u32 {
            for j in self.neighbors(i) {
                if self.kind == NetworkKind::Directed || i < j {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// Sparse two-path counts.
///
/// For undirected and bipartite networks, `count(i, j)` is the number of
/// common neighbors of distinct nodes `i` and `j` (also reachable via
/// [`TwoPathMatrix::row`], whose entries are stored symmetrically). For
/// directed networks it is the number of nodes `k` with arcs `i -> k -> j`.
///
/// Building costs O(sum of squared degrees); effects that need the counts
/// build the cache once per model setup rather than per proposal.
#[derive(Clone, Debug)]
pub struct TwoPathMatrix {
    rows: Vec<IndexMap<u32, u32>>,
}

impl TwoPathMatrix {
    /// Tallies all two-paths of `net`.
    pub fn build(net: &Network) -> TwoPathMatrix {
        let n = net.node_count();
        let mut rows: Vec<IndexMap<u32, u32>> = vec![IndexMap::new(); n];
        match net.kind() {
            NetworkKind::Undirected | NetworkKind::Bipartite => {
                // Each middle node k contributes one i-k-j path per ordered
                // pair of distinct neighbors.
                for k in 0..n as u32 {
                    let nbrs: Vec<u32> = net.neighbors(k).collect();
                    for (a, &i) in nbrs.iter().enumerate() {
                        for &j in &nbrs[a + 1..] {
                            *rows[i as usize].entry(j).or_insert(0) += 1;
                            *rows[j as usize].entry(i).or_insert(0) += 1;
                        }
                    }
                }
            }
            NetworkKind::Directed => {
                for k in 0..n as u32 {
                    let sources: Vec<u32> = net.in_neighbors(k).collect();
                    let targets: Vec<u32> = net.neighbors(k).collect();
                    for &i in &sources {
                        for &j in &targets {
                            if i != j {
                                *rows[i as usize].entry(j).or_insert(0) += 1;
                            }
                        }
                    }
                }
            }
        }
        TwoPathMatrix { rows }
    }

    /// Two-path count between `i` and `j` (0 when none).
    pub fn count(&self, i: u32, j: u32) -> u32 {
        self.rows[i as usize].get(&j).copied().unwrap_or(0)
    }

    /// Non-zero entries `(j, count)` of row `i`, in deterministic order.
    pub fn row(&self, i: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows[i as usize].iter().map(|(&j, &c)| (j, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph() -> Network {
        // a - b - c
        let mut g = Network::new(NetworkKind::Undirected, 3);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g
    }

    #[test]
    fn path_graph_degrees() {
        let g = path_graph();
        assert_eq!((g.degree(0), g.degree(1), g.degree(2)), (1, 2, 1));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.tie_count(), 2);
    }

    #[test]
    fn directed_degrees_split() {
        let mut g = Network::new(NetworkKind::Directed, 3);
        g.add_arc(0, 1).unwrap();
        g.add_arc(2, 1).unwrap();
        assert_eq!((g.degree(0), g.in_degree(0)), (1, 0));
        assert_eq!((g.degree(1), g.in_degree(1)), (0, 2));
        assert!(g.has_edge(0, 1) && !g.has_edge(1, 0));
        assert_eq!(g.tie_count(), 2);
    }

    #[test]
    fn parallel_edges_collapse() {
        let mut g = path_graph();
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 0).unwrap();
        assert_eq!(g.tie_count(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        let mut g = Network::new(NetworkKind::Undirected, 3);
        assert_eq!(g.add_edge(1, 1), Err(NetworkError::SelfLoop(1)));
    }

    #[test]
    fn bipartite_mode_rule() {
        let mut g = Network::new_bipartite(5, 3).unwrap();
        g.add_edge(0, 3).unwrap();
        assert_eq!(g.add_edge(0, 1), Err(NetworkError::SameModeEdge { i: 0, j: 1 }));
        assert_eq!(g.add_edge(3, 4), Err(NetworkError::SameModeEdge { i: 3, j: 4 }));
        assert!(g.is_mode_a(2) && !g.is_mode_a(3));
    }

    #[test]
    fn two_paths_on_path_graph() {
        let tp = TwoPathMatrix::build(&path_graph());
        assert_eq!(tp.count(0, 2), 1);
        assert_eq!(tp.count(2, 0), 1);
        assert_eq!(tp.count(0, 1), 0);
    }

    #[test]
    fn two_paths_on_four_cycle() {
        let mut g = Network::new(NetworkKind::Undirected, 4);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            g.add_edge(i, j).unwrap();
        }
        let tp = TwoPathMatrix::build(&g);
        // Opposite corners are joined by exactly two two-paths.
        assert_eq!(tp.count(0, 2), 2);
        assert_eq!(tp.count(1, 3), 2);
        assert_eq!(tp.count(0, 1), 0);
    }

    #[test]
    fn directed_two_paths_follow_arc_direction() {
        let mut g = Network::new(NetworkKind::Directed, 3);
        g.add_arc(0, 1).unwrap();
        g.add_arc(1, 2).unwrap();
        let tp = TwoPathMatrix::build(&g);
        assert_eq!(tp.count(0, 2), 1);
        assert_eq!(tp.count(2, 0), 0);
    }

    #[test]
    fn undirected_two_paths_match_common_neighbor_counts() {
        // Deterministic pseudo-random graph, checked against a direct
        // common-neighbor intersection for every pair.
        let n = 20u32;
        let mut g = Network::new(NetworkKind::Undirected, n as usize);
        let mut x: u64 = 12345;
        for i in 0..n {
            for j in (i + 1)..n {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if x >> 62 == 0 {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        let tp = TwoPathMatrix::build(&g);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let common = g
                    .neighbors(i)
                    .filter(|&k| g.has_edge(j, k))
                    .count() as u32;
                assert_eq!(tp.count(i, j), common, "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn two_path_rows_mirror_counts() {
        let tp = TwoPathMatrix::build(&path_graph());
        let row0: Vec<(u32, u32)> = tp.row(0).collect();
        assert_eq!(row0, vec![(2, 1)]);
    }
}
