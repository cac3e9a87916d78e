//! Interaction topologies.
//!
//! Two graph families are supported: a square lattice with a von Neumann
//! neighborhood and a Watts–Strogatz small-world graph. Both produce an
//! immutable [`Adjacency`] stored in compressed sparse row form.
//!
//! Lattice nodes are indexed row-major: the node at `(row, col)` has index
//! `row * side + col`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Which graph to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NetworkSpec {
    SquareLattice {
        side: usize,
        periodic: bool,
    },
    SmallWorld {
        n: usize,
        k: usize,
        beta: f64,
        graph_seed: u64,
    },
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NetworkSpec::SquareLattice { side, .. } => {
                if side < 2 {
                    return Err(Error::InvalidSpec(format!("lattice side {side} < 2")));
                }
            }
            NetworkSpec::SmallWorld { n, k, beta, .. } => {
                if k == 0 || k % 2 != 0 {
                    return Err(Error::InvalidSpec(format!(
                        "small-world degree k = {k} must be even and positive"
                    )));
                }
                if k >= n {
                    return Err(Error::InvalidSpec(format!(
                        "small-world degree k = {k} must be below n = {n}"
                    )));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return Err(Error::InvalidSpec(format!(
                        "rewiring probability beta = {beta} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Adjacency> {
        match *self {
            NetworkSpec::SquareLattice { side, periodic } => build_lattice(side, periodic),
            NetworkSpec::SmallWorld {
                n,
                k,
                beta,
                graph_seed,
            } => build_small_world(n, k, beta, graph_seed),
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            NetworkSpec::SquareLattice { side, .. } => side * side,
            NetworkSpec::SmallWorld { n, .. } => n,
        }
    }

    /// Short label used in sweep output (`SL` or `WS`).
    pub fn topology_id(&self) -> &'static str {
        match self {
            NetworkSpec::SquareLattice { .. } => "SL",
            NetworkSpec::SmallWorld { .. } => "WS",
        }
    }

    pub fn lattice_side(&self) -> Option<usize> {
        match *self {
            NetworkSpec::SquareLattice { side, .. } => Some(side),
            NetworkSpec::SmallWorld { .. } => None,
        }
    }
}

/// Undirected simple graph with sorted neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Adjacency {
    /// Builds from per-node neighbor lists, sorting and checking invariants.
    pub fn from_lists(mut lists: Vec<Vec<u32>>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            targets.extend_from_slice(list);
            offsets.push(targets.len() as u32);
        }
        let adj = Self { offsets, targets };
        adj.check()?;
        Ok(adj)
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn mean_degree(&self) -> f64 {
        self.targets.len() as f64 / self.node_count() as f64
    }

    /// Undirected edges `(i, j)` with `i < j`, ordered by `i` then `j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Verifies symmetry, absence of self-loops and duplicates, and that
    /// every node has at least one neighbor.
    pub fn check(&self) -> Result<()> {
        let n = self.node_count();
        for i in 0..n {
            let nbrs = self.neighbors(i);
            if nbrs.is_empty() {
                return Err(Error::InvalidSpec(format!("node {i} is isolated")));
            }
            for w in nbrs.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidSpec(format!("duplicate edge {i}-{}", w[0])));
                }
            }
            for &j in nbrs {
                let j = j as usize;
                if j >= n {
                    return Err(Error::InvalidSpec(format!("edge {i}-{j} out of range")));
                }
                if j == i {
                    return Err(Error::InvalidSpec(format!("self-loop at {i}")));
                }
                if !self.contains_edge(j, i) {
                    return Err(Error::InvalidSpec(format!("edge {i}-{j} is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Edge-list text: a `nodes <count>` header followed by one `i j` line
    /// per undirected edge with `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edge_count() * 10 + 16);
        let _ = writeln!(out, "nodes {}", self.node_count());
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty edge list".into()))?;
        let n: usize = header
            .strip_prefix("nodes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("bad edge list header `{header}`")))?;
        let mut lists = vec![Vec::new(); n];
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) if i < j && j < n => {
                    lists[i].push(j as u32);
                    lists[j].push(i as u32);
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "bad edge on line {}: `{line}`",
                        lineno + 2
                    )))
                }
            }
        }
        Self::from_lists(lists)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

/// Square lattice with von Neumann neighbors, row-major indexing.
///
/// With `periodic` the grid wraps into a torus and every node has degree 4
/// once `side >= 3`; at `side == 2` the wrapped neighbors coincide and are
/// deduplicated. Open boundaries give corner nodes degree 2.
pub fn build_lattice(side: usize, periodic: bool) -> Result<Adjacency> {
    NetworkSpec::SquareLattice { side, periodic }.validate()?;
    let n = side * side;
    if n > u32::MAX as usize {
        return Err(Error::InvalidSpec(format!("lattice side {side} too large")));
    }
    let idx = |r: usize, c: usize| (r * side + c) as u32;
    let mut lists = Vec::with_capacity(n);
    for r in 0..side {
        for c in 0..side {
            let mut nbrs = Vec::with_capacity(4);
            if periodic {
                nbrs.push(idx((r + side - 1) % side, c));
                nbrs.push(idx((r + 1) % side, c));
                nbrs.push(idx(r, (c + side - 1) % side));
                nbrs.push(idx(r, (c + 1) % side));
            } else {
                if r > 0 {
                    nbrs.push(idx(r - 1, c));
                }
                if r + 1 < side {
                    nbrs.push(idx(r + 1, c));
                }
                if c > 0 {
                    nbrs.push(idx(r, c - 1));
                }
                if c + 1 < side {
                    nbrs.push(idx(r, c + 1));
                }
            }
            nbrs.sort_unstable();
            nbrs.dedup();
            lists.push(nbrs);
        }
    }
    Adjacency::from_lists(lists)
}

/// Watts–Strogatz small-world graph.
///
/// Starts from a ring where each node links to its `k / 2` nearest
/// neighbors on each side. Ring edges are then visited layer by layer
/// (all distance-1 edges, then distance-2, ...) and each is rewired with
/// probability `beta`: the source endpoint is kept and a new target is
/// drawn uniformly until it is neither the source nor an existing
/// neighbor. A rewire that would leave the old target isolated is skipped.
pub fn build_small_world(n: usize, k: usize, beta: f64, graph_seed: u64) -> Result<Adjacency> {
    NetworkSpec::SmallWorld {
        n,
        k,
        beta,
        graph_seed,
    }
    .validate()?;
    if n > u32::MAX as usize {
        return Err(Error::InvalidSpec(format!(
            "small-world size {n} too large"
        )));
    }
    let mut rng = RngStream::new(graph_seed);
    let half = k / 2;
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(k + 4); n];
    for i in 0..n {
        for d in 1..=half {
            let j = (i + d) % n;
            lists[i].push(j as u32);
            lists[j].push(i as u32);
        }
    }

    for d in 1..=half {
        for i in 0..n {
            let old = ((i + d) % n) as u32;
            if !rng.bernoulli(beta) {
                continue;
            }
            // The ring edge may already be gone if `old` rewired onto `i`
            // earlier; only edges that still exist are candidates.
            if !lists[i].contains(&old) {
                continue;
            }
            if lists[i].len() >= n - 1 || lists[old as usize].len() <= 1 {
                continue;
            }
            let target = loop {
                let w = rng.index(n) as u32;
                if w as usize != i && !lists[i].contains(&w) {
                    break w;
                }
            };
            remove(&mut lists[i], old);
            remove(&mut lists[old as usize], i as u32);
            lists[i].push(target);
            lists[target as usize].push(i as u32);
        }
    }
    Adjacency::from_lists(lists)
}

fn remove(list: &mut Vec<u32>, value: u32) {
    if let Some(pos) = list.iter().position(|&x| x == value) {
        list.swap_remove(pos);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_50_periodic_is_regular_degree_4() {
        let adj = build_lattice(50, true).unwrap();
        assert_eq!(adj.node_count(), 2500);
        assert!((0..2500).all(|i| adj.degree(i) == 4));
        assert_eq!(adj.edge_count(), 5000);
    }

    #[test]
    fn open_2x2_lattice_is_a_square() {
        let adj = build_lattice(2, false).unwrap();
        assert_eq!(adj.node_count(), 4);
        assert!((0..4).all(|i| adj.degree(i) == 2));
        assert_eq!(adj.neighbors(0), &[1, 2]);
        assert_eq!(adj.neighbors(3), &[1, 2]);
    }

    #[test]
    fn periodic_3x3_matches_hand_enumeration() {
        // Wrapped (row, col) +/- 1 pairs enumerated by hand, row-major ids.
        let expected: [[u32; 4]; 9] = [
            [1, 2, 3, 6],
            [0, 2, 4, 7],
            [0, 1, 5, 8],
            [0, 4, 5, 6],
            [1, 3, 5, 7],
            [2, 3, 4, 8],
            [0, 3, 7, 8],
            [1, 4, 6, 8],
            [2, 5, 6, 7],
        ];
        let adj = build_lattice(3, true).unwrap();
        assert_eq!(adj.node_count(), 9);
        assert_eq!(adj.edge_count(), 18);
        for (i, nbrs) in expected.iter().enumerate() {
            assert_eq!(adj.neighbors(i), nbrs, "node {i}");
        }
    }

    #[test]
    fn lattice_rejects_small_side() {
        assert!(matches!(build_lattice(1, true), Err(Error::InvalidSpec(_))));
        assert!(matches!(
            build_lattice(0, false),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn open_lattice_degrees() {
        let adj = build_lattice(4, false).unwrap();
        assert_eq!(adj.degree(0), 2);
        assert_eq!(adj.degree(1), 3);
        assert_eq!(adj.degree(5), 4);
        assert_eq!(adj.edge_count(), 2 * 4 * 3);
    }

    #[test]
    fn small_world_full_scale() {
        let adj = build_small_world(2500, 10, 0.5, 1).unwrap();
        assert_eq!(adj.edge_count(), 12500);
        assert_eq!(adj.mean_degree(), 10.0);
    }

    #[test]
    fn small_world_without_rewiring_is_a_ring() {
        let adj = build_small_world(10, 4, 0.0, 99).unwrap();
        assert_eq!(adj.neighbors(0), &[1, 2, 8, 9]);
        assert!((0..10).all(|i| adj.degree(i) == 4));
    }

    #[test]
    fn small_world_full_rewiring_structure() {
        let adj = build_small_world(10, 4, 1.0, 7).unwrap();
        assert_eq!(adj.edge_count(), 20);
        // exhaustive scan over all ordered pairs
        for i in 0..10 {
            assert!(!adj.contains_edge(i, i));
            for j in 0..10 {
                assert_eq!(adj.contains_edge(i, j), adj.contains_edge(j, i));
            }
            let nbrs = adj.neighbors(i);
            let mut dedup = nbrs.to_vec();
            dedup.dedup();
            assert_eq!(dedup.len(), nbrs.len());
            assert!(!nbrs.is_empty());
        }
        // full rewiring should move at least some ring edges
        let ring = build_small_world(10, 4, 0.0, 7).unwrap();
        assert_ne!(adj, ring);
    }

    #[test]
    fn small_world_rejects_bad_specs() {
        assert!(build_small_world(10, 3, 0.1, 0).is_err());
        assert!(build_small_world(10, 10, 0.1, 0).is_err());
        assert!(build_small_world(10, 12, 0.1, 0).is_err());
        assert!(build_small_world(10, 4, 1.5, 0).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let adj = build_small_world(50, 6, 0.3, 3).unwrap();
        let text = adj.to_edge_list();
        assert!(text.starts_with("nodes 50\n"));
        assert_eq!(text.lines().count(), 1 + 150);
        assert_eq!(Adjacency::from_edge_list(&text).unwrap(), adj);
    }

    #[test]
    fn edge_list_rejects_garbage() {
        assert!(Adjacency::from_edge_list("").is_err());
        assert!(Adjacency::from_edge_list("nodes 3\n0 5\n").is_err());
        assert!(Adjacency::from_edge_list("nodes 3\n1 0\n").is_err());
        // node 2 isolated
        assert!(Adjacency::from_edge_list("nodes 3\n0 1\n").is_err());
    }

    proptest! {
        #[test]
        fn small_world_invariants(
            n in 5usize..80,
            half in 1usize..4,
            beta in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let k = 2 * half;
            prop_assume!(k < n);
            let adj = build_small_world(n, k, beta, seed).unwrap();
            prop_assert_eq!(adj.edge_count(), n * k / 2);
            prop_assert!(adj.check().is_ok());
            let again = build_small_world(n, k, beta, seed).unwrap();
            prop_assert_eq!(adj.to_edge_list(), again.to_edge_list());
        }

        #[test]
        fn lattice_invariants(side in 2usize..20, periodic in any::<bool>()) {
            let adj = build_lattice(side, periodic).unwrap();
            prop_assert_eq!(adj.node_count(), side * side);
            prop_assert!(adj.check().is_ok());
            if periodic && side >= 3 {
                prop_assert!((0..side * side).all(|i| adj.degree(i) == 4));
            }
        }
    }
}
