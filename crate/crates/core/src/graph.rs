//! Simple graphs on `0..n`, forests, and a union-find.
//!
//! Vertices are zero-based: label `i` here is vertex `i + 1` in the usual
//! one-based convention, so "smallest label" is vertex 0.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = self.parent[x as usize];
        }
        x
    }

    /// Merge the classes of `a` and `b`. Returns false if they were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn class_size(&mut self, x: u32) -> usize {
        let r = self.find(x);
        self.size[r as usize] as usize
    }

    /// Class sizes, non-increasing.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.parent.len())
            .filter(|&v| self.parent[v] as usize == v)
            .map(|v| self.size[v] as usize)
            .collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }
}

/// Undirected simple graph stored as a normalized edge list (`u < v`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n_vertices: usize,
    pub edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { n_vertices: n, edges: Vec::new() }
    }

    /// Build from arbitrary pairs; rejects loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut edges: Vec<(u32, u32)> = pairs
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::Validation(format!("self-loop at {a}")));
            }
            if b as usize >= n {
                return Err(Error::Validation(format!("vertex {b} out of range for n={n}")));
            }
        }
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("repeated edge".into()));
        }
        edges.shrink_to_fit();
        Ok(Self { n_vertices: n, edges })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbor lists sorted increasingly.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    pub fn is_acyclic(&self) -> bool {
        let mut uf = UnionFind::new(self.n_vertices);
        self.edges.iter().all(|&(a, b)| uf.union(a, b))
    }

    /// Component sizes, non-increasing.
    pub fn component_sizes(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n_vertices);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        uf.class_sizes()
    }

    /// Sorted copy of the edge list, used as a canonical identity.
    pub fn canonical_edges(&self) -> Vec<(u32, u32)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }
}

/// A graph known to be acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Graph", into = "Graph")]
pub struct Forest(Graph);

impl Forest {
    pub fn empty(n: usize) -> Self {
        Self(Graph::empty(n))
    }

    pub fn new(graph: Graph) -> Result<Self> {
        validate_forest(&graph)?;
        Ok(Self(graph))
    }

    /// Caller guarantees acyclicity; checked in debug builds.
    pub(crate) fn from_trusted(graph: Graph) -> Self {
        debug_assert!(validate_forest(&graph).is_ok());
        Self(graph)
    }

    pub fn graph(&self) -> &Graph {
        &self.0
    }

    pub fn into_graph(self) -> Graph {
        self.0
    }

    pub fn n_vertices(&self) -> usize {
        self.0.n_vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.0.edges
    }

    pub fn edge_count(&self) -> usize {
        self.0.edges.len()
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.0.component_sizes()
    }
}

impl TryFrom<Graph> for Forest {
    type Error = Error;
    fn try_from(g: Graph) -> Result<Self> {
        Forest::new(g)
    }
}

impl From<Forest> for Graph {
    fn from(f: Forest) -> Graph {
        f.0
    }
}

/// Full structural check: ranges, no loops, no repeats, acyclic.
pub fn validate_forest(g: &Graph) -> Result<()> {
    if g.edges.len() + 1 > g.n_vertices.max(1) {
        return Err(Error::Validation(format!(
            "{} edges on {} vertices",
            g.edges.len(),
            g.n_vertices
        )));
    }
    let mut uf = UnionFind::new(g.n_vertices);
    for &(a, b) in &g.edges {
        if a >= b || b as usize >= g.n_vertices {
            return Err(Error::Validation(format!("malformed edge ({a},{b})")));
        }
        if !uf.union(a, b) {
            return Err(Error::Validation(format!("edge ({a},{b}) closes a cycle")));
        }
    }
    Ok(())
}

/// Sum of squared component sizes.
pub fn square_sum(sizes: &[usize]) -> f64 {
    sizes.iter().map(|&s| (s as f64) * (s as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_tracks_sizes() {
        let mut uf = UnionFind::new(6);
        assert!(uf.union(0, 1));
        assert!(uf.union(2, 1));
        assert!(!uf.union(0, 2));
        assert_eq!(uf.class_sizes(), vec![3, 1, 1, 1]);
        assert_eq!(uf.class_size(2), 3);
    }

    #[test]
    fn forest_rejects_cycle() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!g.is_acyclic());
        assert!(Forest::new(g).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
    }

    #[test]
    fn components_of_path_and_isolated() {
        let g = Graph::from_edges(5, [(3, 4), (0, 3)]).unwrap();
        assert_eq!(g.component_sizes(), vec![3, 1, 1]);
        assert_eq!(square_sum(&g.component_sizes()), 11.0);
    }
}
