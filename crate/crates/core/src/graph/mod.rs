//! Undirected simple graphs and the structural primitives the rest of the
//! crate is built on: planarity testing with a combinatorial embedding,
//! vertex-set contraction, and connectivity cuts.

mod connectivity;
mod contraction;
mod embedding;
mod planarity;

pub use connectivity::{biconnected_components, connected_components, find_cut, is_connected, BlockDecomposition};
pub use contraction::{contract_vertex_set, MultiGraphWithMergeMap};
pub use embedding::PlanarEmbedding;
pub use planarity::planarity_test;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or manipulating graphs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range for graph with {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex set is not connected")]
    DisconnectedSet,
    #[error("vertex set is empty")]
    EmptySet,
}

/// An undirected simple graph over vertices `0..n`.
///
/// Edges are stored normalized (`u < v`) and sorted; adjacency lists are
/// derived at construction and kept sorted so that all traversals are
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut norm: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::LoopEdge(u));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        for w in norm.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph { n, edges: norm, adj })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Normalized (`u < v`), sorted edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// Index of edge `{u, v}` in the normalized edge list.
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = (u.min(v), u.max(v));
        self.edges.binary_search(&(a, b)).ok()
    }

    /// Subgraph induced on `keep` (host ids), together with the map from new
    /// ids back to host ids. New ids follow the order of `keep` after
    /// sorting and deduplication.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let mut back: Vec<usize> = keep.to_vec();
        back.sort_unstable();
        back.dedup();
        let mut to_new = vec![usize::MAX; self.n];
        for (new, &old) in back.iter().enumerate() {
            to_new[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|&&(u, v)| to_new[u] != usize::MAX && to_new[v] != usize::MAX)
            .map(|&(u, v)| (to_new[u], to_new[v]))
            .collect();
        let g = Graph::new(back.len(), edges).expect("induced subgraph of a valid graph is valid");
        (g, back)
    }

    /// The graph with vertex set `X` removed (ids are preserved through the
    /// returned back-map).
    pub fn remove_vertices(&self, remove: &[usize]) -> (Graph, Vec<usize>) {
        let mut gone = vec![false; self.n];
        for &v in remove {
            gone[v] = true;
        }
        let keep: Vec<usize> = (0..self.n).filter(|&v| !gone[v]).collect();
        self.induced_subgraph(&keep)
    }
}

/// Serialization mirror of the on-disk graph format:
/// `{"n": <int>, "edges": [[u, v], ...]}`.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            n: self.n,
            edges: self.edges.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let raw: GraphJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
        Graph::new(raw.n, raw.edges).map_err(|e| e.to_string())
    }
}
