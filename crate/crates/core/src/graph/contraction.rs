//! Contraction of a connected vertex set into a single vertex, with full
//! provenance for parallel edges that collapse in the process.

use super::connectivity::connected_components;
use super::{Graph, GraphError};

/// A contracted graph plus the bookkeeping needed to push per-edge data
/// (interactions, signs) through the contraction.
#[derive(Debug, Clone)]
pub struct MultiGraphWithMergeMap {
    pub graph: Graph,
    /// original vertex id -> contracted vertex id
    pub merge_map: Vec<usize>,
    /// For each contracted edge (indexed like `graph.edges()`): the original
    /// edges that collapsed onto it, each with the endpoint that survived.
    /// Entries are `(orig_u, orig_v)` in the original graph's ids.
    pub edge_sources: Vec<Vec<(usize, usize)>>,
}

/// Contracts the connected set `s` into a single vertex.
///
/// The contracted vertex takes the smallest id position; remaining vertices
/// are renumbered densely preserving their relative order. Parallel edges
/// collapse into one, with all originals recorded in `edge_sources`.
pub fn contract_vertex_set(g: &Graph, s: &[usize]) -> Result<MultiGraphWithMergeMap, GraphError> {
    if s.is_empty() {
        return Err(GraphError::EmptySet);
    }
    let mut set = s.to_vec();
    set.sort_unstable();
    set.dedup();
    for &v in &set {
        if v >= g.vertex_count() {
            return Err(GraphError::VertexOutOfRange(v, g.vertex_count()));
        }
    }
    let (induced, _) = g.induced_subgraph(&set);
    if connected_components(&induced).len() != 1 {
        return Err(GraphError::DisconnectedSet);
    }

    let n = g.vertex_count();
    let in_set = {
        let mut m = vec![false; n];
        for &v in &set {
            m[v] = true;
        }
        m
    };
    // New ids: contracted vertex sits where the smallest member was.
    let anchor = set[0];
    let mut merge_map = vec![usize::MAX; n];
    let mut next = 0usize;
    for v in 0..n {
        if in_set[v] {
            if v == anchor {
                merge_map[v] = next;
                next += 1;
            }
        } else {
            merge_map[v] = next;
            next += 1;
        }
    }
    for &v in &set {
        merge_map[v] = merge_map[anchor];
    }
    let new_n = next;

    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut sources: Vec<Vec<(usize, usize)>> = Vec::new();
    for &(u, v) in g.edges() {
        let (a, b) = (merge_map[u], merge_map[v]);
        if a == b {
            continue; // edge inside the contracted set disappears
        }
        let key = (a.min(b), a.max(b));
        match edges.binary_search(&key) {
            Ok(i) => sources[i].push((u, v)),
            Err(i) => {
                edges.insert(i, key);
                sources.insert(i, vec![(u, v)]);
            }
        }
    }
    let graph = Graph::new(new_n, edges).expect("contracted edges are valid by construction");
    Ok(MultiGraphWithMergeMap {
        graph,
        merge_map,
        edge_sources: sources,
    })
}
