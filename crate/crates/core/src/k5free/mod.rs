//! Decomposition of K5-minor-free graphs into planar pieces and small
//! nonplanar pieces glued along at most three vertices.
//!
//! The construction recursively splits biconnected pieces along 2-vertex
//! cuts (adding a virtual edge between the cut pair to each side) and
//! 3-connected pieces along 3-vertex cuts with at least three components
//! (adding a virtual triangle). Terminal pieces must be planar or have at
//! most eight vertices and no K5 minor; anything else means the input had a
//! K5 minor. Virtual edges are removed from the final tree, and the cut
//! nodes are absorbed into neighboring pieces, leaving an 8-nice
//! decomposition the DP engine accepts.

mod blocktree;
mod minor;

pub use blocktree::{three_three_block_tree, two_block_tree, BlockNode, BlockTree, BlockTreeKind};
pub use minor::has_k5_minor;

use crate::decomp::{DecompNode, DecompositionTree};
use crate::graph::{
    biconnected_components, connected_components, find_cut, Graph,
};
use blocktree::Piece;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum K5Error {
    #[error("graph is not K5-minor-free: offending piece on vertices {piece:?}")]
    NotK5Free { piece: Vec<usize> },
    #[error("graph is not biconnected")]
    NotBiconnected,
    #[error("graph is not 3-connected")]
    Not3Connected,
    #[error("internal error: produced decomposition failed validation:\n{0}")]
    Internal(String),
}

/// Diagnostics accumulated while decomposing.
#[derive(Debug, Default, Clone)]
pub struct DecomposeStats {
    /// number of times a (3,2)-cut split was needed because a terminal piece
    /// had no (3,3)-cut yet failed the planar-or-small dichotomy
    pub fallback_32_splits: usize,
}

/// Builds an 8-nice decomposition of a K5-minor-free graph.
pub fn decompose_k5_free(g: &Graph) -> Result<DecompositionTree, K5Error> {
    decompose_k5_free_with_stats(g).map(|(t, _)| t)
}

pub fn decompose_k5_free_with_stats(
    g: &Graph,
) -> Result<(DecompositionTree, DecomposeStats), K5Error> {
    let mut stats = DecomposeStats::default();
    let mut builder = TreeBuilder::default();

    if g.vertex_count() == 0 {
        builder.add_node(Vec::new(), Vec::new());
    }
    for component in connected_components(g) {
        let first_in_component = builder.nodes.len();
        let (sub, back) = g.induced_subgraph(&component);
        if sub.edge_count() == 0 {
            // isolated vertex
            builder.add_node(component.clone(), Vec::new());
        } else {
            let blocks = biconnected_components(&sub);
            let mut block_roots: Vec<usize> = Vec::new();
            for bi in 0..blocks.blocks.len() {
                let verts: Vec<usize> = blocks
                    .block_vertices(bi)
                    .into_iter()
                    .map(|v| back[v])
                    .collect();
                let real: Vec<(usize, usize)> = blocks.blocks[bi]
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (back[a], back[b]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                let piece = Piece::new(verts, real, Vec::new());
                let first_node = builder.nodes.len();
                split_piece(piece, &mut builder, &mut stats)?;
                block_roots.push(first_node);
            }
            // glue blocks sharing a cut vertex
            let mut hub_of: HashMap<usize, usize> = HashMap::new(); // cut vertex -> node idx
            for (bi, &broot) in block_roots.iter().enumerate() {
                let bend = block_roots
                    .get(bi + 1)
                    .copied()
                    .unwrap_or(builder.nodes.len());
                for &cv in &blocks.cut_vertices {
                    let host_cv = back[cv];
                    // smallest node in this block containing the cut vertex
                    let found = (broot..bend)
                        .find(|&i| builder.nodes[i].0.binary_search(&host_cv).is_ok());
                    if let Some(node_idx) = found {
                        match hub_of.get(&host_cv) {
                            None => {
                                hub_of.insert(host_cv, node_idx);
                            }
                            Some(&hub) => builder.tree_edges.push((hub, node_idx)),
                        }
                    }
                }
            }
            // connect any blocks untouched by cut vertices (single-block
            // components) — nothing to do; multi-block components are
            // connected through their cut vertices by construction
        }
        // glue this component to the global root with an empty navel
        if first_in_component > 0 {
            builder.tree_edges.push((0, first_in_component));
        }
    }

    let tree = builder.finish(8);
    let report = tree.validate(g);
    if !report.is_valid() {
        return Err(K5Error::Internal(report.to_string()));
    }
    Ok((tree, stats))
}

#[derive(Default)]
struct TreeBuilder {
    /// (sorted vertices, owned real edges)
    nodes: Vec<(Vec<usize>, Vec<(usize, usize)>)>,
    tree_edges: Vec<(usize, usize)>,
}

impl TreeBuilder {
    fn add_node(&mut self, mut vertices: Vec<usize>, edges: Vec<(usize, usize)>) -> usize {
        vertices.sort_unstable();
        vertices.dedup();
        self.nodes.push((vertices, edges));
        self.nodes.len() - 1
    }

    fn finish(self, c: usize) -> DecompositionTree {
        // orient tree edges away from node 0 by BFS
        let n = self.nodes.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &self.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        let nodes = self
            .nodes
            .into_iter()
            .enumerate()
            .map(|(i, (vertices, edges))| DecompNode {
                id: i,
                parent: parent[i],
                vertices,
                edges,
            })
            .collect();
        DecompositionTree::new(c, 0, nodes)
    }
}

/// Recursively splits one biconnected piece into terminal nodes, wiring the
/// internal tree edges. Returns the owner map: every edge of the piece
/// (real or virtual) to the terminal node that retained it.
fn split_piece(
    piece: Piece,
    builder: &mut TreeBuilder,
    stats: &mut DecomposeStats,
) -> Result<HashMap<(usize, usize), usize>, K5Error> {
    // accept planar pieces and small K5-free pieces as terminals
    if piece.accepts_as_terminal() {
        let idx = builder.add_node(piece.vertices.clone(), piece.real.clone());
        let mut owners = HashMap::new();
        for e in piece.all_edges() {
            owners.insert(e, idx);
        }
        return Ok(owners);
    }
    let local = piece.local_graph();
    let cut = find_cut(&local, 2, 2)
        .map(|c| (c, false))
        .or_else(|| find_cut(&local, 3, 3).map(|c| (c, false)))
        .or_else(|| {
            find_cut(&local, 3, 2).map(|c| {
                (c, true)
            })
        });
    let Some((cut_local, was_fallback)) = cut else {
        return Err(K5Error::NotK5Free {
            piece: piece.vertices.clone(),
        });
    };
    if was_fallback {
        stats.fallback_32_splits += 1;
    }
    let cut_host: Vec<usize> = cut_local.iter().map(|&v| piece.vertices[v]).collect();
    let sub_pieces = piece.split_on(&cut_host, &local, &cut_local);

    let mut owners: HashMap<(usize, usize), usize> = HashMap::new();
    let mut attach_nodes: Vec<usize> = Vec::new();
    // the cut's witness edge: the pair all sub-pieces carry
    let witness = (
        cut_host[0].min(cut_host[1]),
        cut_host[0].max(cut_host[1]),
    );
    for sub in sub_pieces {
        let sub_edges: Vec<(usize, usize)> = sub.all_edges();
        let sub_owners = split_piece(sub, builder, stats)?;
        attach_nodes.push(sub_owners[&witness]);
        for e in sub_edges {
            if let Some(&o) = sub_owners.get(&e) {
                owners.entry(e).or_insert(o);
            }
        }
    }
    // absorb the cut node into its smallest-index neighbor
    let hub = *attach_nodes.iter().min().expect("at least two sub-pieces");
    for &t in &attach_nodes {
        if t != hub {
            builder.tree_edges.push((hub, t));
        }
    }
    // restrict owners to edges of this piece
    let piece_edges: std::collections::HashSet<(usize, usize)> =
        piece.all_edges().into_iter().collect();
    owners.retain(|e, _| piece_edges.contains(e));
    Ok(owners)
}
