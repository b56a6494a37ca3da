//! Recursive cut decompositions: 2-block trees of biconnected graphs and
//! (3,3)-block trees of 3-connected graphs, built by exhaustive cut search.
//!
//! Pieces carry real host edges and virtual edges added during splitting;
//! a color-2 node holds a cut set and connects, per component, to the
//! terminal piece that retained the cut's witness edge.

use super::minor::has_k5_minor;
use super::K5Error;
use crate::graph::{
    biconnected_components, connected_components, find_cut, is_connected, planarity_test, Graph,
};
use std::collections::HashMap;

/// A subgraph being split: host vertex ids plus real/virtual edge lists.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub vertices: Vec<usize>,
    pub real: Vec<(usize, usize)>,
    pub virtual_: Vec<(usize, usize)>,
}

impl Piece {
    pub fn new(
        mut vertices: Vec<usize>,
        mut real: Vec<(usize, usize)>,
        mut virtual_: Vec<(usize, usize)>,
    ) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        real.sort_unstable();
        real.dedup();
        virtual_.sort_unstable();
        virtual_.dedup();
        Piece {
            vertices,
            real,
            virtual_,
        }
    }

    pub fn all_edges(&self) -> Vec<(usize, usize)> {
        let mut out = self.real.clone();
        out.extend(self.virtual_.iter().copied());
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn local_of(&self, host: usize) -> usize {
        self.vertices.binary_search(&host).expect("host vertex in piece")
    }

    /// The piece as a local graph (real and virtual edges together).
    pub fn local_graph(&self) -> Graph {
        let edges: Vec<(usize, usize)> = self
            .all_edges()
            .into_iter()
            .map(|(a, b)| (self.local_of(a), self.local_of(b)))
            .collect();
        Graph::new(self.vertices.len(), edges).expect("piece is simple")
    }

    /// Terminal acceptance: planar (any size), or at most eight vertices
    /// with no K5 minor. Checked on the torso, i.e. with virtual edges.
    pub fn accepts_as_terminal(&self) -> bool {
        let local = self.local_graph();
        if planarity_test(&local).is_some() {
            return true;
        }
        self.vertices.len() <= 8 && !has_k5_minor(&local)
    }

    /// Splits on a cut (host ids): one sub-piece per component of
    /// `local - cut`, each containing the cut vertices, its share of the
    /// edges, and virtual edges completing the cut clique. Real edges inside
    /// the cut go to the first sub-piece.
    pub fn split_on(&self, cut_host: &[usize], local: &Graph, cut_local: &[usize]) -> Vec<Piece> {
        let (removed, rback) = local.remove_vertices(cut_local);
        let comps = connected_components(&removed);
        let mut comp_of = vec![usize::MAX; self.vertices.len()];
        for (ci, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[rback[v]] = ci;
            }
        }
        let in_cut = |host: usize| cut_host.contains(&host);
        let mut subs: Vec<(Vec<usize>, Vec<(usize, usize)>, Vec<(usize, usize)>)> = comps
            .iter()
            .map(|comp| {
                let mut verts: Vec<usize> = comp.iter().map(|&v| self.vertices[rback[v]]).collect();
                verts.extend_from_slice(cut_host);
                (verts, Vec::new(), Vec::new())
            })
            .collect();
        let dest = |a: usize, b: usize, comp_of: &[usize]| -> Option<usize> {
            let (la, lb) = (self.local_of(a), self.local_of(b));
            match (in_cut(a), in_cut(b)) {
                (true, true) => None, // cut-internal edge
                (false, _) => Some(comp_of[la]),
                (_, false) => Some(comp_of[lb]),
            }
        };
        for &(a, b) in &self.real {
            match dest(a, b, &comp_of) {
                Some(ci) => subs[ci].1.push((a, b)),
                None => subs[0].1.push((a, b)),
            }
        }
        for &(a, b) in &self.virtual_ {
            match dest(a, b, &comp_of) {
                Some(ci) => subs[ci].2.push((a, b)),
                None => subs[0].2.push((a, b)),
            }
        }
        // complete the cut clique in every sub-piece
        for (ci, sub) in subs.iter_mut().enumerate() {
            for i in 0..cut_host.len() {
                for j in (i + 1)..cut_host.len() {
                    let e = (
                        cut_host[i].min(cut_host[j]),
                        cut_host[i].max(cut_host[j]),
                    );
                    let _ = ci;
                    if !sub.1.contains(&e) && !sub.2.contains(&e) {
                        sub.2.push(e);
                    }
                }
            }
        }
        subs.into_iter()
            .map(|(v, r, vi)| Piece::new(v, r, vi))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTreeKind {
    TwoBlock,
    ThreeThreeBlock,
}

#[derive(Debug, Clone)]
pub struct BlockNode {
    /// 1 = graph piece, 2 = cut set
    pub color: u8,
    pub vertices: Vec<usize>,
    pub real_edges: Vec<(usize, usize)>,
    /// edges created during splitting, flagged for later removal
    pub virtual_edges: Vec<(usize, usize)>,
}

#[derive(Debug)]
pub struct BlockTree {
    pub kind: BlockTreeKind,
    pub nodes: Vec<BlockNode>,
    pub tree_edges: Vec<(usize, usize)>,
}

impl BlockTree {
    pub fn color1_nodes(&self) -> impl Iterator<Item = &BlockNode> {
        self.nodes.iter().filter(|n| n.color == 1)
    }

    /// Every real edge must land in exactly one color-1 node, and the union
    /// must reproduce the input.
    pub fn reassembled_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .color1_nodes()
            .flat_map(|n| n.real_edges.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Recursive split on `(2,2)`-cuts. The input must be biconnected.
pub fn two_block_tree(g: &Graph) -> Result<BlockTree, K5Error> {
    let bd = biconnected_components(g);
    if !is_connected(g) || !bd.cut_vertices.is_empty() || g.vertex_count() == 0 {
        return Err(K5Error::NotBiconnected);
    }
    let mut tree = BlockTree {
        kind: BlockTreeKind::TwoBlock,
        nodes: Vec::new(),
        tree_edges: Vec::new(),
    };
    let piece = Piece::new(
        (0..g.vertex_count()).collect(),
        g.edges().to_vec(),
        Vec::new(),
    );
    build_block_tree(piece, 2, &mut tree);
    Ok(tree)
}

/// Recursive split on `(3,3)`-cuts. The input must be 3-connected.
pub fn three_three_block_tree(g: &Graph) -> Result<BlockTree, K5Error> {
    if two_block_tree(g).is_err() || find_cut(g, 2, 2).is_some() {
        return Err(K5Error::Not3Connected);
    }
    let mut tree = BlockTree {
        kind: BlockTreeKind::ThreeThreeBlock,
        nodes: Vec::new(),
        tree_edges: Vec::new(),
    };
    let piece = Piece::new(
        (0..g.vertex_count()).collect(),
        g.edges().to_vec(),
        Vec::new(),
    );
    build_block_tree(piece, 3, &mut tree);
    Ok(tree)
}

/// Shared recursion; `cut_size` 2 splits on (2,2)-cuts, 3 on (3,3)-cuts.
/// Returns the owner map from piece edges to terminal node indices.
fn build_block_tree(
    piece: Piece,
    cut_size: usize,
    tree: &mut BlockTree,
) -> HashMap<(usize, usize), usize> {
    let local = piece.local_graph();
    let cut = find_cut(&local, cut_size, cut_size);
    let Some(cut_local) = cut else {
        let idx = tree.nodes.len();
        tree.nodes.push(BlockNode {
            color: 1,
            vertices: piece.vertices.clone(),
            real_edges: piece.real.clone(),
            virtual_edges: piece.virtual_.clone(),
        });
        let mut owners = HashMap::new();
        for e in piece.all_edges() {
            owners.insert(e, idx);
        }
        return owners;
    };
    let cut_host: Vec<usize> = cut_local.iter().map(|&v| piece.vertices[v]).collect();
    let cut_idx = tree.nodes.len();
    tree.nodes.push(BlockNode {
        color: 2,
        vertices: cut_host.clone(),
        real_edges: Vec::new(),
        virtual_edges: Vec::new(),
    });
    let witness = (cut_host[0].min(cut_host[1]), cut_host[0].max(cut_host[1]));
    let mut owners: HashMap<(usize, usize), usize> = HashMap::new();
    for sub in piece.split_on(&cut_host, &local, &cut_local) {
        let sub_owners = build_block_tree(sub, cut_size, tree);
        tree.tree_edges.push((cut_idx, sub_owners[&witness]));
        for (e, o) in sub_owners {
            owners.entry(e).or_insert(o);
        }
    }
    let piece_edges: std::collections::HashSet<(usize, usize)> =
        piece.all_edges().into_iter().collect();
    owners.retain(|e, _| piece_edges.contains(e));
    owners
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Graph {
        Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn three_connected_graph_is_single_node() {
        let t = two_block_tree(&k4()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.nodes[0].color, 1);
        assert_eq!(t.reassembled_edges(), k4().edges());
    }

    #[test]
    fn two_squares_sharing_an_edge() {
        // squares 0-1-2-3 and 2-3-4-5 share edge (2,3)
        let g = Graph::new(
            6,
            vec![(0, 1), (1, 2), (2, 3), (0, 3), (2, 4), (4, 5), (3, 5)],
        )
        .unwrap();
        let t = two_block_tree(&g).unwrap();
        // splits exist; every real edge lands in exactly one color-1 node
        assert_eq!(t.reassembled_edges(), g.edges());
        assert!(t.nodes.iter().any(|n| n.color == 2));
        for n in t.nodes.iter().filter(|n| n.color == 2) {
            assert_eq!(n.vertices.len(), 2);
            assert!(n.real_edges.is_empty() && n.virtual_edges.is_empty());
        }
    }

    #[test]
    fn cycle_terminates_in_triangles() {
        let t = two_block_tree(&cycle(6)).unwrap();
        for n in t.color1_nodes() {
            assert_eq!(n.vertices.len(), 3, "terminal piece is a triangle");
            assert_eq!(n.real_edges.len() + n.virtual_edges.len(), 3);
        }
        assert_eq!(t.reassembled_edges(), cycle(6).edges());
    }

    #[test]
    fn v8_has_no_33_cut() {
        let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        edges.extend((0..4).map(|i| (i, i + 4)));
        let v8 = Graph::new(8, edges).unwrap();
        assert_eq!(find_cut(&v8, 3, 3), None);
        let t = three_three_block_tree(&v8).unwrap();
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn triple_attached_blocks_split_on_their_triple() {
        // three 4-vertex pieces all attached to the triple {0,1,2}; x_i
        // adjacent to all three cut vertices, cut is non-adjacent inside
        let mut edges = Vec::new();
        for (i, x) in [3usize, 4, 5].iter().enumerate() {
            let _ = i;
            edges.extend([(0, *x), (1, *x), (2, *x)]);
        }
        let g = Graph::new(6, edges).unwrap();
        // this is K3,3: 3-connected, cut {0,1,2} leaves three singletons
        let t = three_three_block_tree(&g).unwrap();
        let color2: Vec<_> = t.nodes.iter().filter(|n| n.color == 2).collect();
        assert_eq!(color2.len(), 1);
        assert_eq!(color2[0].vertices, vec![0, 1, 2]);
        assert_eq!(t.color1_nodes().count(), 3);
        for n in t.color1_nodes() {
            assert_eq!(n.vertices.len(), 4);
            // virtual triangle on the cut
            assert_eq!(n.virtual_edges.len(), 3);
        }
        assert_eq!(t.reassembled_edges(), g.edges());
    }

    #[test]
    fn not_biconnected_rejected() {
        let path = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(matches!(two_block_tree(&path), Err(K5Error::NotBiconnected)));
        assert!(matches!(
            three_three_block_tree(&cycle(5)),
            Err(K5Error::Not3Connected)
        ));
    }
}
