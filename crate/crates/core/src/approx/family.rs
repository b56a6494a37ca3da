//! Spanning-graph families over the apexed grid.
//!
//! PSG: per row gap (and per column gap), a planar member keeping every grid
//! edge except the gap's crossing edges, with the apex tied to the two rows
//! flanking the gap; plus the independent-variables member holding only the
//! apex edges. `2(H-1) + 1` members, all planar.
//!
//! DSG: per 3-row window (and transposed), a member keeping the window rows
//! fully connected, the apex tied to up to four rows, and the outer slabs
//! attached through first-column connectors. The window is chopped into
//! 3x3-plus-apex chunks — nonplanar but at most ten vertices — linked
//! through the apex, so each member carries a valid 10-nice decomposition
//! rather than a planar embedding. `2(H-2) + 1` members.

use super::{apexify, grid_graph, ApproxError, GridModel};
use crate::decomp::{DecompNode, DecompositionTree};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Psg,
    Dsg,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Psg => "psg",
            FamilyKind::Dsg => "dsg",
        }
    }
}

/// One spanning member: a subgraph of the apex graph on the full vertex set,
/// with a decomposition tree its inference runs through.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub graph: Graph,
    pub tree: DecompositionTree,
    /// member edge index -> target (apex graph) edge index
    pub edge_in_target: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpanningFamily {
    pub kind: FamilyKind,
    pub h: usize,
    pub target_graph: Graph,
    pub members: Vec<FamilyMember>,
    /// per target edge: indices of members containing it
    pub coverage: Vec<Vec<usize>>,
}

impl SpanningFamily {
    /// `J'` on the target graph for a concrete grid model.
    pub fn target_interactions(&self, m: &GridModel) -> Vec<f64> {
        let (_, j) = apexify(m);
        j
    }

    pub fn check_coverage(&self) -> Result<(), ApproxError> {
        for (e, members) in self.coverage.iter().enumerate() {
            if members.is_empty() {
                return Err(ApproxError::CoverageError(self.target_graph.edges()[e]));
            }
        }
        Ok(())
    }
}

fn build_family(
    kind: FamilyKind,
    h: usize,
    member_edges: Vec<Vec<(usize, usize)>>,
    trees: Vec<Option<DecompositionTree>>,
) -> SpanningFamily {
    let target_graph = apex_graph(h);
    let n = target_graph.vertex_count();
    let mut members = Vec::with_capacity(member_edges.len());
    for (edges, tree) in member_edges.into_iter().zip(trees) {
        let graph = Graph::new(n, edges).expect("member is simple");
        let edge_in_target = graph
            .edges()
            .iter()
            .map(|&(u, v)| target_graph.edge_index(u, v).expect("member edge in target"))
            .collect();
        let tree = tree.unwrap_or_else(|| DecompositionTree::single_node(&graph, 8));
        members.push(FamilyMember {
            graph,
            tree,
            edge_in_target,
        });
    }
    let mut coverage = vec![Vec::new(); target_graph.edge_count()];
    for (mi, member) in members.iter().enumerate() {
        for &t in &member.edge_in_target {
            coverage[t].push(mi);
        }
    }
    SpanningFamily {
        kind,
        h,
        target_graph,
        members,
        coverage,
    }
}

fn apex_graph(h: usize) -> Graph {
    let apex = h * h;
    let mut edges: Vec<(usize, usize)> = grid_graph(h).edges().to_vec();
    edges.extend((0..h * h).map(|v| (v, apex)));
    Graph::new(h * h + 1, edges).expect("apex graph is simple")
}

/// Grid coordinates with an optional transpose, so row and column members
/// share one builder.
#[derive(Clone, Copy)]
struct Axes {
    h: usize,
    transposed: bool,
}

impl Axes {
    fn v(&self, r: usize, c: usize) -> usize {
        if self.transposed {
            c * self.h + r
        } else {
            r * self.h + c
        }
    }
}

/// The planar separator family: `2(H-1)` gap members plus the
/// independent-variables member.
pub fn build_psg_family(h: usize) -> SpanningFamily {
    assert!(h >= 3, "PSG needs H >= 3");
    let apex = h * h;
    let mut member_edges = Vec::new();
    for &transposed in &[false, true] {
        let ax = Axes { h, transposed };
        for gap in 0..h - 1 {
            let mut edges = Vec::new();
            for r in 0..h {
                for c in 0..h {
                    if c + 1 < h {
                        edges.push((ax.v(r, c), ax.v(r, c + 1)));
                    }
                    if r + 1 < h && r != gap {
                        edges.push((ax.v(r, c), ax.v(r + 1, c)));
                    }
                }
            }
            for c in 0..h {
                edges.push((ax.v(gap, c), apex));
                edges.push((ax.v(gap + 1, c), apex));
            }
            member_edges.push(normalize(edges));
        }
    }
    member_edges.push(normalize((0..h * h).map(|v| (v, apex)).collect()));
    let trees = vec![None; member_edges.len()];
    build_family(FamilyKind::Psg, h, member_edges, trees)
}

/// The decomposition-based separator family: `2(H-2)` window members plus
/// the independent-variables member. Each window member is nonplanar and
/// carries an explicit 10-nice decomposition.
pub fn build_dsg_family(h: usize) -> SpanningFamily {
    assert!(h >= 4, "DSG needs H >= 4");
    let mut member_edges = Vec::new();
    let mut trees = Vec::new();
    for &transposed in &[false, true] {
        let ax = Axes { h, transposed };
        for window in 0..h - 2 {
            let (edges, tree) = dsg_member(ax, window);
            member_edges.push(edges);
            trees.push(Some(tree));
        }
    }
    let apex = h * h;
    member_edges.push(normalize((0..h * h).map(|v| (v, apex)).collect()));
    trees.push(None);
    build_family(FamilyKind::Dsg, h, member_edges, trees)
}

/// One DSG window member. The strip rows `w..w+2` keep all their vertical
/// couplings; the strip is chopped into 3-column chunks (apex plus a 3x3
/// block, the nonplanar nodes), and two of the three strip rows stay
/// connected across chunk boundaries through 5-vertex bridge nodes. The
/// apex covers rows `w-1..w+2`; the slabs above and below hang off the
/// first chunk through column-0 connectors.
fn dsg_member(ax: Axes, w: usize) -> (Vec<(usize, usize)>, DecompositionTree) {
    let h = ax.h;
    let apex = h * h;
    let strip = [w, w + 1, w + 2];
    let apex_rows: Vec<usize> = (w.saturating_sub(1)..=(w + 2).min(h - 1)).collect();
    let bands: Vec<(usize, usize)> = (0..h)
        .step_by(3)
        .map(|start| (start, (start + 2).min(h - 1)))
        .collect();
    let band_of = |c: usize| c / 3;

    let mut edges: Vec<(usize, usize)> = Vec::new();
    // horizontals: all, except band-crossing ones in the strip's last row
    // (rows w and w+1 cross through bridge nodes)
    for r in 0..h {
        for c in 0..h - 1 {
            if r == w + 2 && band_of(c) != band_of(c + 1) {
                continue;
            }
            edges.push((ax.v(r, c), ax.v(r, c + 1)));
        }
    }
    // verticals: all, except the flanking gaps where only column 0 remains
    for r in 0..h - 1 {
        let flanking = (r + 1 == w && w >= 1) || (r == w + 2);
        for c in 0..h {
            if flanking && c != 0 {
                continue;
            }
            edges.push((ax.v(r, c), ax.v(r + 1, c)));
        }
    }
    for &r in &apex_rows {
        for c in 0..h {
            edges.push((ax.v(r, c), apex));
        }
    }
    let edges = normalize(edges);
    let member = Graph::new(h * h + 1, edges.clone()).expect("member is simple");

    let slab_top: Option<Vec<usize>> = (w >= 1).then(|| (0..w).collect());
    let slab_bot: Option<Vec<usize>> = (w + 3 < h).then(|| ((w + 3)..h).collect());
    let mut nodes: Vec<DecompNode> = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    let mut owned = vec![false; member.edge_count()];
    let claim = |vertices: Vec<usize>, owned: &mut Vec<bool>| -> DecompNode {
        let mut vs = vertices.clone();
        vs.sort_unstable();
        vs.dedup();
        let mut es = Vec::new();
        for (i, &(a, b)) in member.edges().iter().enumerate() {
            if !owned[i] && vs.binary_search(&a).is_ok() && vs.binary_search(&b).is_ok() {
                owned[i] = true;
                es.push((a, b));
            }
        }
        DecompNode {
            id: 0,
            parent: None,
            vertices: vs,
            edges: es,
        }
    };

    // chunk chain with bridges: chunk_0 - bridge_0 - chunk_1 - bridge_1 - ...
    let mut prev_chunk: Option<usize> = None;
    for (bi, &(b0, b1)) in bands.iter().enumerate() {
        if let Some(prev) = prev_chunk {
            // bridge carrying the row-w and row-(w+1) crossings into band bi
            let vs = vec![
                apex,
                ax.v(w, b0 - 1),
                ax.v(w, b0),
                ax.v(w + 1, b0 - 1),
                ax.v(w + 1, b0),
            ];
            // the bridge owns only the two crossing horizontals
            let mut es = Vec::new();
            for (i, &(a, b)) in member.edges().iter().enumerate() {
                let want = [
                    norm_edge(ax.v(w, b0 - 1), ax.v(w, b0)),
                    norm_edge(ax.v(w + 1, b0 - 1), ax.v(w + 1, b0)),
                ];
                if !owned[i] && want.contains(&(a, b)) {
                    owned[i] = true;
                    es.push((a, b));
                }
            }
            let mut vs = vs;
            vs.sort_unstable();
            nodes.push(DecompNode {
                id: 0,
                parent: None,
                vertices: vs,
                edges: es,
            });
            parents.push(Some(prev));
            let bridge_idx = nodes.len() - 1;
            // the chunk for this band hangs off the bridge
            let mut cvs = vec![apex];
            for &r in &strip {
                for c in b0..=b1 {
                    cvs.push(ax.v(r, c));
                }
            }
            nodes.push(claim(cvs, &mut owned));
            parents.push(Some(bridge_idx));
            prev_chunk = Some(nodes.len() - 1);
            let _ = bi;
        } else {
            let mut cvs = vec![apex];
            for &r in &strip {
                for c in b0..=b1 {
                    cvs.push(ax.v(r, c));
                }
            }
            nodes.push(claim(cvs, &mut owned));
            parents.push(None);
            prev_chunk = Some(nodes.len() - 1);
        }
    }
    // slabs attach to the first chunk through the column-0 connectors
    if let Some(rows) = slab_top {
        let mut vs: Vec<usize> = Vec::new();
        for &r in &rows {
            for c in 0..h {
                vs.push(ax.v(r, c));
            }
        }
        vs.push(apex); // owns the apex edges of row w-1
        vs.push(ax.v(w, 0)); // connector endpoint in the strip
        nodes.push(claim(vs, &mut owned));
        parents.push(Some(0));
    }
    if let Some(rows) = slab_bot {
        let mut vs: Vec<usize> = Vec::new();
        for &r in &rows {
            for c in 0..h {
                vs.push(ax.v(r, c));
            }
        }
        vs.push(ax.v(w + 2, 0)); // connector endpoint in the strip
        nodes.push(claim(vs, &mut owned));
        parents.push(Some(0));
    }
    debug_assert!(owned.iter().all(|&o| o), "every member edge owned");
    for (i, n) in nodes.iter_mut().enumerate() {
        n.id = i;
        n.parent = parents[i];
    }
    let tree = DecompositionTree::new(10, 0, nodes);
    (edges, tree)
}

fn norm_edge(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn normalize(mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for e in edges.iter_mut() {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}
