//! Connectivity primitives: components, biconnected components, and small
//! vertex cuts found by exhaustive search.

use super::Graph;

/// Connected components as sorted vertex lists, numbered by their smallest
/// contained vertex id.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).len() <= 1
}

/// Result of splitting a graph into biconnected components.
pub struct BlockDecomposition {
    /// Edge lists (host ids), one per biconnected component. Every edge of
    /// the graph appears in exactly one component.
    pub blocks: Vec<Vec<(usize, usize)>>,
    /// Cut vertices, sorted.
    pub cut_vertices: Vec<usize>,
}

impl BlockDecomposition {
    /// Vertex set of block `i`, sorted.
    pub fn block_vertices(&self, i: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.blocks[i].iter().flat_map(|&(u, v)| [u, v]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// Hopcroft–Tarjan biconnected components. Isolated vertices belong to no
/// block; two blocks share at most one vertex (a cut vertex).
pub fn biconnected_components(g: &Graph) -> BlockDecomposition {
    let n = g.vertex_count();
    let mut num = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut blocks: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0usize;

    // Iterative DFS: (vertex, parent, neighbor cursor).
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if num[root] != usize::MAX {
            continue;
        }
        num[root] = counter;
        low[root] = counter;
        counter += 1;
        let mut root_children = 0usize;
        stack.push((root, usize::MAX, 0));
        while let Some(&mut (v, parent, ref mut cursor)) = stack.last_mut() {
            if *cursor < g.degree(v) {
                let w = g.neighbors(v)[*cursor];
                *cursor += 1;
                if num[w] == usize::MAX {
                    edge_stack.push((v, w));
                    num[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != parent && num[w] < num[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(num[w]);
                }
            } else {
                stack.pop();
                if let Some(&mut (p, _, _)) = stack.last_mut() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= num[p] {
                        // v's subtree attaches to the rest only through p:
                        // edges above (and including) the tree edge (p, v)
                        // form one block.
                        let mut block = Vec::new();
                        while let Some(&(a, b)) = edge_stack.last() {
                            let is_base = a == p && b == v;
                            if num[a] >= num[v] || is_base {
                                block.push((a.min(b), a.max(b)));
                                edge_stack.pop();
                                if is_base {
                                    break;
                                }
                            } else {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                        if p != root {
                            is_cut[p] = true;
                        }
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    blocks.sort();
    let cut_vertices = (0..n).filter(|&v| is_cut[v]).collect();
    BlockDecomposition { blocks, cut_vertices }
}

/// Searches for an `(i, j)`-cut: a vertex set `X` with `|X| = i` whose
/// removal leaves at least `j` connected components. Returns the
/// lexicographically smallest such set, or `None`.
///
/// Exhaustive over pairs/triples; fine at the scales this crate targets.
pub fn find_cut(g: &Graph, i: usize, j: usize) -> Option<Vec<usize>> {
    assert!(i == 2 || i == 3, "only 2- and 3-vertex cuts are supported");
    assert!(j >= 2);
    let n = g.vertex_count();
    if n <= i {
        return None;
    }
    let mut cand = Vec::with_capacity(i);
    if i == 2 {
        for a in 0..n {
            for b in (a + 1)..n {
                cand.clear();
                cand.extend([a, b]);
                if components_after_removal(g, &cand) >= j {
                    return Some(cand);
                }
            }
        }
    } else {
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    cand.clear();
                    cand.extend([a, b, c]);
                    if components_after_removal(g, &cand) >= j {
                        return Some(cand);
                    }
                }
            }
        }
    }
    None
}

/// Number of connected components of `g - removed`, counting isolated
/// vertices that remain.
fn components_after_removal(g: &Graph, removed: &[usize]) -> usize {
    let n = g.vertex_count();
    let mut gone = vec![false; n];
    for &v in removed {
        gone[v] = true;
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if gone[s] || seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !gone[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn components_basic() {
        assert_eq!(connected_components(&Graph::empty(0)).len(), 0);
        let two_edges = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            connected_components(&two_edges),
            vec![vec![0, 1], vec![2, 3]]
        );
        let grid = Graph::new(4, vec![(0, 1), (1, 3), (3, 2), (2, 0)]).unwrap();
        assert_eq!(connected_components(&grid).len(), 1);
    }

    #[test]
    fn bcc_two_triangles_sharing_vertex() {
        // triangles {0,1,2} and {2,3,4} share vertex 2
        let g = Graph::new(5, vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]).unwrap();
        let bd = biconnected_components(&g);
        assert_eq!(bd.blocks.len(), 2);
        assert_eq!(bd.cut_vertices, vec![2]);
        let mut all: Vec<(usize, usize)> = bd.blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, g.edges());
    }

    #[test]
    fn bcc_single_cycle() {
        let bd = biconnected_components(&cycle(5));
        assert_eq!(bd.blocks.len(), 1);
        assert!(bd.cut_vertices.is_empty());
    }

    #[test]
    fn bcc_path() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let bd = biconnected_components(&g);
        assert_eq!(bd.blocks.len(), 3);
        assert_eq!(bd.cut_vertices, vec![1, 2]);
    }

    #[test]
    fn cut_two_triangles_sharing_edge() {
        // triangles {0,1,2} and {1,2,3} share edge {1,2}
        let g = Graph::new(4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(find_cut(&g, 2, 2), Some(vec![1, 2]));
    }

    #[test]
    fn k4_has_no_2_2_cut() {
        let g = Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(find_cut(&g, 2, 2), None);
    }

    #[test]
    fn triangle_with_pendant_paths_has_3_3_cut() {
        // triangle {0,1,2}, pendant path of length 2 from each corner
        let mut edges = vec![(0, 1), (1, 2), (0, 2)];
        edges.extend([(0, 3), (3, 4), (1, 5), (5, 6), (2, 7), (7, 8)]);
        let g = Graph::new(9, edges).unwrap();
        let cut = find_cut(&g, 3, 3).unwrap();
        assert_eq!(cut, vec![0, 1, 2]);
    }

    #[test]
    fn find_cut_agrees_with_direct_enumeration() {
        // every pair on a handful of small graphs
        let graphs = [
            cycle(6),
            Graph::new(6, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap(),
            Graph::new(5, vec![(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4)]).unwrap(),
        ];
        for g in &graphs {
            let found = find_cut(g, 2, 2);
            let mut brute = None;
            'outer: for a in 0..g.vertex_count() {
                for b in (a + 1)..g.vertex_count() {
                    if components_after_removal(g, &[a, b]) >= 2 {
                        brute = Some(vec![a, b]);
                        break 'outer;
                    }
                }
            }
            assert_eq!(found, brute);
        }
    }
}
