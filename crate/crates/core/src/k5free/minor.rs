//! Brute-force K5-minor detection for small graphs: search for five
//! disjoint connected branch sets that are pairwise adjacent. Used on
//! terminal pieces of at most eight vertices and as the oracle the whole
//! pipeline is tested against.

use crate::graph::Graph;

/// True when `g` contains a K5 minor. Exponential backtracking; intended
/// for graphs up to roughly a dozen vertices.
pub fn has_k5_minor(g: &Graph) -> bool {
    let n = g.vertex_count();
    if n < 5 || g.edge_count() < 10 {
        return false;
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let mut sets = [0u32; 5];
    search(&adj, n, 0, &mut sets, 0)
}

/// Assigns vertices in order to one of the five branch sets or to none.
/// Canonical order: set `k` may be opened only after set `k - 1`.
fn search(adj: &[u32], n: usize, v: usize, sets: &mut [u32; 5], used: usize) -> bool {
    if v == n {
        return used == 5 && complete(adj, sets);
    }
    // not enough vertices left to open the remaining sets
    if 5usize.saturating_sub(used) > n - v {
        return false;
    }
    // a fragmented set that future vertices can no longer reconnect is dead
    let future = if n == 32 { !0u32 } else { (1u32 << n) - 1 } & !((1u32 << v) - 1);
    for k in 0..used {
        if !connected_mask(adj, sets[k]) && !connectable(adj, sets[k], future) {
            return false;
        }
    }
    let bit = 1u32 << v;
    for k in 0..used.min(5) {
        sets[k] |= bit;
        if search(adj, n, v + 1, sets, used) {
            return true;
        }
        sets[k] &= !bit;
    }
    if used < 5 {
        sets[used] = bit;
        if search(adj, n, v + 1, sets, used + 1) {
            return true;
        }
        sets[used] = 0;
    }
    // leave v unused
    search(adj, n, v + 1, sets, used)
}

/// Whether `mask` lies inside one component of `mask | future`.
fn connectable(adj: &[u32], mask: u32, future: u32) -> bool {
    let domain = mask | future;
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u32;
        let mut m = frontier;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            next |= adj[v] & domain & !seen;
            m &= m - 1;
        }
        seen |= next;
        frontier = next;
    }
    seen & mask == mask
}

fn complete(adj: &[u32], sets: &[u32; 5]) -> bool {
    for k in 0..5 {
        if !connected_mask(adj, sets[k]) {
            return false;
        }
    }
    for a in 0..5 {
        let reach = neighborhood(adj, sets[a]);
        for b in (a + 1)..5 {
            if reach & sets[b] == 0 {
                return false;
            }
        }
    }
    true
}

fn neighborhood(adj: &[u32], mask: u32) -> u32 {
    let mut out = 0u32;
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out |= adj[v];
        m &= m - 1;
    }
    out
}

fn connected_mask(adj: &[u32], mask: u32) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u32;
        let mut m = frontier;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            next |= adj[v] & mask & !seen;
            m &= m - 1;
        }
        seen |= next;
        frontier = next;
    }
    seen == mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_graph(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges).unwrap()
    }

    #[test]
    fn k5_and_k6_have_the_minor() {
        assert!(has_k5_minor(&complete_graph(5)));
        assert!(has_k5_minor(&complete_graph(6)));
    }

    #[test]
    fn k4_and_k33_do_not() {
        assert!(!has_k5_minor(&complete_graph(4)));
        let mut edges = Vec::new();
        for u in 0..3 {
            for v in 3..6 {
                edges.push((u, v));
            }
        }
        assert!(!has_k5_minor(&Graph::new(6, edges).unwrap()));
    }

    #[test]
    fn v8_is_k5_free() {
        let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        edges.extend((0..4).map(|i| (i, i + 4)));
        assert!(!has_k5_minor(&Graph::new(8, edges).unwrap()));
    }

    #[test]
    fn k5_subdivision_detected() {
        let mut edges = Vec::new();
        let mut next = 5;
        for u in 0..5usize {
            for v in (u + 1)..5 {
                edges.push((u, next));
                edges.push((next, v));
                next += 1;
            }
        }
        assert!(has_k5_minor(&Graph::new(next, edges).unwrap()));
    }

    #[test]
    fn petersen_has_k5_minor() {
        let outer: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<(usize, usize)> = (0..5).map(|i| (i + 5, (i + 2) % 5 + 5)).collect();
        let g = Graph::new(10, [outer, spokes, inner].concat()).unwrap();
        assert!(has_k5_minor(&g));
    }

    #[test]
    fn mobius_ladder_v10_has_k5_minor() {
        // consecutive pairs of the outer cycle form the five branch sets
        let mut edges: Vec<(usize, usize)> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        edges.extend((0..5).map(|i| (i, i + 5)));
        assert!(has_k5_minor(&Graph::new(10, edges).unwrap()));
    }
}
