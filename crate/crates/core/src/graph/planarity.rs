//! Left-right planarity test with embedding extraction.
//!
//! This is the de Fraysseix–Ossona de Mendez–Rosenstiehl criterion in the
//! formulation of Brandes, the same algorithm NetworkX and rustworkx use:
//! a first DFS orients the graph and computes low-points and nesting depths,
//! a second DFS checks the left-right constraint system on a stack of
//! conflict pairs, and a third DFS turns the computed edge sides into a
//! rotation system.

use super::{Graph, PlanarEmbedding};

/// Tests planarity. Returns a combinatorial embedding when `g` is planar,
/// `None` otherwise.
pub fn planarity_test(g: &Graph) -> Option<PlanarEmbedding> {
    let n = g.vertex_count();
    if n >= 3 && g.edge_count() > 3 * n - 6 {
        return None;
    }
    if g.edge_count() == 0 {
        return Some(PlanarEmbedding::from_rotation(vec![Vec::new(); n]));
    }
    LrState::new(g).run()
}

type EdgeId = usize;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
struct Interval {
    high: Option<EdgeId>,
    low: Option<EdgeId>,
}

impl Interval {
    const EMPTY: Interval = Interval { high: None, low: None };

    fn empty(&self) -> bool {
        self.high.is_none() && self.low.is_none()
    }
}

#[derive(Clone, Copy)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct LrState<'a> {
    g: &'a Graph,
    /// dfs-oriented edges as (from, to)
    edge: Vec<(usize, usize)>,
    /// undirected edge index -> oriented EdgeId (or NONE while unvisited)
    oriented: Vec<usize>,
    /// outgoing oriented edges per vertex, in dfs1 discovery order
    out_edges: Vec<Vec<EdgeId>>,
    height: Vec<usize>,
    parent_edge: Vec<Option<EdgeId>>,
    roots: Vec<usize>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<i64>,
    // testing phase
    ordered: Vec<Vec<EdgeId>>,
    stack: Vec<ConflictPair>,
    stack_bottom: Vec<usize>,
    lowpt_edge: Vec<Option<EdgeId>>,
    reference: Vec<Option<EdgeId>>,
    side: Vec<i8>,
}

impl<'a> LrState<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.vertex_count();
        LrState {
            g,
            edge: Vec::with_capacity(g.edge_count()),
            oriented: vec![NONE; g.edge_count()],
            out_edges: vec![Vec::new(); n],
            height: vec![NONE; n],
            parent_edge: vec![None; n],
            roots: Vec::new(),
            lowpt: Vec::new(),
            lowpt2: Vec::new(),
            nesting_depth: Vec::new(),
            ordered: vec![Vec::new(); n],
            stack: Vec::new(),
            stack_bottom: Vec::new(),
            lowpt_edge: Vec::new(),
            reference: Vec::new(),
            side: Vec::new(),
        }
    }

    fn run(mut self) -> Option<PlanarEmbedding> {
        for v in 0..self.g.vertex_count() {
            if self.height[v] == NONE {
                self.height[v] = 0;
                self.roots.push(v);
                self.dfs_orientation(v);
            }
        }
        let m = self.edge.len();
        self.stack_bottom = vec![0; m];
        self.lowpt_edge = vec![None; m];
        self.reference = vec![None; m];
        self.side = vec![1; m];

        for v in 0..self.g.vertex_count() {
            let mut adj = self.out_edges[v].clone();
            adj.sort_by_key(|&e| self.nesting_depth[e]);
            self.ordered[v] = adj;
        }
        for i in 0..self.roots.len() {
            if !self.dfs_testing(self.roots[i]) {
                return None;
            }
        }
        for e in 0..m {
            self.nesting_depth[e] *= self.sign(e) as i64;
        }
        for v in 0..self.g.vertex_count() {
            let mut adj = self.out_edges[v].clone();
            adj.sort_by_key(|&e| self.nesting_depth[e]);
            self.ordered[v] = adj;
        }
        Some(self.dfs_embedding())
    }

    /// Phase 1: orient the graph, computing heights, low-points and nesting
    /// depths. Iterative DFS; tree-edge post-processing runs when the child
    /// frame completes.
    fn dfs_orientation(&mut self, root: usize) {
        // frame: (v, neighbor cursor, pending edge id for post-processing)
        let mut frames: Vec<(usize, usize, Option<EdgeId>)> = vec![(root, 0, None)];
        while let Some(&mut (v, ref mut cursor, ref mut pending)) = frames.last_mut() {
            if let Some(ei) = pending.take() {
                self.finish_edge(v, ei);
            }
            if *cursor >= self.g.degree(v) {
                frames.pop();
                continue;
            }
            let w = self.g.neighbors(v)[*cursor];
            *cursor += 1;
            let uidx = self.g.edge_index(v, w).expect("neighbor implies edge");
            if self.oriented[uidx] != NONE {
                continue;
            }
            let ei = self.edge.len();
            self.edge.push((v, w));
            self.oriented[uidx] = ei;
            self.out_edges[v].push(ei);
            self.lowpt.push(self.height[v]);
            self.lowpt2.push(self.height[v]);
            self.nesting_depth.push(0);
            if self.height[w] == NONE {
                // tree edge: descend, finish later
                self.parent_edge[w] = Some(ei);
                self.height[w] = self.height[v] + 1;
                *pending = Some(ei);
                frames.push((w, 0, None));
            } else {
                // back edge
                self.lowpt[ei] = self.height[w];
                self.finish_edge(v, ei);
            }
        }
    }

    /// Nesting-depth computation and parent low-point update for edge `ei`
    /// out of `v`, run once `ei`'s subtree (if any) is complete.
    fn finish_edge(&mut self, v: usize, ei: EdgeId) {
        self.nesting_depth[ei] = 2 * self.lowpt[ei] as i64;
        if self.lowpt2[ei] < self.height[v] {
            self.nesting_depth[ei] += 1; // chordal
        }
        if let Some(e) = self.parent_edge[v] {
            if self.lowpt[ei] < self.lowpt[e] {
                self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[ei]);
                self.lowpt[e] = self.lowpt[ei];
            } else if self.lowpt[ei] > self.lowpt[e] {
                self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[ei]);
            } else {
                self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[ei]);
            }
        }
    }

    /// Phase 2: the left-right constraint check.
    fn dfs_testing(&mut self, root: usize) -> bool {
        // frame: (v, cursor, in_post_child)
        let mut frames: Vec<(usize, usize, bool)> = vec![(root, 0, false)];
        while let Some(&mut (v, ref mut cursor, ref mut post)) = frames.last_mut() {
            if *cursor >= self.ordered[v].len() {
                frames.pop();
                if let Some(e) = self.parent_edge[v] {
                    self.remove_back_edges(e);
                }
                continue;
            }
            let i = *cursor;
            let ei = self.ordered[v][i];
            let w = self.edge[ei].1;
            if !*post {
                self.stack_bottom[ei] = self.stack.len();
                if Some(ei) == self.parent_edge[w] {
                    // tree edge: descend, resume at post-processing
                    *post = true;
                    frames.push((w, 0, false));
                    continue;
                }
                self.lowpt_edge[ei] = Some(ei);
                self.stack.push(ConflictPair {
                    left: Interval::EMPTY,
                    right: Interval {
                        high: Some(ei),
                        low: Some(ei),
                    },
                });
            }
            *post = false;
            *cursor += 1;
            if self.lowpt[ei] < self.height[v] {
                // ei has a return edge below v
                let e = self.parent_edge[v].expect("return edge implies non-root");
                if i == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        true
    }

    fn conflicting(&self, i: &Interval, b: EdgeId) -> bool {
        match i.high {
            Some(h) => self.lowpt[h] > self.lowpt[b],
            None => false,
        }
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        match (p.left.low, p.right.low) {
            (None, Some(r)) => self.lowpt[r],
            (Some(l), None) => self.lowpt[l],
            (Some(l), Some(r)) => self.lowpt[l].min(self.lowpt[r]),
            (None, None) => unreachable!("empty conflict pair on stack"),
        }
    }

    fn add_constraints(&mut self, ei: EdgeId, e: EdgeId) -> bool {
        let mut p = ConflictPair {
            left: Interval::EMPTY,
            right: Interval::EMPTY,
        };
        // merge return edges of ei into p.right
        loop {
            let mut q = self.stack.pop().expect("stack bottom marker guards this pop");
            if !q.left.empty() {
                q.swap();
            }
            if !q.left.empty() {
                return false; // not planar
            }
            let q_low = q.right.low.expect("nonempty interval has low");
            if self.lowpt[q_low] > self.lowpt[e] {
                // merge intervals
                match p.right.low {
                    None => p.right.high = q.right.high,
                    Some(pl) => self.reference[pl] = q.right.high,
                }
                p.right.low = q.right.low;
            } else {
                // align
                self.reference[q_low] = self.lowpt_edge[e];
            }
            if self.stack.len() == self.stack_bottom[ei] {
                break;
            }
        }
        // merge conflicting return edges of earlier siblings into p.left
        loop {
            let Some(top) = self.stack.last() else { break };
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().unwrap();
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false; // not planar
            }
            // merge interval below lowpt(ei) into p.right
            if let Some(pl) = p.right.low {
                self.reference[pl] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            match p.left.low {
                None => p.left.high = q.left.high,
                Some(pl) => self.reference[pl] = q.left.high,
            }
            p.left.low = q.left.low;
        }
        if !(p.left.empty() && p.right.empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, e: EdgeId) {
        let u = self.edge[e].0;
        // drop entire conflict pairs returning exactly to u
        while let Some(top) = self.stack.last() {
            if self.lowest(top) != self.height[u] {
                break;
            }
            let p = self.stack.pop().unwrap();
            if let Some(l) = p.left.low {
                self.side[l] = -1;
            }
        }
        // trim the next conflict pair
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high {
                if self.edge[h].1 == u {
                    p.left.high = self.reference[h];
                } else {
                    break;
                }
            }
            if p.left.high.is_none() {
                if let Some(l) = p.left.low {
                    self.reference[l] = p.right.low;
                    self.side[l] = -1;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high {
                if self.edge[h].1 == u {
                    p.right.high = self.reference[h];
                } else {
                    break;
                }
            }
            if p.right.high.is_none() {
                if let Some(l) = p.right.low {
                    self.reference[l] = p.left.low;
                    self.side[l] = -1;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        // the side of e is the side of a highest return edge
        if self.lowpt[e] < self.height[u] {
            let top = self.stack.last().expect("return edge implies nonempty stack");
            let hl = top.left.high;
            let hr = top.right.high;
            let chosen = match (hl, hr) {
                (Some(l), Some(r)) => {
                    if self.lowpt[l] > self.lowpt[r] {
                        Some(l)
                    } else {
                        Some(r)
                    }
                }
                (Some(l), None) => Some(l),
                (None, r) => r,
            };
            self.reference[e] = chosen;
        }
    }

    /// Resolves the side of `e` by following (and collapsing) the reference
    /// chain.
    fn sign(&mut self, e: EdgeId) -> i8 {
        let mut chain = vec![e];
        while let Some(r) = self.reference[*chain.last().unwrap()] {
            chain.push(r);
        }
        let mut s = 1i8;
        for &x in chain.iter().rev() {
            s = self.side[x] * s;
            self.side[x] = s;
            self.reference[x] = None;
        }
        s
    }

    /// Phase 3: build the rotation system.
    fn dfs_embedding(self) -> PlanarEmbedding {
        let n = self.g.vertex_count();
        // outgoing half-edges first, in nesting order
        let mut rotation: Vec<Vec<usize>> = (0..n)
            .map(|v| self.ordered[v].iter().map(|&e| self.edge[e].1).collect())
            .collect();
        let mut left_ref = vec![NONE; n];
        let mut right_ref = vec![NONE; n];

        for r in 0..self.roots.len() {
            let root = self.roots[r];
            let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
            while let Some(&mut (v, ref mut cursor)) = frames.last_mut() {
                if *cursor >= self.ordered[v].len() {
                    frames.pop();
                    continue;
                }
                let ei = self.ordered[v][*cursor];
                *cursor += 1;
                let w = self.edge[ei].1;
                if Some(ei) == self.parent_edge[w] {
                    // tree edge: v becomes first in w's rotation
                    rotation[w].insert(0, v);
                    left_ref[v] = w;
                    right_ref[v] = w;
                    frames.push((w, 0));
                } else if self.side[ei] == 1 {
                    // place v clockwise-after right_ref[w]
                    let pos = rotation[w]
                        .iter()
                        .position(|&x| x == right_ref[w])
                        .expect("right reference present");
                    rotation[w].insert(pos + 1, v);
                } else {
                    // place v counterclockwise of left_ref[w]
                    let pos = rotation[w]
                        .iter()
                        .position(|&x| x == left_ref[w])
                        .expect("left reference present");
                    rotation[w].insert(pos, v);
                    left_ref[w] = v;
                }
            }
        }
        let emb = PlanarEmbedding::from_rotation(rotation);
        debug_assert!(emb.validate(self.g).is_ok(), "embedding failed validation");
        emb
    }
}
