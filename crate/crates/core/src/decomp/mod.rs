//! Tree decompositions of Ising models into planar and small components
//! glued along attachment sets of at most three vertices, with exact
//! inference, sampling and edge marginals by dynamic programming over the
//! tree.

mod infer;
mod marginals;
mod sample;

pub use infer::{infer_log_z, DpCache};
pub(crate) use infer::infer_log_z_trusted;
pub use marginals::{edge_marginals, edge_marginals_robust};
pub use sample::sample;

use crate::graph::{planarity_test, Graph};
use crate::ising::{ModelError, ENUMERATION_LIMIT};
use crate::planar::PlanarError;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecompError {
    #[error("invalid decomposition:\n{0}")]
    Invalid(ValidationReport),
    #[error("model has a nonzero field; the decomposition engine requires zero field")]
    NotZeroField,
    #[error("model graph does not match the decomposition's host graph")]
    ModelMismatch,
    #[error("component limit c={0} exceeds the enumeration limit {ENUMERATION_LIMIT}")]
    LimitTooLarge(usize),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One node of a decomposition tree: a subgraph of the host graph given by
/// its vertex set and the host edges it owns.
#[derive(Debug, Clone)]
pub struct DecompNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// host vertex ids, sorted
    pub vertices: Vec<usize>,
    /// owned host edges, normalized and sorted
    pub edges: Vec<(usize, usize)>,
}

/// A rooted tree of subgraphs. Validity (the four structural properties plus
/// unique edge ownership) is checked by [`DecompositionTree::validate`], not
/// enforced by construction.
#[derive(Debug, Clone)]
pub struct DecompositionTree {
    pub c: usize,
    pub root: usize,
    pub nodes: Vec<DecompNode>,
    index_of: HashMap<usize, usize>,
}

impl DecompositionTree {
    pub fn new(c: usize, root: usize, mut nodes: Vec<DecompNode>) -> Self {
        for n in nodes.iter_mut() {
            n.vertices.sort_unstable();
            n.vertices.dedup();
            for e in n.edges.iter_mut() {
                *e = (e.0.min(e.1), e.0.max(e.1));
            }
            n.edges.sort_unstable();
            n.edges.dedup();
        }
        let index_of = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        DecompositionTree { c, root, nodes, index_of }
    }

    pub fn node(&self, id: usize) -> Option<&DecompNode> {
        self.index_of.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn children_of(&self, id: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| n.parent == Some(id))
            .map(|n| n.id)
            .collect();
        out.sort_unstable();
        out
    }

    /// Navel of a node: its vertex overlap with its parent. Empty for the
    /// root.
    pub fn navel(&self, id: usize) -> Vec<usize> {
        let Some(node) = self.node(id) else {
            return Vec::new();
        };
        let Some(p) = node.parent.and_then(|p| self.node(p)) else {
            return Vec::new();
        };
        intersect_sorted(&node.vertices, &p.vertices)
    }

    /// Nodes in a children-before-parents order (post-order).
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        let mut seen = HashSet::new();
        while let Some((id, processed)) = stack.pop() {
            if processed {
                order.push(id);
                continue;
            }
            if !seen.insert(id) {
                continue;
            }
            stack.push((id, true));
            for ch in self.children_of(id) {
                stack.push((ch, false));
            }
        }
        order
    }

    /// The same node set re-rooted at `new_root`; tree edges are preserved,
    /// parent directions flip along the way.
    pub fn rerooted(&self, new_root: usize) -> DecompositionTree {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for n in &self.nodes {
            if let Some(p) = n.parent {
                adj.entry(n.id).or_default().push(p);
                adj.entry(p).or_default().push(n.id);
            }
        }
        let mut parent: HashMap<usize, Option<usize>> = HashMap::new();
        parent.insert(new_root, None);
        let mut queue = std::collections::VecDeque::from([new_root]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).into_iter().flatten() {
                if !parent.contains_key(&w) {
                    parent.insert(w, Some(v));
                    queue.push_back(w);
                }
            }
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| DecompNode {
                id: n.id,
                parent: parent.get(&n.id).copied().flatten(),
                vertices: n.vertices.clone(),
                edges: n.edges.clone(),
            })
            .collect();
        DecompositionTree::new(self.c, new_root, nodes)
    }

    /// Reassigns host edges repeated across nodes to the deepest owner
    /// (ties: smallest node id), so ownership becomes unique.
    pub fn normalize_edge_ownership(&mut self) {
        let mut depth: HashMap<usize, usize> = HashMap::new();
        for &id in &self.post_order() {
            // post_order gives children first; compute depth by walking up
            let mut d = 0;
            let mut cur = self.node(id).and_then(|n| n.parent);
            while let Some(p) = cur {
                d += 1;
                cur = self.node(p).and_then(|n| n.parent);
            }
            depth.insert(id, d);
        }
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for n in &self.nodes {
            for &e in &n.edges {
                let better = match owner.get(&e) {
                    None => true,
                    Some(&cur) => {
                        (depth[&n.id], std::cmp::Reverse(n.id))
                            > (depth[&cur], std::cmp::Reverse(cur))
                    }
                };
                if better {
                    owner.insert(e, n.id);
                }
            }
        }
        for n in self.nodes.iter_mut() {
            n.edges.retain(|e| owner[e] == n.id);
        }
    }

    /// Checks the structural properties against the host graph `g`:
    ///
    /// 1. for every node, the subtree and the rest of the tree overlap in
    ///    exactly the node's navel;
    /// 2. every attachment set has at most three vertices;
    /// 3. every node is planar or has at most `c` vertices;
    /// 4. for nodes above `c` vertices, adding all missing edges inside
    ///    attachment sets keeps the node planar;
    ///
    /// plus: the node subgraphs cover `g` exactly and every host edge is
    /// owned by exactly one node.
    pub fn validate(&self, g: &Graph) -> ValidationReport {
        let mut v = Vec::new();
        self.check_structure(g, &mut v);
        if v.is_empty() {
            self.check_properties(g, &mut v);
        }
        ValidationReport { violations: v }
    }

    fn check_structure(&self, g: &Graph, out: &mut Vec<String>) {
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                out.push(format!("duplicate node id {}", n.id));
            }
        }
        if self.node(self.root).is_none() {
            out.push(format!("root {} is not a node", self.root));
            return;
        }
        if self.node(self.root).unwrap().parent.is_some() {
            out.push(format!("root {} has a parent", self.root));
        }
        for n in &self.nodes {
            if let Some(p) = n.parent {
                if self.node(p).is_none() {
                    out.push(format!("node {}: parent {} does not exist", n.id, p));
                }
            } else if n.id != self.root {
                out.push(format!("node {} has no parent but is not the root", n.id));
            }
            for &v in &n.vertices {
                if v >= g.vertex_count() {
                    out.push(format!("node {}: vertex {} outside host graph", n.id, v));
                }
            }
            for &(a, b) in &n.edges {
                if !n.vertices.contains(&a) || !n.vertices.contains(&b) {
                    out.push(format!(
                        "node {}: edge ({a}, {b}) has an endpoint outside the node",
                        n.id
                    ));
                }
                if !g.has_edge(a, b) {
                    out.push(format!("node {}: edge ({a}, {b}) is not a host edge", n.id));
                }
            }
        }
        if !out.is_empty() {
            return;
        }
        // reachability from the root
        let reachable: HashSet<usize> = self.post_order().into_iter().collect();
        for n in &self.nodes {
            if !reachable.contains(&n.id) {
                out.push(format!("node {} is not reachable from the root", n.id));
            }
        }
    }

    fn check_properties(&self, g: &Graph, out: &mut Vec<String>) {
        // subtree vertex sets
        let mut subtree: HashMap<usize, HashSet<usize>> = HashMap::new();
        for &id in &self.post_order() {
            let mut s: HashSet<usize> = self.node(id).unwrap().vertices.iter().copied().collect();
            for ch in self.children_of(id) {
                s.extend(subtree[&ch].iter().copied());
            }
            subtree.insert(id, s);
        }
        // P1: subtree/outside overlap equals the navel
        for n in &self.nodes {
            if n.id == self.root {
                continue;
            }
            let inside = &subtree[&n.id];
            let mut outside: HashSet<usize> = HashSet::new();
            // nodes not in the subtree of n
            let subtree_nodes: HashSet<usize> = {
                let mut s = HashSet::new();
                let mut stack = vec![n.id];
                while let Some(x) = stack.pop() {
                    if s.insert(x) {
                        stack.extend(self.children_of(x));
                    }
                }
                s
            };
            for m in &self.nodes {
                if !subtree_nodes.contains(&m.id) {
                    outside.extend(m.vertices.iter().copied());
                }
            }
            let navel: HashSet<usize> = self.navel(n.id).into_iter().collect();
            let boundary: HashSet<usize> = inside.intersection(&outside).copied().collect();
            if boundary != navel {
                let mut b: Vec<_> = boundary.into_iter().collect();
                b.sort_unstable();
                let mut k: Vec<_> = navel.into_iter().collect();
                k.sort_unstable();
                out.push(format!(
                    "node {}: subtree boundary {b:?} differs from navel {k:?}",
                    n.id
                ));
            }
        }
        // P2: attachment sets of size <= 3
        for n in &self.nodes {
            if let Some(p) = n.parent {
                let k = self.navel(n.id);
                if k.len() > 3 {
                    out.push(format!(
                        "attachment set between {} and {} has {} vertices",
                        n.id,
                        p,
                        k.len()
                    ));
                }
            }
        }
        // P3/P4
        for n in &self.nodes {
            let (sub, back) = self.node_subgraph(n, g);
            if n.vertices.len() > self.c {
                if planarity_test(&sub).is_none() {
                    out.push(format!(
                        "node {}: {} vertices (> c={}) and not planar",
                        n.id,
                        n.vertices.len(),
                        self.c
                    ));
                    continue;
                }
                let augmented = self.augment_with_attachments(n, &sub, &back);
                if planarity_test(&augmented).is_none() {
                    out.push(format!(
                        "node {}: adding attachment-set edges destroys planarity",
                        n.id
                    ));
                }
            }
        }
        // coverage and unique ownership
        let mut seen_vertices = vec![false; g.vertex_count()];
        let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for n in &self.nodes {
            for &v in &n.vertices {
                seen_vertices[v] = true;
            }
            for &e in &n.edges {
                owners.entry(e).or_default().push(n.id);
            }
        }
        for (v, seen) in seen_vertices.iter().enumerate() {
            if !seen {
                out.push(format!("host vertex {v} not covered by any node"));
            }
        }
        for &e in g.edges() {
            match owners.get(&e).map(|o| o.len()).unwrap_or(0) {
                0 => out.push(format!("host edge {e:?} not owned by any node")),
                1 => {}
                _ => out.push(format!(
                    "host edge {e:?} owned by multiple nodes {:?}",
                    owners[&e]
                )),
            }
        }
    }

    /// Local subgraph of a node, with the back map to host ids.
    pub(crate) fn node_subgraph(&self, n: &DecompNode, _g: &Graph) -> (Graph, Vec<usize>) {
        let back = n.vertices.clone();
        let local = |v: usize| back.binary_search(&v).expect("vertex in node");
        let edges: Vec<(usize, usize)> = n.edges.iter().map(|&(a, b)| (local(a), local(b))).collect();
        (
            Graph::new(back.len(), edges).expect("node subgraph is simple"),
            back,
        )
    }

    /// All attachment sets of a node (with its parent and all children), as
    /// local vertex sets.
    pub(crate) fn attachment_sets_local(&self, n: &DecompNode, back: &[usize]) -> Vec<Vec<usize>> {
        let mut sets = Vec::new();
        let mut push = |hosts: Vec<usize>| {
            let local: Vec<usize> = hosts
                .iter()
                .map(|v| back.binary_search(v).expect("attachment vertex in node"))
                .collect();
            if local.len() >= 2 {
                sets.push(local);
            }
        };
        if n.parent.is_some() {
            push(self.navel(n.id));
        }
        for ch in self.children_of(n.id) {
            push(self.navel(ch));
        }
        sets
    }

    fn augment_with_attachments(&self, n: &DecompNode, sub: &Graph, back: &[usize]) -> Graph {
        let mut edges: Vec<(usize, usize)> = sub.edges().to_vec();
        for set in self.attachment_sets_local(n, back) {
            for i in 0..set.len() {
                for j in (i + 1)..set.len() {
                    let e = (set[i].min(set[j]), set[i].max(set[j]));
                    edges.push(e);
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Graph::new(sub.vertex_count(), edges).expect("augmentation is simple")
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Outcome of validation: empty means valid.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// On-disk format:
/// `{"c": int, "root": int, "nodes": [{"id": int, "parent": int|null,
///   "vertices": [int...], "edges": [[u, v]...]}]}`
/// with vertex ids referring to the host graph.
#[derive(Serialize, Deserialize)]
struct TreeJson {
    c: usize,
    root: usize,
    nodes: Vec<NodeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    parent: Option<usize>,
    vertices: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl DecompositionTree {
    pub fn to_json(&self) -> String {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeJson {
                id: n.id,
                parent: n.parent,
                vertices: n.vertices.clone(),
                edges: n.edges.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&TreeJson {
            c: self.c,
            root: self.root,
            nodes,
        })
        .expect("tree serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let raw: TreeJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let nodes = raw
            .nodes
            .into_iter()
            .map(|n| DecompNode {
                id: n.id,
                parent: n.parent,
                vertices: n.vertices,
                edges: n.edges,
            })
            .collect();
        Ok(DecompositionTree::new(raw.c, raw.root, nodes))
    }

    /// The trivial decomposition: one node holding the whole graph.
    pub fn single_node(g: &Graph, c: usize) -> Self {
        DecompositionTree::new(
            c,
            0,
            vec![DecompNode {
                id: 0,
                parent: None,
                vertices: (0..g.vertex_count()).collect(),
                edges: g.edges().to_vec(),
            }],
        )
    }
}
