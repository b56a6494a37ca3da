//! Leaf-to-root dynamic programming for the conditional partition functions
//! of a decomposed model.
//!
//! At each node the children's conditional partition tables are folded into
//! the node's interactions: a child glued over one vertex contributes a
//! constant, one glued over two vertices contributes `exp(A + B y_u y_q)`,
//! one glued over three contributes `exp(A + B y_u y_q + C y_u y_h + D y_q y_h)`
//! — the coefficients solve a ±1 linear system whose right-hand side is the
//! child's table. What remains at the node is a conditional partition
//! function of a zero-field model over the node's subgraph with adjusted
//! interactions, evaluated by brute force (small nodes) or the planar
//! engine.

use super::{DecompError, DecompositionTree};
use crate::graph::Graph;
use crate::ising::{for_each_consistent, Condition, IsingModel, ENUMERATION_LIMIT};
use crate::planar::conditioned_log_z;
use std::collections::HashMap;

/// The node-local model the DP conditions on: the node's subgraph plus every
/// missing intra-attachment-set edge (zero base interaction), so navels are
/// always connected and child coefficient edges always exist.
#[derive(Debug, Clone)]
pub(crate) struct ComponentModel {
    pub graph: Graph,
    /// local vertex id -> host vertex id (sorted)
    pub back: Vec<usize>,
    /// owned interactions on the scaffold (0 on added edges)
    pub base_j: Vec<f64>,
    /// base plus child B/C/D contributions; what conditioning uses
    pub aug_j: Vec<f64>,
    /// local ids of the node's navel, sorted by host id
    pub navel_local: Vec<usize>,
}

impl ComponentModel {
    pub fn local_of(&self, host: usize) -> usize {
        self.back.binary_search(&host).expect("host vertex in node")
    }

    pub fn model(&self, weights: &[f64]) -> IsingModel {
        IsingModel::zero_field(self.graph.clone(), weights.to_vec()).expect("consistent shape")
    }
}

/// Per-node results of the upward pass.
#[derive(Debug)]
pub(crate) struct NodeData {
    /// navel in host ids, sorted
    pub navel_host: Vec<usize>,
    pub component: ComponentModel,
    /// children aligned with `DecompositionTree::children_of`
    pub child_contrib: Vec<ChildContrib>,
    /// constant factor: -|I1| log2 + Σ_{I0∪I1} log Z^{≤c_i} + Σ_{I2∪I3} A_i
    pub log_m: f64,
    /// log Z^{≤t}_{|S} for all 2^{|K|} sign patterns of the navel; pattern
    /// bit i set means navel[i] = +1
    pub subtree_log_z: Vec<f64>,
}

#[derive(Debug)]
pub(crate) struct ChildContrib {
    pub child: usize,
    /// additive constant folded into log_m
    pub constant: f64,
    /// (scaffold edge index, added interaction)
    pub quad: Vec<(usize, f64)>,
}

/// Upward-pass cache: everything sampling and marginal passes need.
#[derive(Debug)]
pub struct DpCache {
    pub(crate) data: HashMap<usize, NodeData>,
    pub(crate) log_z: f64,
}

impl DpCache {
    pub fn log_z(&self) -> f64 {
        self.log_z
    }
}

/// Exact `log Z` of a zero-field model with a valid decomposition, plus the
/// per-node cache for sampling and marginals.
pub fn infer_log_z(tree: &DecompositionTree, m: &IsingModel) -> Result<DpCache, DecompError> {
    let report = tree.validate(m.graph());
    if !report.is_valid() {
        return Err(DecompError::Invalid(report));
    }
    infer_log_z_trusted(tree, m)
}

/// As [`infer_log_z`] but without re-validating the tree; for callers that
/// evaluate many interaction vectors over one fixed decomposition.
pub(crate) fn infer_log_z_trusted(
    tree: &DecompositionTree,
    m: &IsingModel,
) -> Result<DpCache, DecompError> {
    if !m.is_zero_field() {
        return Err(DecompError::NotZeroField);
    }
    if tree.c > ENUMERATION_LIMIT {
        return Err(DecompError::LimitTooLarge(tree.c));
    }
    let mut cache: HashMap<usize, NodeData> = HashMap::new();
    for id in tree.post_order() {
        let data = process_node(tree, m, id, &cache)?;
        cache.insert(id, data);
    }
    let log_z = cache[&tree.root].subtree_log_z[0];
    Ok(DpCache { data: cache, log_z })
}

fn process_node(
    tree: &DecompositionTree,
    m: &IsingModel,
    id: usize,
    cache: &HashMap<usize, NodeData>,
) -> Result<NodeData, DecompError> {
    let navel_host = tree.navel(id);
    let component = build_component(tree, m, id);
    let children = tree.children_of(id);

    let mut log_m = 0.0;
    let mut aug_j = component.base_j.clone();
    let mut child_contrib = Vec::with_capacity(children.len());
    for ch in children {
        let child_navel = tree.navel(ch);
        let table = &cache[&ch].subtree_log_z;
        let contrib = solve_child(&component, &child_navel, table, ch);
        log_m += contrib.constant;
        for &(e, w) in &contrib.quad {
            aug_j[e] += w;
        }
        child_contrib.push(contrib);
    }

    let component = ComponentModel { aug_j, ..component };
    let k = navel_host.len();
    let tables = component_pattern_tables(
        &component,
        &component.aug_j,
        &component.navel_local.clone(),
        tree.c,
    )?;
    let mut subtree_log_z = Vec::with_capacity(1 << k);
    for bits in 0..(1usize << k) {
        subtree_log_z.push(log_m + tables[bits]);
    }
    // zero-field consistency: Z_{|S} = Z_{|-S}
    for bits in 0..(1usize << k) {
        let neg = !bits & ((1 << k) - 1);
        let (a, b) = (subtree_log_z[bits], subtree_log_z[neg]);
        debug_assert!(
            (a - b).abs() <= 1e-7 * a.abs().max(1.0),
            "zero-field symmetry violated at node {id}: {a} vs {b}"
        );
    }
    Ok(NodeData {
        navel_host,
        component,
        child_contrib,
        log_m,
        subtree_log_z,
    })
}

/// Scaffold for a node: its subgraph plus all missing intra-attachment-set
/// edges at zero interaction.
fn build_component(tree: &DecompositionTree, m: &IsingModel, id: usize) -> ComponentModel {
    let node = tree.node(id).expect("node exists");
    let (sub, back) = tree.node_subgraph(node, m.graph());
    let mut edges: Vec<(usize, usize)> = sub.edges().to_vec();
    for set in tree.attachment_sets_local(node, &back) {
        for i in 0..set.len() {
            for j in (i + 1)..set.len() {
                edges.push((set[i].min(set[j]), set[i].max(set[j])));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let graph = Graph::new(back.len(), edges).expect("scaffold is simple");
    let mut base_j = vec![0.0; graph.edge_count()];
    for &(a, b) in &node.edges {
        let la = back.binary_search(&a).unwrap();
        let lb = back.binary_search(&b).unwrap();
        let idx = graph.edge_index(la, lb).expect("owned edge in scaffold");
        base_j[idx] = m.interaction(a, b).expect("owned edge in host");
    }
    let navel_local = tree
        .navel(id)
        .iter()
        .map(|&v| back.binary_search(&v).expect("navel vertex in node"))
        .collect();
    ComponentModel {
        graph,
        back,
        base_j,
        aug_j: Vec::new(),
        navel_local,
    }
}

/// Folds a child's conditional table into a constant plus interaction
/// additions on the child's navel edges inside the parent component.
fn solve_child(
    component: &ComponentModel,
    child_navel_host: &[usize],
    table: &[f64],
    child: usize,
) -> ChildContrib {
    // symmetrize over the global spin flip before solving
    let k = child_navel_host.len();
    let sym = |bits: usize| {
        let neg = !bits & ((1 << k) - 1);
        0.5 * (table[bits] + table[neg])
    };
    match k {
        0 => ChildContrib {
            child,
            constant: table[0],
            quad: Vec::new(),
        },
        1 => ChildContrib {
            child,
            // Z^{≤c}_{|±} = Z^{≤c}/2, a constant factor
            constant: sym(0),
            quad: Vec::new(),
        },
        2 => {
            let (u, q) = (child_navel_host[0], child_navel_host[1]);
            let l_pp = sym(0b11);
            let l_pm = sym(0b01); // u = +1, q = -1
            let a = 0.5 * (l_pp + l_pm);
            let b = 0.5 * (l_pp - l_pm);
            let e = edge_in(component, u, q);
            ChildContrib {
                child,
                constant: a,
                quad: vec![(e, b)],
            }
        }
        3 => {
            let (u, q, h) = (
                child_navel_host[0],
                child_navel_host[1],
                child_navel_host[2],
            );
            // bit order: bit0 <-> u, bit1 <-> q, bit2 <-> h
            let l1 = sym(0b111); // (+,+,+)
            let l2 = sym(0b011); // (+,+,-)
            let l3 = sym(0b101); // (+,-,+)
            let l4 = sym(0b001); // (+,-,-)
            let a = 0.25 * (l1 + l2 + l3 + l4);
            let b = 0.25 * (l1 + l2 - l3 - l4);
            let c = 0.25 * (l1 - l2 + l3 - l4);
            let d = 0.25 * (l1 - l2 - l3 + l4);
            ChildContrib {
                child,
                constant: a,
                quad: vec![
                    (edge_in(component, u, q), b),
                    (edge_in(component, u, h), c),
                    (edge_in(component, q, h), d),
                ],
            }
        }
        _ => unreachable!("attachment sets are validated to size <= 3"),
    }
}

fn edge_in(component: &ComponentModel, host_a: usize, host_b: usize) -> usize {
    let a = component.local_of(host_a);
    let b = component.local_of(host_b);
    component
        .graph
        .edge_index(a, b)
        .expect("attachment edge present in scaffold")
}

pub(crate) fn navel_condition(navel_local: &[usize], bits: usize) -> Condition {
    Condition::new(
        navel_local
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, if bits >> i & 1 == 1 { 1 } else { -1 })),
    )
    .expect("navel vertices distinct")
}

/// `log Z` of the component conditioned on every sign pattern of
/// `pattern_vertices` (local ids, bit `i` set means vertex `i` is `+1`).
/// Small components do all patterns in a single enumeration.
pub(crate) fn component_pattern_tables(
    component: &ComponentModel,
    weights: &[f64],
    pattern_vertices: &[usize],
    c: usize,
) -> Result<Vec<f64>, DecompError> {
    let k = pattern_vertices.len();
    let model = component.model(weights);
    if component.graph.vertex_count() <= c {
        let mut max = vec![f64::NEG_INFINITY; 1 << k];
        let pattern_of = |x: &[i8]| -> usize {
            let mut bits = 0usize;
            for (i, &v) in pattern_vertices.iter().enumerate() {
                if x[v] == 1 {
                    bits |= 1 << i;
                }
            }
            bits
        };
        for_each_consistent(&model, &Condition::empty(), |x, lw| {
            let p = pattern_of(x);
            if lw > max[p] {
                max[p] = lw;
            }
        })?;
        let mut sum = vec![0.0f64; 1 << k];
        for_each_consistent(&model, &Condition::empty(), |x, lw| {
            let p = pattern_of(x);
            sum[p] += (lw - max[p]).exp();
        })?;
        Ok(max
            .iter()
            .zip(&sum)
            .map(|(&m, &s)| if s == 0.0 { f64::NEG_INFINITY } else { m + s.ln() })
            .collect())
    } else {
        let mut out = Vec::with_capacity(1 << k);
        for bits in 0..(1usize << k) {
            let cond = navel_condition(pattern_vertices, bits);
            out.push(conditioned_log_z(&model, &cond)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::DecompNode;
    use crate::ising::brute_force_log_z;

    fn close_rel(a: f64, b: f64, rel: f64) {
        assert!(
            (a - b).abs() <= rel * b.abs().max(1.0),
            "{a} vs {b} (rel {rel})"
        );
    }

    #[test]
    fn glued_triangles_navel_one() {
        let g = Graph::new(5, vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
        let m = IsingModel::zero_field(g.clone(), vec![0.5; 6]).unwrap();
        let tree = DecompositionTree::new(
            8,
            0,
            vec![
                DecompNode {
                    id: 0,
                    parent: None,
                    vertices: vec![0, 1, 2],
                    edges: vec![(0, 1), (0, 2), (1, 2)],
                },
                DecompNode {
                    id: 1,
                    parent: Some(0),
                    vertices: vec![2, 3, 4],
                    edges: vec![(2, 3), (2, 4), (3, 4)],
                },
            ],
        );
        let cache = infer_log_z(&tree, &m).unwrap();
        let exact = brute_force_log_z(&m, &Condition::empty()).unwrap();
        close_rel(cache.log_z(), exact, 1e-12);
    }

    #[test]
    fn two_squares_glued_on_edge() {
        // 4-cycles 0-1-2-3 and 2-3-4-5 sharing edge (2,3)
        let g = Graph::new(
            6,
            vec![(0, 1), (1, 2), (2, 3), (0, 3), (2, 4), (4, 5), (3, 5)],
        )
        .unwrap();
        let j: Vec<f64> = vec![0.8, -0.4, 0.6, 0.3, -0.9, 1.1, 0.2];
        let m = IsingModel::zero_field(g.clone(), j).unwrap();
        let tree = DecompositionTree::new(
            8,
            0,
            vec![
                DecompNode {
                    id: 0,
                    parent: None,
                    vertices: vec![0, 1, 2, 3],
                    edges: vec![(0, 1), (1, 2), (2, 3), (0, 3)],
                },
                DecompNode {
                    id: 1,
                    parent: Some(0),
                    vertices: vec![2, 3, 4, 5],
                    edges: vec![(2, 4), (4, 5), (3, 5)],
                },
            ],
        );
        let cache = infer_log_z(&tree, &m).unwrap();
        let exact = brute_force_log_z(&m, &Condition::empty()).unwrap();
        close_rel(cache.log_z(), exact, 1e-12);
    }

    #[test]
    fn constant_table_gives_zero_quadratics() {
        // a component whose conditional table is constant must produce
        // B = C = D = 0
        let g = Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let m = IsingModel::zero_field(g, vec![0.0; 6]).unwrap();
        let component =
            build_component(&DecompositionTree::single_node(m.graph(), 8), &m, 0);
        let table = vec![1.7; 8];
        let contrib = solve_child(&component, &[1, 2, 3], &table, 9);
        assert_eq!(contrib.constant, 1.7);
        for &(_, w) in &contrib.quad {
            assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn coefficients_reconstruct_table() {
        let g = Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let m = IsingModel::zero_field(g, vec![0.0; 6]).unwrap();
        let component =
            build_component(&DecompositionTree::single_node(m.graph(), 8), &m, 0);
        // an arbitrary symmetric table over 3 navel spins
        let mut table = vec![0.0; 8];
        let values = [1.3, -0.2, 0.9, 2.4];
        for bits in 0..8usize {
            let canonical = if bits & 0b001 == 1 { bits } else { !bits & 0b111 };
            let idx = match canonical {
                0b111 => 0,
                0b011 => 1,
                0b101 => 2,
                0b001 => 3,
                _ => unreachable!(),
            };
            table[bits] = values[idx];
        }
        let contrib = solve_child(&component, &[1, 2, 3], &table, 0);
        let a = contrib.constant;
        let quad: Vec<f64> = contrib.quad.iter().map(|&(_, w)| w).collect();
        let (b, c, d) = (quad[0], quad[1], quad[2]);
        for bits in 0..8usize {
            let y = |i: usize| if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
            let recon = a + b * y(0) * y(1) + c * y(0) * y(2) + d * y(1) * y(2);
            assert!(
                (recon - table[bits]).abs() < 1e-10,
                "pattern {bits:03b}: {recon} vs {}",
                table[bits]
            );
        }
    }
}
