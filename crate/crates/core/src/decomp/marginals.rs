//! Per-edge expectations `E[x_v x_w]` through the tree: a downward pass
//! computes, for each node, the marginal distribution of its navel spins
//! under the full model; each edge's expectation is then a mixture of
//! conditional component expectations over those navel patterns.
//!
//! The downward quantity is the "outside" partition table: for node `t` with
//! navel `K`, `out_t(S) = log Z` of everything outside `t`'s subtree
//! conditioned on `X_K = S`. Like a child table it is determined by at most
//! four coefficients, so it folds into the component interactions the same
//! way and the recursion stays within three-vertex conditioning.

use super::infer::{component_pattern_tables, navel_condition, ComponentModel, DpCache};
use super::{DecompError, DecompositionTree};
use crate::ising::{for_each_consistent, Condition, IsingModel};
use crate::planar::{
    fold_condition, pair_expectation_robust, planar_edge_marginals, PlanarError,
};
use std::collections::HashMap;

/// How pair expectations of large planar components are computed.
#[derive(Clone, Copy, PartialEq)]
enum PairRoute {
    /// one matrix inverse for all edges; fast, accurate at moderate coupling
    Inverse,
    /// two conditioned partition functions per edge; slow, stays in range
    /// at strong coupling
    Conditioning,
}

/// `E[x_v x_w]` for every host edge, indexed like `m.graph().edges()`.
pub fn edge_marginals(
    tree: &DecompositionTree,
    cache: &DpCache,
    m: &IsingModel,
) -> Result<Vec<f64>, DecompError> {
    edge_marginals_route(tree, cache, m, PairRoute::Inverse)
}

/// As [`edge_marginals`], trading speed for numerical robustness at strong
/// coupling (the conditioning route for planar components).
pub fn edge_marginals_robust(
    tree: &DecompositionTree,
    cache: &DpCache,
    m: &IsingModel,
) -> Result<Vec<f64>, DecompError> {
    edge_marginals_route(tree, cache, m, PairRoute::Conditioning)
}

fn edge_marginals_route(
    tree: &DecompositionTree,
    cache: &DpCache,
    m: &IsingModel,
    route: PairRoute,
) -> Result<Vec<f64>, DecompError> {
    let mut out_tables: HashMap<usize, Vec<f64>> = HashMap::new();
    out_tables.insert(tree.root, vec![0.0]);
    let mut order = tree.post_order();
    order.reverse(); // parents first

    let mut result = vec![f64::NAN; m.graph().edge_count()];
    for id in order {
        let data = &cache.data[&id];
        let comp = &data.component;
        let k = data.navel_host.len();
        let out = out_tables[&id].clone();

        // navel pattern distribution under the full model
        let mut weights_log: Vec<f64> = (0..(1usize << k))
            .map(|bits| out[bits] + data.subtree_log_z[bits])
            .collect();
        let max = weights_log.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut pi: Vec<f64> = weights_log.drain(..).map(|w| (w - max).exp()).collect();
        let total: f64 = pi.iter().sum();
        for p in pi.iter_mut() {
            *p /= total;
        }

        // outside coefficients fold into the component on the navel edges
        let (out_const, out_quad) = table_coefficients(comp, &data.navel_host, &out);

        // conditional expectations of owned edges per navel pattern
        let node = tree.node(id).expect("node exists");
        let per_pattern =
            pattern_edge_expectations(comp, &comp.aug_j, tree.c, &node.edges, route)?;
        for (ei, &(a, b)) in node.edges.iter().enumerate() {
            let host_idx = m.graph().edge_index(a, b).expect("owned edge in host");
            let mut acc = 0.0;
            for bits in 0..(1usize << k) {
                acc += pi[bits] * per_pattern[bits][ei];
            }
            result[host_idx] = acc;
        }

        // children's outside tables
        for contrib in &data.child_contrib {
            let ch = contrib.child;
            let child_navel = tree.navel(ch);
            // component weights with this child removed, outside folded in
            let mut w = comp.aug_j.clone();
            for &(e, add) in &contrib.quad {
                w[e] -= add;
            }
            for &(e, add) in &out_quad {
                w[e] += add;
            }
            let constant = data.log_m - contrib.constant + out_const;
            let child_local: Vec<usize> =
                child_navel.iter().map(|&v| comp.local_of(v)).collect();
            let table = component_pattern_tables(comp, &w, &child_local, tree.c)?
                .into_iter()
                .map(|z| constant + z)
                .collect();
            out_tables.insert(ch, table);
        }
    }
    debug_assert!(result.iter().all(|v| v.is_finite()), "every edge owned once");
    Ok(result)
}

/// Expresses a symmetric log-table over at most three navel spins as a
/// constant plus pairwise coefficients on the navel edges.
fn table_coefficients(
    comp: &ComponentModel,
    navel_host: &[usize],
    table: &[f64],
) -> (f64, Vec<(usize, f64)>) {
    let k = navel_host.len();
    let sym = |bits: usize| {
        let neg = !bits & ((1 << k) - 1);
        0.5 * (table[bits] + table[neg])
    };
    let edge = |a: usize, b: usize| {
        let la = comp.local_of(navel_host[a]);
        let lb = comp.local_of(navel_host[b]);
        comp.graph
            .edge_index(la, lb)
            .expect("navel edge in scaffold")
    };
    match k {
        0 => (table[0], Vec::new()),
        1 => (sym(0), Vec::new()),
        2 => {
            let l_pp = sym(0b11);
            let l_pm = sym(0b01);
            (
                0.5 * (l_pp + l_pm),
                vec![(edge(0, 1), 0.5 * (l_pp - l_pm))],
            )
        }
        3 => {
            let l1 = sym(0b111);
            let l2 = sym(0b011);
            let l3 = sym(0b101);
            let l4 = sym(0b001);
            (
                0.25 * (l1 + l2 + l3 + l4),
                vec![
                    (edge(0, 1), 0.25 * (l1 + l2 - l3 - l4)),
                    (edge(0, 2), 0.25 * (l1 - l2 + l3 - l4)),
                    (edge(1, 2), 0.25 * (l1 - l2 - l3 + l4)),
                ],
            )
        }
        _ => unreachable!("navels are validated to size <= 3"),
    }
}

/// `E[y_a y_b | S]` for each owned edge under every navel sign pattern:
/// exhaustive components do all patterns in two enumeration passes, planar
/// components go through the condition-folded inverse-Kasteleyn marginals.
fn pattern_edge_expectations(
    comp: &ComponentModel,
    weights: &[f64],
    c: usize,
    owned_host_edges: &[(usize, usize)],
    route: PairRoute,
) -> Result<Vec<Vec<f64>>, DecompError> {
    let model = comp.model(weights);
    let navel = &comp.navel_local;
    let k = navel.len();
    let local_edges: Vec<(usize, usize)> = owned_host_edges
        .iter()
        .map(|&(a, b)| (comp.local_of(a), comp.local_of(b)))
        .collect();
    if comp.graph.vertex_count() <= c {
        let pattern_of = |x: &[i8]| -> usize {
            let mut bits = 0usize;
            for (i, &v) in navel.iter().enumerate() {
                if x[v] == 1 {
                    bits |= 1 << i;
                }
            }
            bits
        };
        let mut max = vec![f64::NEG_INFINITY; 1 << k];
        for_each_consistent(&model, &Condition::empty(), |x, lw| {
            let p = pattern_of(x);
            if lw > max[p] {
                max[p] = lw;
            }
        })?;
        let mut norm = vec![0.0f64; 1 << k];
        let mut acc = vec![vec![0.0f64; local_edges.len()]; 1 << k];
        for_each_consistent(&model, &Condition::empty(), |x, lw| {
            let p = pattern_of(x);
            let w = (lw - max[p]).exp();
            norm[p] += w;
            for (ei, &(a, b)) in local_edges.iter().enumerate() {
                acc[p][ei] += w * (x[a] * x[b]) as f64;
            }
        })?;
        for (p, row) in acc.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v /= norm[p];
            }
        }
        Ok(acc)
    } else {
        let mut out = Vec::with_capacity(1 << k);
        for bits in 0..(1usize << k) {
            let cond = navel_condition(navel, bits);
            let folded = fold_condition(&model, &cond).map_err(DecompError::Planar)?;
            let folded_marginals = match route {
                PairRoute::Inverse => Some(planar_edge_marginals(&folded.model)?),
                PairRoute::Conditioning => None,
            };
            let spin_of = |v: usize| cond.spin_of(v);
            let pair = |a: usize, b: usize| -> Result<f64, DecompError> {
                let fa = folded.vertex_map[a];
                let fb = folded.vertex_map[b];
                match &folded_marginals {
                    Some(marg) => {
                        let idx = folded
                            .model
                            .graph()
                            .edge_index(fa, fb)
                            .ok_or(PlanarError::DisconnectedConditionSet)?;
                        Ok(marg[idx])
                    }
                    None => Ok(pair_expectation_robust(&folded.model, fa, fb)?),
                }
            };
            let mut row = Vec::with_capacity(local_edges.len());
            for &(a, b) in &local_edges {
                let val = match (spin_of(a), spin_of(b)) {
                    (Some(sa), Some(sb)) => (sa * sb) as f64,
                    // E[x_a x_b | S] = s_a * E[y_z y_b] in the folded model
                    (Some(sa), None) => sa as f64 * pair(a, b)?,
                    (None, Some(sb)) => sb as f64 * pair(b, a)?,
                    (None, None) => pair(a, b)?,
                };
                row.push(val);
            }
            out.push(row);
        }
        Ok(out)
    }
}

