//! Randomized equivalence of the decomposition DP against exhaustive
//! enumeration, plus the structural invariances: root choice and the
//! assignment of attachment-set edges must not change the answer.

mod common;

use common::*;
use isingdec::decomp::{edge_marginals, infer_log_z, sample, DecompositionTree};
use isingdec::ising::{brute_force_log_z, brute_force_marginals, Condition, IsingModel};
use isingdec::planar::{log_z_planar, planar_edge_marginals};

#[test]
fn dp_matches_brute_force_on_random_glued_instances() {
    let mut r = rng(2024);
    let mut navel_sizes_seen = [false; 4];
    for _ in 0..40 {
        let inst = random_glued_instance(&mut r, 16, 8);
        for id in inst.tree.node_ids() {
            navel_sizes_seen[inst.tree.navel(id).len()] = true;
        }
        let exact = brute_force_log_z(&inst.model, &Condition::empty()).unwrap();
        let got = infer_log_z(&inst.tree, &inst.model).unwrap().log_z();
        close_rel(got, exact, 1e-9);
    }
    assert!(
        navel_sizes_seen.iter().all(|&s| s),
        "corpus must cover navel sizes 0-3, saw {navel_sizes_seen:?}"
    );
}

#[test]
fn dp_handles_nonplanar_small_components() {
    // V8 glued to a 3x3 grid along a triangle-free pair
    let mut r = rng(555);
    for _ in 0..6 {
        let inst = random_glued_instance(&mut r, 14, 8);
        let has_nonplanar = inst.tree.node_ids().any(|id| {
            let n = inst.tree.node(id).unwrap();
            n.vertices.len() == 8 || n.vertices.len() == 6
        });
        let exact = brute_force_log_z(&inst.model, &Condition::empty()).unwrap();
        let got = infer_log_z(&inst.tree, &inst.model).unwrap().log_z();
        close_rel(got, exact, 1e-9);
        let _ = has_nonplanar;
    }
}

#[test]
fn root_invariance() {
    let mut r = rng(31);
    for _ in 0..8 {
        let inst = random_glued_instance(&mut r, 14, 8);
        let reference = infer_log_z(&inst.tree, &inst.model).unwrap().log_z();
        for id in inst.tree.node_ids() {
            let rerooted = inst.tree.rerooted(id);
            let got = infer_log_z(&rerooted, &inst.model).unwrap().log_z();
            close_rel(got, reference, 1e-9);
        }
    }
}

#[test]
fn edge_ownership_invariance() {
    // two squares glued on edge (2,3): the shared edge may live in either
    // node without changing log Z
    let g = isingdec::graph::Graph::new(
        6,
        vec![(0, 1), (1, 2), (2, 3), (0, 3), (2, 4), (4, 5), (3, 5)],
    )
    .unwrap();
    let j: Vec<f64> = vec![0.8, -0.4, 0.6, 0.3, -0.9, 1.1, 0.2];
    let m = IsingModel::zero_field(g, j).unwrap();
    let make = |shared_in_child: bool| {
        use isingdec::decomp::DecompNode;
        let mut parent_edges = vec![(0, 1), (1, 2), (0, 3)];
        let mut child_edges = vec![(2, 4), (4, 5), (3, 5)];
        if shared_in_child {
            child_edges.push((2, 3));
        } else {
            parent_edges.push((2, 3));
        }
        DecompositionTree::new(
            8,
            0,
            vec![
                DecompNode {
                    id: 0,
                    parent: None,
                    vertices: vec![0, 1, 2, 3],
                    edges: parent_edges,
                },
                DecompNode {
                    id: 1,
                    parent: Some(0),
                    vertices: vec![2, 3, 4, 5],
                    edges: child_edges,
                },
            ],
        )
    };
    let a = infer_log_z(&make(false), &m).unwrap().log_z();
    let b = infer_log_z(&make(true), &m).unwrap().log_z();
    close_rel(a, b, 1e-9);
    let exact = brute_force_log_z(&m, &Condition::empty()).unwrap();
    close_rel(a, exact, 1e-9);
}

#[test]
fn single_node_tree_equals_planar_engine() {
    let mut r = rng(808);
    let m = random_planar_model(&mut r, 9);
    let tree = DecompositionTree::single_node(m.graph(), 8);
    // 9 vertices > c = 8, so this exercises the planar path end to end
    let via_dp = infer_log_z(&tree, &m).unwrap().log_z();
    let via_planar = log_z_planar(&m).unwrap();
    close_rel(via_dp, via_planar, 1e-11);

    let dp_marg = {
        let cache = infer_log_z(&tree, &m).unwrap();
        edge_marginals(&tree, &cache, &m).unwrap()
    };
    let planar_marg = planar_edge_marginals(&m).unwrap();
    for (a, b) in dp_marg.iter().zip(&planar_marg) {
        close(*a, *b, 1e-9);
    }
}

#[test]
fn marginals_match_brute_force_on_glued_instances() {
    let mut r = rng(99);
    for _ in 0..10 {
        let inst = random_glued_instance(&mut r, 14, 8);
        let cache = infer_log_z(&inst.tree, &inst.model).unwrap();
        let got = edge_marginals(&inst.tree, &cache, &inst.model).unwrap();
        let exact = brute_force_marginals(&inst.model).unwrap();
        for (a, b) in got.iter().zip(&exact.edge) {
            close(*a, *b, 1e-8);
            assert!(a.abs() <= 1.0 + 1e-10);
        }
    }
}

#[test]
fn marginals_match_finite_differences() {
    let mut r = rng(4711);
    let inst = random_glued_instance(&mut r, 12, 8);
    let cache = infer_log_z(&inst.tree, &inst.model).unwrap();
    let got = edge_marginals(&inst.tree, &cache, &inst.model).unwrap();
    let h = 1e-5;
    for e in 0..inst.model.graph().edge_count() {
        let perturb = |delta: f64| {
            let mut j = inst.model.interactions().to_vec();
            j[e] += delta;
            let m = IsingModel::zero_field(inst.model.graph().clone(), j).unwrap();
            infer_log_z(&inst.tree, &m).unwrap().log_z()
        };
        let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
        close(got[e], fd, 1e-6);
    }
}

#[test]
fn sampling_glued_triangles_distribution() {
    // glued triangles: 5 spins, 32 states
    let g = isingdec::graph::Graph::new(
        5,
        vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
    )
    .unwrap();
    let m = IsingModel::zero_field(g, vec![0.5, -0.3, 0.7, 0.4, -0.6, 0.9]).unwrap();
    let tree = {
        use isingdec::decomp::DecompNode;
        DecompositionTree::new(
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
        )
    };
    let cache = infer_log_z(&tree, &m).unwrap();
    let exact = exact_distribution(&m);
    let mut emp = EmpiricalDistribution::new(5);
    let mut r = rng(13);
    for _ in 0..30_000 {
        emp.record(&sample(&tree, &cache, 5, &mut r).unwrap());
    }
    let tv = emp.tv_distance(&exact);
    assert!(tv <= 0.02, "TV distance {tv}");
}

#[test]
fn sampling_respects_tree_with_planar_component() {
    // 9-vertex planar component forces the planar sampling path
    let mut r = rng(2121);
    let m = random_planar_model(&mut r, 9);
    let tree = DecompositionTree::single_node(m.graph(), 8);
    let cache = infer_log_z(&tree, &m).unwrap();
    let exact = exact_distribution(&m);
    let mut emp = EmpiricalDistribution::new(9);
    for _ in 0..20_000 {
        emp.record(&sample(&tree, &cache, 9, &mut r).unwrap());
    }
    let tv = emp.tv_distance(&exact);
    assert!(tv <= 0.06, "TV distance {tv}");
}
