//! Shared helpers for the integration suites: deterministic random model
//! generators and small statistics utilities.
#![allow(dead_code)]

use isingdec::graph::Graph;
use isingdec::ising::{IsingModel, SpinConfiguration};
use rand::{Rng, RngExt, SeedableRng};
use rand_pcg::Pcg64;

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) {
    assert!(
        (a - b).abs() <= tol,
        "{a} vs {b}: diff {} beyond tol {tol}",
        (a - b).abs()
    );
}

pub fn close_rel(a: f64, b: f64, rel: f64) {
    let tol = rel * b.abs().max(1.0);
    close(a, b, tol);
}

/// Random planar graph on `n` vertices: a stacked triangulation (always
/// planar) with every edge kept independently with probability `keep`.
/// The result may be disconnected.
pub fn random_planar_graph(rng: &mut Pcg64, n: usize, keep: f64) -> Graph {
    if n == 0 {
        return Graph::empty(0);
    }
    if n == 1 {
        return Graph::empty(1);
    }
    if n == 2 {
        return if rng.random::<f64>() < keep {
            Graph::new(2, vec![(0, 1)]).unwrap()
        } else {
            Graph::empty(2)
        };
    }
    let mut edges = vec![(0, 1), (1, 2), (0, 2)];
    let mut faces = vec![[0usize, 1, 2], [0, 1, 2]]; // both sides of the triangle
    for v in 3..n {
        let i = rng.random_range(0..faces.len());
        let f = faces.swap_remove(i);
        edges.push((v, f[0]));
        edges.push((v, f[1]));
        edges.push((v, f[2]));
        faces.push([v, f[0], f[1]]);
        faces.push([v, f[1], f[2]]);
        faces.push([v, f[0], f[2]]);
    }
    let kept: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|_| rng.random::<f64>() < keep)
        .collect();
    Graph::new(n, dedup_edges(kept)).unwrap()
}

fn dedup_edges(mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for e in edges.iter_mut() {
        *e = (e.0.min(e.1), e.0.max(e.1));
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

pub fn random_interactions(rng: &mut Pcg64, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random planar zero-field model, interactions uniform in `[-2, 2]`.
pub fn random_planar_model(rng: &mut Pcg64, n: usize) -> IsingModel {
    let g = random_planar_graph(rng, n, 0.85);
    let j = random_interactions(rng, g.edge_count(), -2.0, 2.0);
    IsingModel::zero_field(g, j).unwrap()
}

/// All connected vertex subsets of the given size (1, 2 or 3).
pub fn connected_subsets(g: &Graph, size: usize) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    match size {
        1 => out.extend((0..n).map(|v| vec![v])),
        2 => out.extend(g.edges().iter().map(|&(u, v)| vec![u, v])),
        3 => {
            for a in 0..n {
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        let e = [g.has_edge(a, b), g.has_edge(a, c), g.has_edge(b, c)];
                        let count = e.iter().filter(|&&x| x).count();
                        // connected on 3 vertices needs >= 2 of the 3 pairs
                        if count >= 2 {
                            out.push(vec![a, b, c]);
                        }
                    }
                }
            }
        }
        _ => panic!("subset size {size} unsupported"),
    }
    out
}

/// Total-variation distance between an empirical distribution over spin
/// configurations and exact probabilities indexed by bitmask.
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn new(n_spins: usize) -> Self {
        EmpiricalDistribution {
            counts: vec![0; 1 << n_spins],
            total: 0,
        }
    }

    pub fn record(&mut self, x: &SpinConfiguration) {
        let mut bits = 0usize;
        for v in 0..x.len() {
            if x.spin(v) == 1 {
                bits |= 1 << v;
            }
        }
        self.counts[bits] += 1;
        self.total += 1;
    }

    pub fn tv_distance(&self, exact: &[f64]) -> f64 {
        assert_eq!(exact.len(), self.counts.len());
        0.5 * exact
            .iter()
            .zip(&self.counts)
            .map(|(&p, &c)| (p - c as f64 / self.total as f64).abs())
            .sum::<f64>()
    }
}

/// Exact configuration distribution of a small model, indexed by bitmask.
pub fn exact_distribution(m: &IsingModel) -> Vec<f64> {
    let n = m.vertex_count();
    let mut weights = Vec::with_capacity(1 << n);
    for bits in 0..(1usize << n) {
        let x = SpinConfiguration::from_bits(bits, n);
        weights.push(m.log_weight(&x).unwrap());
    }
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = weights.iter().map(|&w| (w - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    probs
}

/// Möbius ladder V8: C8 plus the four antipodal rungs.
pub fn mobius_v8() -> Graph {
    let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
    edges.extend((0..4).map(|i| (i, i + 4)));
    Graph::new(8, edges).unwrap()
}

pub fn k33() -> Graph {
    let mut edges = Vec::new();
    for u in 0..3 {
        for v in 3..6 {
            edges.push((u, v));
        }
    }
    Graph::new(6, edges).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v));
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn grid_graph(h: usize, w: usize) -> Graph {
    let idx = |r: usize, c: usize| r * w + c;
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if c + 1 < w {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < h {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    Graph::new(h * w, edges).unwrap()
}

/// A random glued instance: a host model plus a decomposition tree whose
/// components are small planar graphs or Möbius-ladder-family graphs,
/// attached along navels of size 0..=3. Host size stays at or below
/// `max_vertices`. Instances are rejection-sampled against the validator.
pub struct GluedInstance {
    pub model: IsingModel,
    pub tree: isingdec::decomp::DecompositionTree,
}

pub fn random_glued_instance(r: &mut Pcg64, max_vertices: usize, c: usize) -> GluedInstance {
    use isingdec::decomp::{DecompNode, DecompositionTree};
    loop {
        let mut global_edges: Vec<(usize, usize)> = Vec::new();
        let mut nodes: Vec<DecompNode> = Vec::new();
        let mut total = 0usize;

        let n_components = 1 + r.random_range(0..4);
        for id in 0..n_components {
            // component graph: planar, or a nonplanar <= 8 piece
            let comp = match r.random_range(0..5) {
                0 if id > 0 => mobius_v8(),
                1 if id > 0 => k33(),
                _ => {
                    let n = 3 + r.random_range(0..6);
                    random_planar_graph(r, n, 0.9)
                }
            };
            let n_local = comp.vertex_count();
            let (navel_size, parent) = if id == 0 {
                (0, None)
            } else {
                let p = r.random_range(0..nodes.len());
                let max_navel = nodes[p].vertices.len().min(3).min(n_local);
                (r.random_range(0..=max_navel), Some(nodes[p].id))
            };
            // map: navel locals -> chosen parent vertices, others fresh
            let mut locals: Vec<usize> = (0..n_local).collect();
            shuffle(r, &mut locals);
            let mut mapping = vec![usize::MAX; n_local];
            if let Some(p) = parent {
                let pnode = nodes.iter().find(|n| n.id == p).unwrap();
                let mut pverts = pnode.vertices.clone();
                shuffle(r, &mut pverts);
                for i in 0..navel_size {
                    mapping[locals[i]] = pverts[i];
                }
            }
            for l in 0..n_local {
                if mapping[l] == usize::MAX {
                    mapping[l] = total;
                    total += 1;
                }
            }
            let mut owned = Vec::new();
            for &(a, b) in comp.edges() {
                let e = (mapping[a].min(mapping[b]), mapping[a].max(mapping[b]));
                if !global_edges.contains(&e) {
                    global_edges.push(e);
                    owned.push(e);
                }
            }
            nodes.push(DecompNode {
                id,
                parent,
                vertices: mapping.clone(),
                edges: owned,
            });
            if total > max_vertices {
                break;
            }
        }
        if total > max_vertices || total == 0 {
            continue;
        }
        let g = match Graph::new(total, global_edges.clone()) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let tree = DecompositionTree::new(c, 0, nodes);
        if !tree.validate(&g).is_valid() {
            continue;
        }
        let j = random_interactions(r, g.edge_count(), -1.5, 1.5);
        let model = IsingModel::zero_field(g, j).unwrap();
        return GluedInstance { model, tree };
    }
}

fn shuffle(r: &mut Pcg64, xs: &mut [usize]) {
    for i in (1..xs.len()).rev() {
        let j = r.random_range(0..=i);
        xs.swap(i, j);
    }
}
