//! Root-to-leaf exact sampling: draw the root component from its augmented
//! model, then each child conditioned on the spins drawn at its navel.

use super::infer::DpCache;
use super::{DecompError, DecompositionTree};
use crate::ising::{brute_force_sample, Condition, SpinConfiguration};
use crate::planar::sample_planar;
use rand::Rng;

/// Draws one exact sample from the decomposed model. Requires the cache of a
/// completed [`super::infer_log_z`] pass on the same tree.
pub fn sample(
    tree: &DecompositionTree,
    cache: &DpCache,
    host_vertex_count: usize,
    rng: &mut impl Rng,
) -> Result<SpinConfiguration, DecompError> {
    let mut assignment: Vec<Option<i8>> = vec![None; host_vertex_count];
    // parents before children
    let mut order = tree.post_order();
    order.reverse();
    for id in order {
        let data = &cache.data[&id];
        let comp = &data.component;
        // condition: navel spins fixed by the parent's draw
        let cond = Condition::new(data.navel_host.iter().map(|&v| {
            let s = assignment[v].expect("navel assigned by parent");
            (comp.local_of(v), s)
        }))
        .expect("navel vertices distinct");
        let local = if comp.graph.vertex_count() <= tree.c {
            brute_force_sample(&comp.model(&comp.aug_j), &cond, rng)?
        } else {
            sample_planar(&comp.model(&comp.aug_j), &cond, rng)?
        };
        for (l, &host) in comp.back.iter().enumerate() {
            let s = local.spin(l);
            match assignment[host] {
                None => assignment[host] = Some(s),
                // navel vertices are drawn once and conditioned on afterwards
                Some(prev) => assert_eq!(prev, s, "navel spin mismatch at vertex {host}"),
            }
        }
    }
    let spins = assignment
        .into_iter()
        .map(|a| a.expect("decomposition covers every vertex"))
        .collect();
    Ok(SpinConfiguration::new(spins))
}
