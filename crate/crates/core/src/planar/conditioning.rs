//! Conditioning on 1–3 connected spins, and exact sampling by sequential
//! conditioning.
//!
//! Conditioning on a single spin halves Z by the global flip symmetry.
//! Conditioning on two adjacent spins `x_u = s1, x_h = s2` factors out
//! `exp(J_uh s1 s2)`, folds the signs into the incident interactions and
//! contracts `{u, h}` into one vertex conditioned to `+1`; three spins
//! reduce to two the same way. Contraction of adjacent vertices keeps the
//! graph planar, so the planar engine applies at every step.

use super::{log_z_planar, PlanarError};
use crate::graph::{contract_vertex_set, planarity_test};
use crate::ising::{Condition, IsingModel, SpinConfiguration};
use rand::{Rng, RngExt};

/// A model with a condition folded into it: `Z_{m|S}` equals
/// `exp(log_prefactor) * Z'_{|z=+1}`, and `Z'_{|z=+1} = Z'/2` when a
/// supervertex is present.
pub(crate) struct FoldedModel {
    pub model: IsingModel,
    /// vertex conditioned to +1, if the condition was nonempty
    pub supervertex: Option<usize>,
    pub log_prefactor: f64,
    /// original vertex id -> folded vertex id
    pub vertex_map: Vec<usize>,
}

/// Multiplies all interactions incident to `v` by `sigma`; equivalent to the
/// substitution `x_v -> sigma x_v`, which maps conditioning on `x_v = sigma`
/// to conditioning on `x_v = +1`.
fn reweight_vertex(m: &IsingModel, v: usize, sigma: i8) -> IsingModel {
    if sigma == 1 {
        return m.clone();
    }
    let j = m
        .graph()
        .edges()
        .iter()
        .zip(m.interactions())
        .map(|(&(a, b), &w)| if a == v || b == v { -w } else { w })
        .collect();
    IsingModel::zero_field(m.graph().clone(), j).expect("same graph shape")
}

/// Contracts the adjacent pair `{u, h}` carrying spins `(s1, s2)` into one
/// vertex conditioned to `+1`. Returns the reduced model, the contracted
/// vertex id, the accumulated prefactor `J_uh * s1 * s2` (if the edge
/// exists), and the vertex map.
fn contract_conditioned_pair(
    m: &IsingModel,
    u: usize,
    h: usize,
    s1: i8,
    s2: i8,
) -> Result<(IsingModel, usize, f64, Vec<usize>), PlanarError> {
    let prefactor = m
        .interaction(u, h)
        .map(|j| j * (s1 * s2) as f64)
        .unwrap_or(0.0);
    let contraction =
        contract_vertex_set(m.graph(), &[u, h]).map_err(|_| PlanarError::DisconnectedConditionSet)?;
    let mut j = vec![0.0; contraction.graph.edge_count()];
    for (idx, sources) in contraction.edge_sources.iter().enumerate() {
        for &(a, b) in sources {
            let w = m.interaction(a, b).expect("source edge exists");
            // the endpoint that survived contributes its sign
            let sign = if a == u || b == u {
                s1
            } else if a == h || b == h {
                s2
            } else {
                1
            };
            j[idx] += w * sign as f64;
        }
    }
    let model = IsingModel::zero_field(contraction.graph.clone(), j).expect("consistent shape");
    let z = contraction.merge_map[u];
    Ok((model, z, prefactor, contraction.merge_map))
}

/// Folds a condition of size 0–3 on a connected vertex set into a reduced
/// model with at most one conditioned vertex.
pub(crate) fn fold_condition(m: &IsingModel, s: &Condition) -> Result<FoldedModel, PlanarError> {
    let n = m.vertex_count();
    for v in s.vertices() {
        if v >= n {
            return Err(PlanarError::ConditionOutOfRange(v));
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    match s.len() {
        0 => Ok(FoldedModel {
            model: m.clone(),
            supervertex: None,
            log_prefactor: 0.0,
            vertex_map: identity,
        }),
        1 => {
            let (v, sigma) = s.assignments()[0];
            Ok(FoldedModel {
                model: reweight_vertex(m, v, sigma),
                supervertex: Some(v),
                log_prefactor: 0.0,
                vertex_map: identity,
            })
        }
        2 => {
            let (u, s1) = s.assignments()[0];
            let (h, s2) = s.assignments()[1];
            if !m.graph().has_edge(u, h) {
                return Err(PlanarError::DisconnectedConditionSet);
            }
            let (model, z, pre, map) = contract_conditioned_pair(m, u, h, s1, s2)?;
            Ok(FoldedModel {
                model,
                supervertex: Some(z),
                log_prefactor: pre,
                vertex_map: map,
            })
        }
        3 => {
            // pick the lexicographically smallest adjacent pair inside the set
            let a = s.assignments();
            let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
            let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| m.graph().has_edge(a[i].0, a[j].0))
            else {
                return Err(PlanarError::DisconnectedConditionSet);
            };
            let k = 3 - i - j;
            let (u, s1) = a[i];
            let (h, s2) = a[j];
            let (q, s3) = a[k];
            let (model1, z, pre1, map1) = contract_conditioned_pair(m, u, h, s1, s2)?;
            let q1 = map1[q];
            if !model1.graph().has_edge(z, q1) {
                return Err(PlanarError::DisconnectedConditionSet);
            }
            let (model2, z2, pre2, map2) = contract_conditioned_pair(&model1, z, q1, 1, s3)?;
            let vertex_map = map1.iter().map(|&x| map2[x]).collect();
            Ok(FoldedModel {
                model: model2,
                supervertex: Some(z2),
                log_prefactor: pre1 + pre2,
                vertex_map,
            })
        }
        w => Err(PlanarError::ConditionTooLarge(w)),
    }
}

/// `log Z_{|S}` for a zero-field planar model and a condition on a connected
/// set of at most three vertices.
pub fn conditioned_log_z(m: &IsingModel, s: &Condition) -> Result<f64, PlanarError> {
    if !m.is_zero_field() {
        return Err(PlanarError::NotZeroField);
    }
    let folded = fold_condition(m, s)?;
    let log_z = log_z_planar(&folded.model)?;
    let halving = if folded.supervertex.is_some() {
        std::f64::consts::LN_2
    } else {
        0.0
    };
    Ok(folded.log_prefactor + log_z - halving)
}

/// Exact sample from `P(X | S)` by sequential conditioning: one planar
/// inference per vertex, each time contracting the newly fixed spin into the
/// conditioned supervertex.
pub fn sample_planar(
    m: &IsingModel,
    s: &Condition,
    rng: &mut impl Rng,
) -> Result<SpinConfiguration, PlanarError> {
    if !m.is_zero_field() {
        return Err(PlanarError::NotZeroField);
    }
    if planarity_test(m.graph()).is_none() {
        return Err(PlanarError::NotPlanar);
    }
    let n = m.vertex_count();
    let mut assignment: Vec<Option<i8>> = vec![None; n];
    for &(v, sigma) in s.assignments() {
        if v >= n {
            return Err(PlanarError::ConditionOutOfRange(v));
        }
        assignment[v] = Some(sigma);
    }

    let folded = fold_condition(m, s)?;
    let mut model = folded.model;
    let mut supervertex = folded.supervertex;
    let mut vertex_map = folded.vertex_map;
    let mut cur_log_z = if n > 0 { Some(log_z_planar(&model)?) } else { None };

    loop {
        // prefer the smallest unassigned original vertex adjacent to the
        // supervertex; fall back to seeding a fresh component uniformly
        let next_adjacent = supervertex.and_then(|z| {
            (0..n)
                .filter(|&v| assignment[v].is_none())
                .find(|&v| model.graph().has_edge(vertex_map[v], z))
        });
        match next_adjacent {
            Some(v) => {
                let z = supervertex.expect("adjacent implies supervertex");
                let vz = vertex_map[v];
                let j_zv = model.interaction(z, vz).expect("adjacent");
                let (plus_model, z_plus, _, map_plus) =
                    contract_conditioned_pair(&model, z, vz, 1, 1)?;
                let log_z_plus = log_z_planar(&plus_model)?;
                // P(x_v = +1 | fixed spins) = exp(J_zv) * Z(M_+) / Z(M)
                let p_plus = (j_zv + log_z_plus - cur_log_z.expect("model nonempty")).exp();
                let spin: i8 = if rng.random::<f64>() < p_plus { 1 } else { -1 };
                assignment[v] = Some(spin);
                let (new_model, new_z, map, new_log_z) = if spin == 1 {
                    (plus_model, z_plus, map_plus, log_z_plus)
                } else {
                    let (mm, zz, _, map) = contract_conditioned_pair(&model, z, vz, 1, -1)?;
                    let lz = log_z_planar(&mm)?;
                    (mm, zz, map, lz)
                };
                model = new_model;
                supervertex = Some(new_z);
                cur_log_z = Some(new_log_z);
                for x in vertex_map.iter_mut() {
                    *x = map[*x];
                }
            }
            None => {
                // seed the next untouched component, if any
                let Some(v) = (0..n).find(|&v| assignment[v].is_none()) else {
                    break;
                };
                let spin: i8 = if rng.random::<bool>() { 1 } else { -1 };
                assignment[v] = Some(spin);
                // reweighting is a gauge transformation: Z is unchanged
                model = reweight_vertex(&model, vertex_map[v], spin);
                supervertex = Some(vertex_map[v]);
            }
        }
    }

    let spins: Vec<i8> = assignment
        .into_iter()
        .map(|a| a.expect("all vertices assigned"))
        .collect();
    let x = SpinConfiguration::new(spins);
    debug_assert!(s.satisfied_by(&x), "sample violates its condition");
    Ok(x)
}
