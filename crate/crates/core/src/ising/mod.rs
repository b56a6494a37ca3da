//! Ising model types and exhaustive-enumeration oracles.
//!
//! A model assigns to each spin configuration `X ∈ {±1}^N` the weight
//! `exp(Σ_v μ_v x_v + Σ_{e={v,w}} J_e x_v x_w)`; the normalizing sum over all
//! `2^N` configurations is the partition function `Z`. The oracles here
//! enumerate configurations directly and are the ground truth every fast
//! engine in this crate is tested against.

mod brute;

pub use brute::{brute_force_log_z, brute_force_marginals, brute_force_sample, BruteMarginals};
pub(crate) use brute::for_each_consistent;

use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap for exhaustive enumeration (`2^20` configurations).
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("configuration has {0} spins but the model has {1} vertices")]
    SizeMismatch(usize, usize),
    #[error("model has {0} vertices, above the enumeration limit of {1}")]
    TooLarge(usize, usize),
    #[error("interaction vector has {0} entries but the graph has {1} edges")]
    InteractionCount(usize, usize),
    #[error("field vector has {0} entries but the graph has {1} vertices")]
    FieldCount(usize, usize),
    #[error("condition names vertex {0} more than once")]
    RepeatedConditionVertex(usize),
    #[error("condition names vertex {0}, out of range")]
    ConditionVertexOutOfRange(usize),
}

/// A pairwise binary model: graph, per-edge interactions, optional per-vertex
/// fields. `fields: None` is the zero-field regime, the only one the planar
/// and decomposition engines accept.
#[derive(Debug, Clone)]
pub struct IsingModel {
    graph: Graph,
    interactions: Vec<f64>,
    fields: Option<Vec<f64>>,
}

impl IsingModel {
    pub fn new(
        graph: Graph,
        interactions: Vec<f64>,
        fields: Option<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        if interactions.len() != graph.edge_count() {
            return Err(ModelError::InteractionCount(
                interactions.len(),
                graph.edge_count(),
            ));
        }
        if let Some(f) = &fields {
            if f.len() != graph.vertex_count() {
                return Err(ModelError::FieldCount(f.len(), graph.vertex_count()));
            }
        }
        Ok(IsingModel {
            graph,
            interactions,
            fields,
        })
    }

    /// Zero-field model; interactions indexed like `graph.edges()`.
    pub fn zero_field(graph: Graph, interactions: Vec<f64>) -> Result<Self, ModelError> {
        IsingModel::new(graph, interactions, None)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn interactions(&self) -> &[f64] {
        &self.interactions
    }

    pub fn interaction(&self, u: usize, v: usize) -> Option<f64> {
        self.graph.edge_index(u, v).map(|i| self.interactions[i])
    }

    pub fn fields(&self) -> Option<&[f64]> {
        self.fields.as_deref()
    }

    pub fn is_zero_field(&self) -> bool {
        self.fields.is_none()
    }

    /// `log W(X) = Σ_v μ_v x_v + Σ_e J_e x_v x_w`.
    pub fn log_weight(&self, x: &SpinConfiguration) -> Result<f64, ModelError> {
        if x.len() != self.graph.vertex_count() {
            return Err(ModelError::SizeMismatch(x.len(), self.graph.vertex_count()));
        }
        Ok(self.log_weight_spins(x.spins()))
    }

    /// As [`IsingModel::log_weight`], on a raw spin slice of the right length.
    pub(crate) fn log_weight_spins(&self, spins: &[i8]) -> f64 {
        let mut total = 0.0;
        if let Some(mu) = &self.fields {
            for (v, &m) in mu.iter().enumerate() {
                total += m * spins[v] as f64;
            }
        }
        for (i, &(u, v)) in self.graph.edges().iter().enumerate() {
            total += self.interactions[i] * (spins[u] * spins[v]) as f64;
        }
        total
    }
}

/// A full assignment of `±1` spins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Self {
        assert!(spins.iter().all(|&s| s == 1 || s == -1), "spins must be ±1");
        SpinConfiguration { spins }
    }

    /// Decodes bit `v` of `bits` as +1 (set) or −1 (clear).
    pub fn from_bits(bits: usize, n: usize) -> Self {
        SpinConfiguration {
            spins: (0..n).map(|v| if bits >> v & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spin(&self, v: usize) -> i8 {
        self.spins[v]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn flipped(&self) -> Self {
        SpinConfiguration {
            spins: self.spins.iter().map(|&s| -s).collect(),
        }
    }
}

/// A partial assignment: spins fixed on a subset of vertices.
///
/// The exhaustive oracles accept any size; the planar conditioning machinery
/// additionally requires the conditioned set to be connected and of size at
/// most three.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Condition {
    assignments: Vec<(usize, i8)>,
}

impl Condition {
    pub fn empty() -> Self {
        Condition::default()
    }

    /// Builds a condition, normalizing vertex order and rejecting repeats.
    pub fn new(assignments: impl IntoIterator<Item = (usize, i8)>) -> Result<Self, ModelError> {
        let mut a: Vec<(usize, i8)> = assignments.into_iter().collect();
        assert!(a.iter().all(|&(_, s)| s == 1 || s == -1), "spins must be ±1");
        a.sort_by_key(|&(v, _)| v);
        for w in a.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::RepeatedConditionVertex(w[0].0));
            }
        }
        Ok(Condition { assignments: a })
    }

    pub fn single(v: usize, s: i8) -> Self {
        Condition::new([(v, s)]).expect("single assignment cannot repeat")
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn assignments(&self) -> &[(usize, i8)] {
        &self.assignments
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().map(|&(v, _)| v)
    }

    pub fn spin_of(&self, v: usize) -> Option<i8> {
        self.assignments
            .binary_search_by_key(&v, |&(u, _)| u)
            .ok()
            .map(|i| self.assignments[i].1)
    }

    pub fn satisfied_by(&self, x: &SpinConfiguration) -> bool {
        self.assignments.iter().all(|&(v, s)| x.spin(v) == s)
    }

    /// The condition with all spins negated.
    pub fn negated(&self) -> Self {
        Condition {
            assignments: self.assignments.iter().map(|&(v, s)| (v, -s)).collect(),
        }
    }

    pub fn validate_for(&self, m: &IsingModel) -> Result<(), ModelError> {
        for &(v, _) in &self.assignments {
            if v >= m.vertex_count() {
                return Err(ModelError::ConditionVertexOutOfRange(v));
            }
        }
        Ok(())
    }
}

/// On-disk model format:
/// `{"n": <int>, "edges": [{"u": int, "v": int, "j": real}, ...],
///   "fields": [real, ...] | null}`.
#[derive(Serialize, Deserialize)]
struct ModelJson {
    n: usize,
    edges: Vec<EdgeJson>,
    fields: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    u: usize,
    v: usize,
    j: f64,
}

impl IsingModel {
    pub fn to_json(&self) -> String {
        let edges = self
            .graph
            .edges()
            .iter()
            .zip(&self.interactions)
            .map(|(&(u, v), &j)| EdgeJson { u, v, j })
            .collect();
        serde_json::to_string(&ModelJson {
            n: self.graph.vertex_count(),
            edges,
            fields: self.fields.clone(),
        })
        .expect("model serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        let raw: ModelJson = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let graph = Graph::new(raw.n, raw.edges.iter().map(|e| (e.u, e.v))).map_err(|e| e.to_string())?;
        // Align interactions with the normalized edge order.
        let mut interactions = vec![0.0; graph.edge_count()];
        for e in &raw.edges {
            let i = graph
                .edge_index(e.u, e.v)
                .expect("edge present by construction");
            interactions[i] = e.j;
        }
        IsingModel::new(graph, interactions, raw.fields).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge(j: f64) -> IsingModel {
        IsingModel::zero_field(Graph::new(2, vec![(0, 1)]).unwrap(), vec![j]).unwrap()
    }

    #[test]
    fn log_weight_single_edge() {
        let m = single_edge(0.7);
        let aligned = SpinConfiguration::new(vec![1, 1]);
        let opposed = SpinConfiguration::new(vec![1, -1]);
        assert_eq!(m.log_weight(&aligned).unwrap(), 0.7);
        assert_eq!(m.log_weight(&opposed).unwrap(), -0.7);
    }

    #[test]
    fn log_weight_triangle_sign_bookkeeping() {
        let g = Graph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap();
        let m = IsingModel::zero_field(g, vec![1.0, 2.0, 3.0]).unwrap();
        let x = SpinConfiguration::new(vec![1, -1, 1]);
        // J01*(-1) + J02*(+1) + J12*(-1) = -1 + 2 - 3 = -2
        assert_eq!(m.log_weight(&x).unwrap(), -2.0);
    }

    #[test]
    fn log_weight_flip_symmetry_zero_field() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let m = IsingModel::zero_field(g, vec![0.3, -0.7, 1.1, 0.2]).unwrap();
        let x = SpinConfiguration::from_bits(0b0110, 4);
        assert_eq!(m.log_weight(&x).unwrap(), m.log_weight(&x.flipped()).unwrap());
    }

    #[test]
    fn size_mismatch_rejected() {
        let m = single_edge(1.0);
        let x = SpinConfiguration::new(vec![1]);
        assert!(matches!(m.log_weight(&x), Err(ModelError::SizeMismatch(1, 2))));
    }

    #[test]
    fn condition_rejects_repeats() {
        assert!(Condition::new([(0, 1), (0, -1)]).is_err());
        let c = Condition::new([(2, -1), (0, 1)]).unwrap();
        assert_eq!(c.assignments(), &[(0, 1), (2, -1)]);
    }

    #[test]
    fn model_json_round_trip() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let m = IsingModel::new(g, vec![0.5, -0.25], Some(vec![0.1, 0.0, -0.3])).unwrap();
        let s = m.to_json();
        let back = IsingModel::from_json(&s).unwrap();
        assert_eq!(back.interactions(), m.interactions());
        assert_eq!(back.fields(), m.fields());
        assert_eq!(back.graph(), m.graph());
    }
}
