//! Upper-bound approximate inference for nonzero-field square-grid models.
//!
//! The field is absorbed by an apex vertex tied to every grid vertex
//! (`log Z(G, μ, J) = log Z(G', 0, J') - log 2`), and the zero-field apex
//! model is bounded from above by a weighted combination of tractable
//! spanning submodels whose interactions are optimized under the constraint
//! that they average back to `J'`. Two spanning families are built here:
//! planar separators (PSG) and decomposition-based separators (DSG) whose
//! members are nonplanar but carry a valid 10-nice decomposition.

mod experiment;
mod family;
mod lbfgs;
mod optimize;
mod transfer;

pub use experiment::{
    rows_to_csv, run_varying_interaction, trial_model, ExperimentOptions, ExperimentRow,
    CSV_HEADER,
};
pub use family::{build_dsg_family, build_psg_family, FamilyKind, FamilyMember, SpanningFamily};
pub use optimize::{
    approx_marginals, optimize_upper_bound, MarginalApproximation, OptimizeOptions,
    UpperBoundResult,
};
pub use transfer::{
    transfer_matrix_exact, transfer_matrix_log_z, ExactGridResult, TRANSFER_LIMIT,
    TRANSFER_MARGINAL_LIMIT,
};

use crate::decomp::DecompError;
use crate::graph::{Graph, GraphError};
use crate::ising::{IsingModel, ModelError};
use crate::planar::PlanarError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("grid side {0} exceeds the supported limit {1}")]
    TooLarge(usize, usize),
    #[error("family does not cover target edge {0:?}")]
    CoverageError((usize, usize)),
    #[error("grid model shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

/// An `H x H` square-lattice model with per-vertex fields. Vertex `(r, c)`
/// has id `r*H + c`; edges are indexed like [`GridModel::graph`].
#[derive(Debug, Clone)]
pub struct GridModel {
    pub h: usize,
    fields: Vec<f64>,
    interactions: Vec<f64>,
}

impl GridModel {
    pub fn new(h: usize, fields: Vec<f64>, interactions: Vec<f64>) -> Result<Self, ApproxError> {
        if fields.len() != h * h {
            return Err(ApproxError::Shape(format!(
                "{} fields for an {h}x{h} grid",
                fields.len()
            )));
        }
        let g = grid_graph(h);
        if interactions.len() != g.edge_count() {
            return Err(ApproxError::Shape(format!(
                "{} interactions for {} grid edges",
                interactions.len(),
                g.edge_count()
            )));
        }
        Ok(GridModel {
            h,
            fields,
            interactions,
        })
    }

    pub fn graph(&self) -> Graph {
        grid_graph(self.h)
    }

    pub fn vertex(&self, r: usize, c: usize) -> usize {
        r * self.h + c
    }

    pub fn field(&self, r: usize, c: usize) -> f64 {
        self.fields[r * self.h + c]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn interactions(&self) -> &[f64] {
        &self.interactions
    }

    pub fn horizontal_j(&self, r: usize, c: usize) -> f64 {
        let g = self.graph();
        let idx = g
            .edge_index(self.vertex(r, c), self.vertex(r, c + 1))
            .expect("horizontal edge");
        self.interactions[idx]
    }

    pub fn vertical_j(&self, r: usize, c: usize) -> f64 {
        let g = self.graph();
        let idx = g
            .edge_index(self.vertex(r, c), self.vertex(r + 1, c))
            .expect("vertical edge");
        self.interactions[idx]
    }

    pub fn to_ising(&self) -> IsingModel {
        IsingModel::new(
            self.graph(),
            self.interactions.clone(),
            Some(self.fields.clone()),
        )
        .expect("consistent by construction")
    }

    pub fn to_ising_zero_field(&self) -> Option<IsingModel> {
        if self.fields.iter().any(|&f| f != 0.0) {
            return None;
        }
        Some(IsingModel::zero_field(self.graph(), self.interactions.clone()).unwrap())
    }

    /// Central vertex, the probe for the singleton-marginal metric.
    pub fn center(&self) -> usize {
        self.vertex(self.h / 2, self.h / 2)
    }
}

pub fn grid_graph(h: usize) -> Graph {
    let idx = |r: usize, c: usize| r * h + c;
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..h {
            if c + 1 < h {
                edges.push((idx(r, c), idx(r, c + 1)));
            }
            if r + 1 < h {
                edges.push((idx(r, c), idx(r + 1, c)));
            }
        }
    }
    Graph::new(h * h, edges).expect("grid is simple")
}

/// The apex construction: a universal vertex (id `H*H`) absorbs the fields
/// as interactions, so `log Z(G, μ, J) = log Z(G', 0, J') - log 2`. Returns
/// the apex graph and `J'` aligned with its edge order.
pub fn apexify(m: &GridModel) -> (Graph, Vec<f64>) {
    let h = m.h;
    let apex = h * h;
    let grid = grid_graph(h);
    let mut edges: Vec<(usize, usize)> = grid.edges().to_vec();
    edges.extend((0..h * h).map(|v| (v, apex)));
    let g = Graph::new(h * h + 1, edges).expect("apex graph is simple");
    let mut j = vec![0.0; g.edge_count()];
    for (i, &(u, v)) in grid.edges().iter().enumerate() {
        j[g.edge_index(u, v).expect("grid edge kept")] = m.interactions[i];
    }
    for v in 0..h * h {
        j[g.edge_index(v, apex).expect("apex edge")] = m.fields[v];
    }
    (g, j)
}
