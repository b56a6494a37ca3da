//! Exact inference and sampling for zero-field Ising models.
//!
//! The engine works on three levels:
//!
//! 1. [`planar`] — exact log-partition, conditioning, edge marginals and
//!    sampling for zero-field models on planar graphs, via an even-subgraph
//!    to perfect-matching expansion and a Pfaffian of the oriented
//!    skew-adjacency matrix.
//! 2. [`decomp`] — dynamic programming over a tree of subgraphs glued along
//!    attachment sets of at most three vertices ("c-nice" decompositions).
//!    Each component is handled by brute force (small) or the planar engine,
//!    so the whole class of models covered is strictly larger than planar.
//! 3. [`k5free`] — constructs an 8-nice decomposition for any graph with no
//!    K5 minor, by recursive splitting along 2- and 3-vertex cuts.
//!
//! [`approx`] applies the machinery to upper-bound the log-partition function
//! of nonzero-field square-grid models via families of tractable spanning
//! graphs, and [`ising`] holds the model types plus exhaustive-enumeration
//! oracles used throughout the test suites.

pub mod approx;
pub mod decomp;
pub mod graph;
pub mod ising;
pub mod k5free;
pub mod planar;

