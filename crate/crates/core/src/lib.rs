//! Dependent percolation with random vertex weights.
//!
//! Every vertex carries an i.i.d. pair (infectivity `W`, susceptibility `W̄`);
//! given the weights, each directed edge `uv` is open independently with
//! probability `κ(W_u · W̄_v)`. The crate provides the model, comparison
//! models (bond and site percolation), an exact oracle for small instances,
//! a Monte Carlo engine, and Galton–Watson bounds on trees.

pub mod branching;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod paths;
pub mod rational;
pub mod stochastics;

pub use graph::{Boundary, DirectedGraph, EdgeId, GraphError, VertexId};
pub use rational::Rational;
