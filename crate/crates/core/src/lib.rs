//! Temporal knowledge graph embeddings by rotation in complex space.
//!
//! Entities are complex vectors that each time step rotates element-wise;
//! relations translate the rotated subject onto the conjugate of the
//! rotated object. Facts that span an interval use a pair of relation
//! embeddings, one for the beginning and one for the end.
//!
//! - [`data`]: TSV ingestion, vocabularies, time binning
//! - [`model`]: parameters, scoring, checkpoints
//! - [`training`]: negative-sampling loss, Adagrad, early stopping
//! - [`eval`]: time-wise filtered MRR and Hits@k

pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod training;

pub use error::{Result, TeroError};
