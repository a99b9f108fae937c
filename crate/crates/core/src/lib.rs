//! Distance-fraud analysis for graph-based distance-bounding protocols.

pub mod dyadic;
pub mod fraud;
pub mod generators;
pub mod graph;
pub mod protocol;
pub mod sat;
