//! Complex-network analysis of weighted power distribution grids.
//!
//! A grid is an undirected graph whose nodes are substations, transformers
//! and consumers and whose edges are cables weighted by resistance (Ohm).
//! The crate computes path and clustering metrics, degree and betweenness
//! distributions with least-squares model fits, eigenvector centrality,
//! spectral critical-edge detection, node-removal resilience, matched random
//! baselines, and the alpha/beta trading-cost parameters derived from them.

pub mod baselines;
pub mod centrality;
pub mod cost_model;
pub mod distributions_fit;
pub mod error;
pub mod grid_model;
pub mod ingest;
pub mod ksp;
pub mod path_metrics;
pub mod resilience;
pub mod shortest;
pub mod spectral_cut;

pub use error::{GridError, Result};
pub use grid_model::{
    build_graph, connected_components, order_size_avg_degree, Component, EdgeRecord, GridEdge, GridGraph,
    NodeKind, NodeRecord, LINK_WEIGHT,
};
