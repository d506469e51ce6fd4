use thiserror::Error;

/// Errors raised by graph construction and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("edge references unknown node id `{0}`")]
    UnknownEndpoint(String),
    #[error("self-loop on node `{0}` is not allowed")]
    SelfLoop(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("invalid {field} on edge {from}-{to}: {value}")]
    InvalidWeight {
        from: String,
        to: String,
        field: &'static str,
        value: f64,
    },
    #[error("edge {from}-{to} is not a link and lacks {field}")]
    MissingResistance {
        from: String,
        to: String,
        field: &'static str,
    },
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph has {order} node(s); at least {required} required")]
    TooSmall { order: usize, required: usize },
    #[error("graph is disconnected ({components} components); split it with connected_components first")]
    Disconnected { components: usize },
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("power iteration did not converge (last residual {residual:e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("edges missing max current: {0:?}")]
    MissingCurrent(Vec<(String, String)>),
    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
    #[error("capacity {0} <= 1 makes ln(capacity) nonpositive")]
    CapacityTooLow(f64),
    #[error("robustness is zero; the network is fully disrupted")]
    ZeroRobustness,
}

pub type Result<T> = std::result::Result<T, GridError>;
