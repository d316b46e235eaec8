use thiserror::Error;

/// Errors raised by the set-optimization toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("cone descriptions are inconsistent: dual generator {dual} has product {product} with primal generator {primal}")]
    InconsistentDescriptions { primal: usize, dual: usize, product: f64 },
    #[error("cone is not pointed: no dual combination is strictly positive on every primal generator")]
    NonPointedCone,
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("values live on different cones")]
    IncompatibleCone,
    #[error("invalid scalar {0}: must be nonnegative")]
    InvalidScalar(f64),
    #[error("lattice operation on an empty family")]
    EmptyFamily,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("generator cap exceeded: {count} > {cap}")]
    GeneratorCap { count: usize, cap: usize },
    #[error("point {0:?} lies outside the variable space")]
    OutOfDomain(Vec<f64>),
    #[error("direction {0:?} is not in the dual cone")]
    InvalidDirection(Vec<f64>),
    #[error("candidate set is empty")]
    EmptyCandidate,
    #[error("objective is +inf at every probe point")]
    InfeasibleEverywhere,
    #[error("invalid variable space: {0}")]
    InvalidSpace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("lagrangian derivative check failed: {0}")]
    DerivativeCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
