//! Error types shared across the crate.

use alloc::string::String;
use core::fmt;

/// A function was evaluated outside its mathematical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainError {
    /// Operation that rejected the argument, e.g. `"gamma"`.
    pub op: &'static str,
    /// The offending argument value.
    pub arg: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "domain error: {}({}) is undefined", self.op, self.arg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DomainError {}

/// Grid construction or use failed.
#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// Fewer nodes than the operation can work with.
    TooCoarse { needed: usize, got: usize },
    /// Nodes not strictly increasing, or first node not zero.
    BadNodes(String),
    /// A sampled value is NaN or infinite.
    NonFiniteValue { index: usize },
    /// Value vector length differs from the node count.
    LengthMismatch { nodes: usize, values: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::TooCoarse { needed, got } => {
                write!(f, "grid too coarse: needs {needed} nodes, has {got}")
            }
            GridError::BadNodes(why) => write!(f, "invalid grid nodes: {why}"),
            GridError::NonFiniteValue { index } => {
                write!(f, "non-finite value at node {index}")
            }
            GridError::LengthMismatch { nodes, values } => {
                write!(f, "{values} values for {nodes} nodes")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GridError {}
