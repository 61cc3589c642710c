use thiserror::Error;

use crate::model::NodeId;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    Config {
        field: &'static str,
        reason: &'static str,
    },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is dead")]
    DeadNode(NodeId),
    #[error("network has no alive nodes")]
    EmptyNetwork,
    #[error("simulation complete: every node is dead")]
    SimulationComplete,
}

impl Error {
    pub(crate) const fn config(field: &'static str, reason: &'static str) -> Self {
        Error::Config { field, reason }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
