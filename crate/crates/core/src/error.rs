use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(VertexId, VertexId),

    #[error("probe at vertex {vertex} has distance {distance} from the query, budget is {budget}")]
    BudgetViolation {
        vertex: VertexId,
        distance: u32,
        budget: u32,
    },

    /// A probe left the ball collected by the distributed simulation.
    #[error("probe at vertex {vertex} left the collected ball around {center} (radius {radius})")]
    SimulationSoundness {
        vertex: VertexId,
        center: VertexId,
        radius: u32,
    },

    #[error("cycle in orientation detected at node {0}")]
    CorruptedOrientation(u128),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("instance too large for exact search: {size} > {cap}")]
    TooLarge { size: usize, cap: usize },
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Budget and resource errors signal an analysis bug or an oversized
    /// instance rather than malformed input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::BudgetViolation { .. }
                | Error::SimulationSoundness { .. }
                | Error::Resource(_)
                | Error::TooLarge { .. }
        )
    }
}
