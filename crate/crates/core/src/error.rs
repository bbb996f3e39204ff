use thiserror::Error;

use crate::parser::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("empty interval {0}")]
    EmptyInterval(String),

    #[error("interval endpoint {0} outside [0,1]")]
    EndpointOutOfRange(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("state index {0} out of range")]
    StateIndex(usize),

    #[error("duplicate state `{0}`")]
    DuplicateState(String),

    #[error("model is not well formed: {0}")]
    IllFormed(String),

    #[error("edge set mixes sources {0} and {1}")]
    MixedSources(usize, usize),

    #[error("edge ({0},{1}) is not an outgoing edge of state {2}")]
    NotOutgoing(usize, usize, usize),

    #[error("edge set is not valid for state {0}")]
    InvalidEdgeSet(usize),

    #[error("no assignment with the requested support exists for state {0}")]
    NoWitness(usize),

    #[error("state {state} has {count} excludable edges, above the oracle guard of {limit}")]
    GuardExceeded {
        state: usize,
        count: usize,
        limit: usize,
    },

    #[error("ILEC checks need a non-empty state set")]
    EmptyComponent,

    #[error("invalid scheduler: {0}")]
    Scheduler(String),
}
