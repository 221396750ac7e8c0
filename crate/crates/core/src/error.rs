use thiserror::Error;

use crate::logic::ParseError;

/// A point named by run id and time, as it appears in files and reports.
pub type PointRef = (String, usize);

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid agent name {0:?}")]
    InvalidAgent(String),

    #[error("duplicate agent {0:?}")]
    DuplicateAgent(String),

    #[error("system has no agents")]
    NoAgents,

    #[error("system has no runs")]
    NoRuns,

    #[error("duplicate run id {0:?}")]
    DuplicateRun(String),

    #[error("run {run:?} has {found} states, expected horizon + 1 = {expected}")]
    RaggedRun {
        run: String,
        expected: usize,
        found: usize,
    },

    #[error("agent mismatch in run {run:?} at time {time}: {detail}")]
    AgentMismatch {
        run: String,
        time: usize,
        detail: String,
    },

    #[error(
        "valuation not a state function: identical global states at {first:?} and {second:?} \
         carry different propositions"
    )]
    ValuationNotStateFunction { first: PointRef, second: PointRef },

    #[error("unknown agent {0:?}")]
    UnknownAgent(String),

    #[error("unknown run {0:?}")]
    UnknownRun(String),

    #[error("unknown proposition {0:?}")]
    UnknownProp(String),

    #[error("time {time} is beyond the horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },

    #[error("malformed point {0:?} (expected RUN:TIME)")]
    MalformedPoint(String),

    #[error("event ranges over {found} points but the system has {expected}")]
    EventSizeMismatch { expected: usize, found: usize },

    #[error("event for agent {agent:?} is not local: {inside:?} is in the event, {outside:?} is not, and {agent} cannot tell them apart")]
    NotLocal {
        agent: String,
        inside: PointRef,
        outside: PointRef,
    },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("need at least {needed} agents, found {found}")]
    TooFewAgents { needed: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
