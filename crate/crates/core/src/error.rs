//! Crate-wide error type.

use thiserror::Error;

use crate::alphabet::MAX_EVENTS;

/// Everything that can go wrong while building or analysing models.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("alphabet has {0} events, the limit is {MAX_EVENTS}")]
    TooManyEvents(usize),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is reserved and cannot be used as a name")]
    ReservedName(String),
    #[error("`{0}` is not a usable name (must be non-empty, without whitespace or `#`)")]
    BadName(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("event index {0} out of range")]
    EventOutOfRange(u8),
    #[error("the two models use different alphabets")]
    AlphabetMismatch,
    #[error("run is not a path of the plant: {0}")]
    MalformedRun(String),
    #[error("word is not an observation of this observer: `{0}` is not watched when it arrives")]
    NotAnObservation(String),
    #[error("requested run length {requested} exceeds the cap {cap}")]
    RunLengthCap { requested: usize, cap: usize },
    #[error("{what} exceeded the configured cap of {cap}")]
    ResourceCap { what: &'static str, cap: usize },
    #[error("no cycle is reachable: the maximum mean cycle is undefined")]
    NoCycle,
    #[error("weighted automaton is incomplete: state `{0}` has no outgoing transition")]
    IncompleteAutomaton(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid play history: {0}")]
    InvalidHistory(String),
    #[error("observer is invalid: {0}")]
    InvalidObserver(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
