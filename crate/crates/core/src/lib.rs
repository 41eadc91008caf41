//! Fault diagnosis of discrete-event systems under dynamic observers.
//!
//! A plant is a finite automaton whose transitions carry observable events,
//! silent steps, or a fault. An observer decides after each observation which
//! events to watch next. This crate answers three questions: can a fixed
//! observer diagnose every fault within k steps, what is the most permissive
//! family of observers that can, and how cheap can watching get, measured as
//! the worst-case average size of the watch sets along a run.

pub mod alphabet;
pub mod cost;
pub mod diagnosis;
pub mod dot;
pub mod error;
pub mod game;
pub mod io;
pub mod observer;
pub mod plant;
pub mod product;
pub mod synthesis;
pub mod testing;

pub use alphabet::{Alphabet, EventId, EventSet, Label, EPS_TOKEN, FAULT_TOKEN, MAX_EVENTS};
pub use error::{Error, Result};
pub use observer::{
    static_observer, validate_observer, AnnotatedHistory, Observer, ObserverDefect, RawObserver,
    ValidationReport,
};
pub use plant::{Plant, Run, StateId, Transition, DEFAULT_RUN_CAP};
