//! Observers: deterministic machines that decide, after each observation,
//! which events to watch next.
//!
//! An observer is total on observable events and stutters on unwatched ones:
//! if `a` is not in the watch set of state `s`, the `a`-step stays in `s` and
//! nothing is observed. Feeding an observer its own output leads to the same
//! state as feeding it the original word.

use std::fmt;

use crate::alphabet::{Alphabet, EventId, EventSet};
use crate::error::{Error, Result};
use crate::plant::{Plant, Run, StateId};

/// Observer as written down: a transition list, not necessarily total,
/// deterministic, or stutter-closed. [`validate_observer`] reports every
/// defect; [`RawObserver::build`] converts to the checked form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawObserver {
    pub name: String,
    pub alphabet: Alphabet,
    pub states: Vec<String>,
    pub initial: StateId,
    pub watch: Vec<EventSet>,
    pub transitions: Vec<(StateId, EventId, StateId)>,
}

/// One defect found by [`validate_observer`], already rendered with names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObserverDefect {
    /// A watched event with no transition.
    MissingTransition { state: String, event: String },
    /// Two transitions for the same (state, event).
    Nondeterministic { state: String, event: String },
    /// An unwatched event moving away from its state.
    StutterBreach {
        state: String,
        event: String,
        dst: String,
    },
    /// A watch set mentioning events outside the alphabet.
    WatchOutsideAlphabet { state: String },
}

impl fmt::Display for ObserverDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObserverDefect::MissingTransition { state, event } => {
                write!(
                    f,
                    "state `{state}` watches `{event}` but has no `{event}`-transition"
                )
            }
            ObserverDefect::Nondeterministic { state, event } => {
                write!(f, "state `{state}` has two `{event}`-transitions")
            }
            ObserverDefect::StutterBreach { state, event, dst } => write!(
                f,
                "state `{state}` does not watch `{event}` yet moves to `{dst}` on it"
            ),
            ObserverDefect::WatchOutsideAlphabet { state } => {
                write!(f, "state `{state}` watches events outside the alphabet")
            }
        }
    }
}

/// Validation outcome; empty defect list means the observer is well formed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub defects: Vec<ObserverDefect>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, d) in self.defects.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Report every defect of `raw`. State and transition indices out of range
/// are construction errors, not validation findings.
pub fn validate_observer(raw: &RawObserver) -> ValidationReport {
    let mut defects = Vec::new();
    let full = raw.alphabet.full_set();
    let n = raw.states.len();
    for (s, &w) in raw.watch.iter().enumerate() {
        if !w.is_subset_of(full) {
            defects.push(ObserverDefect::WatchOutsideAlphabet {
                state: raw.states[s].clone(),
            });
        }
    }
    // per (state, event): collect targets
    let mut targets: Vec<Vec<Vec<StateId>>> = vec![vec![Vec::new(); raw.alphabet.len()]; n];
    for &(s, e, d) in &raw.transitions {
        targets[s][e.0 as usize].push(d);
    }
    for (s, per_event) in targets.iter().enumerate() {
        for e in raw.alphabet.events() {
            let ts = &per_event[e.0 as usize];
            let watched = raw.watch[s].contains(e);
            if ts.len() > 1 {
                defects.push(ObserverDefect::Nondeterministic {
                    state: raw.states[s].clone(),
                    event: raw.alphabet.name(e).to_string(),
                });
            }
            if watched && ts.is_empty() {
                defects.push(ObserverDefect::MissingTransition {
                    state: raw.states[s].clone(),
                    event: raw.alphabet.name(e).to_string(),
                });
            }
            if !watched {
                for &d in ts {
                    if d != s {
                        defects.push(ObserverDefect::StutterBreach {
                            state: raw.states[s].clone(),
                            event: raw.alphabet.name(e).to_string(),
                            dst: raw.states[d].clone(),
                        });
                    }
                }
            }
        }
    }
    defects.sort_by_key(|d| format!("{d}"));
    ValidationReport { defects }
}

impl RawObserver {
    /// Structural sanity (indices in range, names usable) as hard errors.
    fn check_shape(&self) -> Result<()> {
        crate::alphabet::check_name(&self.name)?;
        let n = self.states.len();
        let mut seen = std::collections::BTreeSet::new();
        for s in &self.states {
            crate::alphabet::check_name(s)?;
            if !seen.insert(s) {
                return Err(Error::DuplicateName(s.clone()));
            }
        }
        if self.initial >= n {
            return Err(Error::StateOutOfRange(self.initial));
        }
        if self.watch.len() != n {
            return Err(Error::InvalidObserver(
                "one watch set per state is required".into(),
            ));
        }
        for &(s, e, d) in &self.transitions {
            if s >= n {
                return Err(Error::StateOutOfRange(s));
            }
            if d >= n {
                return Err(Error::StateOutOfRange(d));
            }
            if e.0 as usize >= self.alphabet.len() {
                return Err(Error::EventOutOfRange(e.0));
            }
        }
        Ok(())
    }

    /// Validate and convert into the checked, total form. Unwatched events
    /// get their forced self-loops filled in.
    pub fn build(self) -> Result<Observer> {
        self.check_shape()?;
        let report = validate_observer(&self);
        if !report.is_ok() {
            return Err(Error::InvalidObserver(report.to_string()));
        }
        let n = self.states.len();
        let mut next = vec![Vec::with_capacity(self.alphabet.len()); n];
        for (s, row) in next.iter_mut().enumerate() {
            for _ in self.alphabet.events() {
                row.push(s); // default: stutter
            }
        }
        for &(s, e, d) in &self.transitions {
            next[s][e.0 as usize] = d;
        }
        Ok(Observer {
            name: self.name,
            alphabet: self.alphabet,
            states: self.states,
            initial: self.initial,
            watch: self.watch,
            next,
        })
    }
}

/// A well-formed observer: deterministic, total, stutter-closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observer {
    name: String,
    alphabet: Alphabet,
    states: Vec<String>,
    initial: StateId,
    watch: Vec<EventSet>,
    next: Vec<Vec<StateId>>,
}

/// The observer that always watches exactly `sub`.
pub fn static_observer(alphabet: Alphabet, sub: EventSet) -> Observer {
    debug_assert!(alphabet.contains_set(sub));
    let next = vec![vec![0; alphabet.len()]];
    Observer {
        name: "static".into(),
        alphabet,
        states: vec!["s0".into()],
        initial: 0,
        watch: vec![sub],
        next,
    }
}

impl Observer {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn watch(&self, s: StateId) -> EventSet {
        self.watch[s]
    }

    pub fn step(&self, s: StateId, e: EventId) -> StateId {
        self.next[s][e.0 as usize]
    }

    /// State reached from the initial state on an observable word.
    pub fn state_after(&self, word: &[EventId]) -> StateId {
        word.iter().fold(self.initial, |s, &e| self.step(s, e))
    }

    /// Transducer semantics: run `word` through the observer, keeping the
    /// events that were watched when they arrived.
    pub fn observe(&self, word: &[EventId]) -> Vec<EventId> {
        let mut s = self.initial;
        let mut out = Vec::new();
        for &e in word {
            if self.watch[s].contains(e) {
                out.push(e);
            }
            s = self.step(s, e);
        }
        out
    }

    /// Observation of a plant run: project the trace to the observable
    /// alphabet, then observe it. Alphabets must agree.
    pub fn observe_run(&self, plant: &Plant, run: &Run) -> Result<Vec<EventId>> {
        if plant.alphabet() != &self.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        run.validate(plant)?;
        let projected = self
            .alphabet
            .project(&run.trace(), self.alphabet.full_set())?;
        Ok(self.observe(&projected))
    }

    /// The alternating watch-set/event view of an observation. Errors unless
    /// every event of `word` is watched when it arrives.
    pub fn annotated_history(&self, word: &[EventId]) -> Result<AnnotatedHistory> {
        let mut s = self.initial;
        let mut watches = Vec::new();
        let mut events = Vec::new();
        for &e in word {
            if !self.watch[s].contains(e) {
                return Err(Error::NotAnObservation(self.alphabet.name(e).to_string()));
            }
            watches.push(self.watch[s]);
            events.push(e);
            s = self.step(s, e);
        }
        if watches.is_empty() {
            watches.push(self.watch[s]);
        }
        Ok(AnnotatedHistory { watches, events })
    }
}

/// Watch sets interleaved with the events observed under them: `watches[i]`
/// is active when `events[i]` arrives. For the empty observation the single
/// entry is the initial watch set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedHistory {
    pub watches: Vec<EventSet>,
    pub events: Vec<EventId>,
}

impl AnnotatedHistory {
    /// Render as `{a}·a·{b}·b` (empty observation: just `{a}`).
    pub fn render(&self, alphabet: &Alphabet) -> String {
        if self.events.is_empty() {
            return alphabet.fmt_set(self.watches[0]);
        }
        let mut out = String::new();
        for (i, &e) in self.events.iter().enumerate() {
            if i > 0 {
                out.push('·');
            }
            out.push_str(&alphabet.fmt_set(self.watches[i]));
            out.push('·');
            out.push_str(alphabet.name(e));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{fig2_observer, plant_b};

    fn al() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn a() -> EventId {
        EventId(0)
    }

    fn b() -> EventId {
        EventId(1)
    }

    fn ids(s: &str) -> Vec<EventId> {
        s.bytes()
            .map(|c| match c {
                b'a' => EventId(0),
                b'b' => EventId(1),
                _ => panic!("unknown event"),
            })
            .collect()
    }

    #[test]
    fn validation_reports_each_defect_class() {
        let alphabet = al();
        // watched b at state 1 has no transition; state 0 has duplicate a-edges;
        // state 1 moves on unwatched a
        let raw = RawObserver {
            name: "bad".into(),
            alphabet: alphabet.clone(),
            states: vec!["0".into(), "1".into()],
            initial: 0,
            watch: vec![EventSet::singleton(a()), EventSet::singleton(b())],
            transitions: vec![(0, a(), 1), (0, a(), 0), (1, a(), 0)],
        };
        let report = validate_observer(&raw);
        assert!(!report.is_ok());
        assert!(report.defects.iter().any(|d| matches!(
            d,
            ObserverDefect::MissingTransition { state, event } if state == "1" && event == "b"
        )));
        assert!(report
            .defects
            .iter()
            .any(|d| matches!(d, ObserverDefect::Nondeterministic { state, event } if state == "0" && event == "a")));
        assert!(report
            .defects
            .iter()
            .any(|d| matches!(d, ObserverDefect::StutterBreach { state, .. } if state == "1")));
        assert!(raw.build().is_err());
        // watch outside alphabet
        let raw = RawObserver {
            name: "bad2".into(),
            alphabet,
            states: vec!["0".into()],
            initial: 0,
            watch: vec![EventSet::from_bits(0b100)],
            transitions: vec![],
        };
        let report = validate_observer(&raw);
        assert!(report
            .defects
            .iter()
            .any(|d| matches!(d, ObserverDefect::WatchOutsideAlphabet { .. })));
    }

    #[test]
    fn unwatched_self_loop_may_be_omitted_or_listed() {
        let alphabet = al();
        let explicit = RawObserver {
            name: "o".into(),
            alphabet: alphabet.clone(),
            states: vec!["0".into()],
            initial: 0,
            watch: vec![EventSet::singleton(a())],
            transitions: vec![(0, a(), 0), (0, b(), 0)],
        };
        let implicit = RawObserver {
            transitions: vec![(0, a(), 0)],
            ..explicit.clone()
        };
        assert_eq!(explicit.build().unwrap(), implicit.build().unwrap());
    }

    #[test]
    fn fig2_transducer_goldens() {
        let obs = fig2_observer();
        assert_eq!(obs.observe(&ids("baab")), ids("ab"));
        assert_eq!(obs.observe(&ids("bababbaab")), ids("ab"));
        assert_eq!(obs.observe(&ids("bbbbba")), ids("a"));
        assert_eq!(obs.observe(&ids("bbaaa")), ids("a"));
        assert_eq!(obs.observe(&ids("")), ids(""));
        // after a·b the observer watches nothing, so it is stuck
        assert_eq!(obs.watch(obs.state_after(&ids("ab"))), EventSet::EMPTY);
        assert_eq!(obs.observe(&ids("abababab")), ids("ab"));
    }

    #[test]
    fn output_feedback_reaches_the_same_state() {
        let obs = fig2_observer();
        for w in ["", "a", "b", "ab", "ba", "baab", "bbaaa", "abba"] {
            let word = ids(w);
            let out = obs.observe(&word);
            assert_eq!(obs.state_after(&word), obs.state_after(&out));
            // observing an observation changes nothing
            assert_eq!(obs.observe(&out), out);
        }
    }

    #[test]
    fn static_observer_is_identity_on_watched_events() {
        let alphabet = al();
        let obs = static_observer(alphabet.clone(), alphabet.full_set());
        assert_eq!(obs.observe(&ids("baab")), ids("baab"));
        let only_b = static_observer(alphabet, EventSet::singleton(b()));
        assert_eq!(only_b.observe(&ids("baab")), ids("bb"));
    }

    #[test]
    fn observe_run_projects_then_observes() {
        let plant = plant_b();
        let obs = fig2_observer();
        // f a b ε observed through fig2: f erased, a watched, b watched
        let run = Run {
            start: 0,
            steps: vec![
                (crate::alphabet::Label::Fault, 1),
                (crate::alphabet::Label::Event(a()), 2),
                (crate::alphabet::Label::Event(b()), 3),
                (crate::alphabet::Label::Epsilon, 3),
            ],
        };
        assert_eq!(obs.observe_run(&plant, &run).unwrap(), ids("ab"));
        // b a: b unwatched initially, a watched
        let run = Run {
            start: 0,
            steps: vec![
                (crate::alphabet::Label::Event(b()), 4),
                (crate::alphabet::Label::Event(a()), 5),
            ],
        };
        assert_eq!(obs.observe_run(&plant, &run).unwrap(), ids("a"));
    }

    #[test]
    fn annotated_histories() {
        let obs = fig2_observer();
        let h = obs.annotated_history(&ids("ab")).unwrap();
        assert_eq!(h.events, ids("ab"));
        assert_eq!(
            h.watches,
            vec![EventSet::singleton(a()), EventSet::singleton(b())]
        );
        assert_eq!(h.render(obs.alphabet()), "{a}·a·{b}·b");
        let empty = obs.annotated_history(&ids("")).unwrap();
        assert_eq!(empty.watches, vec![EventSet::singleton(a())]);
        assert!(empty.events.is_empty());
        assert_eq!(empty.render(obs.alphabet()), "{a}");
        // b is not watched initially, so "b" is not an observation
        assert!(matches!(
            obs.annotated_history(&ids("ba")),
            Err(Error::NotAnObservation(e)) if e == "b"
        ));
    }
}
