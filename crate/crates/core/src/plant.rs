//! Plants: nondeterministic finite automata over an observable alphabet
//! extended with the silent step ε and a single fault label f.

use std::collections::{BTreeSet, VecDeque};

use crate::alphabet::{check_name, Alphabet, Label};
use crate::error::{Error, Result};

pub type StateId = usize;

/// Default cap on the length bound accepted by [`Plant::enumerate_runs`].
pub const DEFAULT_RUN_CAP: usize = 12;

/// One transition of a [`Plant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: StateId,
    pub label: Label,
    pub dst: StateId,
}

/// Nondeterministic finite automaton with silent and fault steps.
///
/// Transitions are kept sorted by (src, label, dst) with duplicates removed;
/// that order is canonical for serialization and for every search, which is
/// what makes witnesses deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    name: String,
    alphabet: Alphabet,
    states: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition>,
    out: Vec<usize>, // out[q]..out[q+1] indexes transitions from q
}

impl Plant {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        states: Vec<String>,
        initial: StateId,
        mut transitions: Vec<Transition>,
    ) -> Result<Plant> {
        let name = name.into();
        check_name(&name)?;
        let mut seen = BTreeSet::new();
        for s in &states {
            check_name(s)?;
            if !seen.insert(s.clone()) {
                return Err(Error::DuplicateName(s.clone()));
            }
        }
        let n = states.len();
        if initial >= n {
            return Err(Error::StateOutOfRange(initial));
        }
        for t in &transitions {
            if t.src >= n {
                return Err(Error::StateOutOfRange(t.src));
            }
            if t.dst >= n {
                return Err(Error::StateOutOfRange(t.dst));
            }
            if let Label::Event(e) = t.label {
                if e.0 as usize >= alphabet.len() {
                    return Err(Error::EventOutOfRange(e.0));
                }
            }
        }
        transitions.sort();
        transitions.dedup();
        let mut out = vec![0usize; n + 1];
        for t in &transitions {
            out[t.src + 1] += 1;
        }
        for q in 0..n {
            out[q + 1] += out[q];
        }
        Ok(Plant {
            name,
            alphabet,
            states,
            initial,
            transitions,
            out,
        })
    }

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

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, q: StateId) -> &[Transition] {
        &self.transitions[self.out[q]..self.out[q + 1]]
    }

    /// States with no outgoing transition at all.
    pub fn deadlocks(&self) -> Vec<StateId> {
        (0..self.num_states())
            .filter(|&q| self.outgoing(q).is_empty())
            .collect()
    }

    /// Add an ε self-loop to every deadlocked state, making every state live.
    /// Returns the completed plant and whether anything was added; idempotent.
    pub fn epsilon_complete(&self) -> (Plant, bool) {
        let dead = self.deadlocks();
        if dead.is_empty() {
            return (self.clone(), false);
        }
        let mut transitions = self.transitions.clone();
        for q in dead {
            transitions.push(Transition {
                src: q,
                label: Label::Epsilon,
                dst: q,
            });
        }
        let p = Plant::new(
            self.name.clone(),
            self.alphabet.clone(),
            self.states.clone(),
            self.initial,
            transitions,
        )
        .expect("completion preserves validity");
        (p, true)
    }

    /// All runs from the initial state of length at most `max_len`, in
    /// breadth-first order (shorter runs first, canonical transition order
    /// within a length). `max_len` beyond `cap` is refused.
    pub fn enumerate_runs_capped(&self, max_len: usize, cap: usize) -> Result<Vec<Run>> {
        if max_len > cap {
            return Err(Error::RunLengthCap {
                requested: max_len,
                cap,
            });
        }
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        queue.push_back(Run::empty(self.initial));
        while let Some(run) = queue.pop_front() {
            if run.len() < max_len {
                for t in self.outgoing(run.target()) {
                    let mut next = run.clone();
                    next.steps.push((t.label, t.dst));
                    queue.push_back(next);
                }
            }
            out.push(run);
        }
        Ok(out)
    }

    pub fn enumerate_runs(&self, max_len: usize) -> Result<Vec<Run>> {
        self.enumerate_runs_capped(max_len, DEFAULT_RUN_CAP)
    }
}

/// A finite run: a start state and a sequence of (label, successor) steps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub start: StateId,
    pub steps: Vec<(Label, StateId)>,
}

impl Run {
    pub fn empty(start: StateId) -> Run {
        Run {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// State the run ends in.
    pub fn target(&self) -> StateId {
        self.steps.last().map_or(self.start, |&(_, q)| q)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.steps.iter().map(|&(l, _)| l).collect()
    }

    /// The trace: silent steps erased, fault and observable events kept.
    pub fn trace(&self) -> Vec<Label> {
        self.steps
            .iter()
            .map(|&(l, _)| l)
            .filter(|l| *l != Label::Epsilon)
            .collect()
    }

    /// Whether some fault is followed by at least `k` further steps.
    /// Checking the first fault suffices: it maximizes the suffix length.
    pub fn is_k_faulty(&self, k: u32) -> bool {
        self.steps
            .iter()
            .position(|&(l, _)| l == Label::Fault)
            .map(|i| self.len() - (i + 1) >= k as usize)
            .unwrap_or(false)
    }

    pub fn is_faulty(&self) -> bool {
        self.steps.iter().any(|&(l, _)| l == Label::Fault)
    }

    /// Check the run is a path of `plant` starting at its initial state.
    pub fn validate(&self, plant: &Plant) -> Result<()> {
        if self.start != plant.initial() {
            return Err(Error::MalformedRun(format!(
                "starts at state {} instead of the initial state",
                self.start
            )));
        }
        let mut q = self.start;
        for (i, &(l, dst)) in self.steps.iter().enumerate() {
            if dst >= plant.num_states() {
                return Err(Error::MalformedRun(format!(
                    "step {i} targets unknown state {dst}"
                )));
            }
            let ok = plant
                .outgoing(q)
                .iter()
                .any(|t| t.label == l && t.dst == dst);
            if !ok {
                return Err(Error::MalformedRun(format!(
                    "step {i} ({} -> {}) is not a transition",
                    plant.state_name(q),
                    plant.state_name(dst)
                )));
            }
            q = dst;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::EventId;
    use crate::testing::plant_b;

    #[test]
    fn plant_b_shape() {
        let b = plant_b();
        assert_eq!(b.num_states(), 6);
        // 7 transitions including the two ε self-loops on the sink states
        assert_eq!(b.transitions().len(), 7);
        assert_eq!(b.deadlocks(), Vec::<StateId>::new());
        let (again, added) = b.epsilon_complete();
        assert!(!added);
        assert_eq!(again, b);
    }

    #[test]
    fn epsilon_complete_adds_loops_once() {
        let al = Alphabet::new(["a"]).unwrap();
        let p = Plant::new(
            "p",
            al,
            vec!["x".into(), "y".into()],
            0,
            vec![Transition {
                src: 0,
                label: Label::Event(EventId(0)),
                dst: 1,
            }],
        )
        .unwrap();
        assert_eq!(p.deadlocks(), vec![1]);
        let (c, added) = p.epsilon_complete();
        assert!(added);
        assert_eq!(c.deadlocks(), Vec::<StateId>::new());
        assert_eq!(c.transitions().len(), 2);
        let (c2, added2) = c.epsilon_complete();
        assert!(!added2);
        assert_eq!(c2, c);
    }

    #[test]
    fn traces_and_k_faultiness() {
        let b = plant_b();
        let a = EventId(0);
        let bb = EventId(1);
        // f a b ε: trace f a b, 2-faulty (f followed by a b) but not 3-faulty
        let run = Run {
            start: 0,
            steps: vec![
                (Label::Fault, 1),
                (Label::Event(a), 2),
                (Label::Event(bb), 3),
                (Label::Epsilon, 3),
            ],
        };
        run.validate(&b).unwrap();
        assert_eq!(
            run.trace(),
            vec![Label::Fault, Label::Event(a), Label::Event(bb)]
        );
        assert!(run.is_k_faulty(0));
        assert!(run.is_k_faulty(3));
        assert!(!run.is_k_faulty(4));
        // the ε step after the fault counts toward k
        let nonfaulty = Run {
            start: 0,
            steps: vec![(Label::Event(bb), 4), (Label::Event(a), 5)],
        };
        nonfaulty.validate(&b).unwrap();
        assert!(!nonfaulty.is_k_faulty(0));
    }

    #[test]
    fn k_faulty_monotone_in_k() {
        let b = plant_b();
        for run in b.enumerate_runs(6).unwrap() {
            for k in 0..6u32 {
                if run.is_k_faulty(k + 1) {
                    assert!(run.is_k_faulty(k));
                }
            }
            assert_eq!(run.is_k_faulty(0), run.is_faulty());
        }
    }

    #[test]
    fn run_enumeration_is_exhaustive_and_duplicate_free() {
        let b = plant_b();
        let runs = b.enumerate_runs(2).unwrap();
        // by hand: ε; f, b; fa, bε(s4 has no ε)... enumerate:
        // len 0: (q0)
        // len 1: q0-f->q1, q0-b->q4
        // len 2: f then a, b then a
        assert_eq!(runs.len(), 5);
        let mut dedup = runs.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), runs.len());
        for r in &runs {
            r.validate(&b).unwrap();
            assert!(r.len() <= 2);
        }
        // breadth-first: lengths are nondecreasing
        for w in runs.windows(2) {
            assert!(w[0].len() <= w[1].len());
        }
        assert!(matches!(
            b.enumerate_runs(13),
            Err(Error::RunLengthCap {
                requested: 13,
                cap: 12
            })
        ));
    }

    #[test]
    fn validate_rejects_non_paths() {
        let b = plant_b();
        let bad = Run {
            start: 0,
            steps: vec![(Label::Event(EventId(0)), 2)],
        };
        assert!(matches!(bad.validate(&b), Err(Error::MalformedRun(_))));
        let wrong_start = Run::empty(1);
        assert!(matches!(
            wrong_start.validate(&b),
            Err(Error::MalformedRun(_))
        ));
    }
}
