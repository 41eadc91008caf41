//! Products of automata: synchronous composition and the masked product of a
//! plant with an observer.

use std::collections::{HashMap, VecDeque};

use crate::alphabet::{Alphabet, Label};
use crate::error::{Error, Result};
use crate::observer::Observer;
use crate::plant::{Plant, Run, StateId, Transition};

/// Synchronous product: shared observable events synchronize, everything
/// else (private events, ε, f) interleaves. Alphabets may differ; the
/// product alphabet is the union, left operand's order first.
pub fn sync_product(a: &Plant, b: &Plant) -> Result<Plant> {
    let mut names: Vec<String> = a.alphabet().names().to_vec();
    for n in b.alphabet().names() {
        if a.alphabet().id(n).is_none() {
            names.push(n.clone());
        }
    }
    let alphabet = Alphabet::new(names)?;
    let relabel = |al: &Alphabet, l: Label| match l {
        Label::Event(e) => Label::Event(alphabet.id(al.name(e)).expect("union alphabet")),
        other => other,
    };
    let shared = |l: Label| match l {
        Label::Event(e) => b.alphabet().id(a.alphabet().name(e)).is_some(),
        _ => false,
    };
    let shared_b = |l: Label| match l {
        Label::Event(e) => a.alphabet().id(b.alphabet().name(e)).is_some(),
        _ => false,
    };

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = Vec::new();
    let mut queue = VecDeque::new();
    let intern = |pair: (StateId, StateId),
                  index: &mut HashMap<(StateId, StateId), StateId>,
                  pairs: &mut Vec<(StateId, StateId)>,
                  queue: &mut VecDeque<(StateId, StateId)>| {
        *index.entry(pair).or_insert_with(|| {
            pairs.push(pair);
            queue.push_back(pair);
            pairs.len() - 1
        })
    };
    intern(
        (a.initial(), b.initial()),
        &mut index,
        &mut pairs,
        &mut queue,
    );
    let mut transitions = Vec::new();
    while let Some((qa, qb)) = queue.pop_front() {
        let src = index[&(qa, qb)];
        for ta in a.outgoing(qa) {
            if shared(ta.label) {
                let name = a.alphabet().name(ta.label.event().unwrap());
                let eb = b.alphabet().id(name).unwrap();
                for tb in b.outgoing(qb) {
                    if tb.label == Label::Event(eb) {
                        let dst = intern((ta.dst, tb.dst), &mut index, &mut pairs, &mut queue);
                        transitions.push(Transition {
                            src,
                            label: relabel(a.alphabet(), ta.label),
                            dst,
                        });
                    }
                }
            } else {
                let dst = intern((ta.dst, qb), &mut index, &mut pairs, &mut queue);
                transitions.push(Transition {
                    src,
                    label: relabel(a.alphabet(), ta.label),
                    dst,
                });
            }
        }
        for tb in b.outgoing(qb) {
            if !shared_b(tb.label) {
                let dst = intern((qa, tb.dst), &mut index, &mut pairs, &mut queue);
                transitions.push(Transition {
                    src,
                    label: relabel(b.alphabet(), tb.label),
                    dst,
                });
            }
        }
    }
    let state_names = pairs
        .iter()
        .map(|&(qa, qb)| format!("{}*{}", a.state_name(qa), b.state_name(qb)))
        .collect();
    Plant::new(
        format!("{}*{}", a.name(), b.name()),
        alphabet,
        state_names,
        0,
        transitions,
    )
}

/// Plant composed with an observer, with unwatched observable events
/// relabelled to ε. Diagnosing the original plant under the observer is the
/// same as diagnosing this product under full observation.
#[derive(Debug, Clone)]
pub struct MaskedProduct {
    /// The product automaton; its alphabet is the plant's.
    pub plant: Plant,
    /// Product state -> (plant state, observer state).
    pub pairs: Vec<(StateId, StateId)>,
    /// Per product transition (parallel to `plant.transitions()`): the label
    /// the step carries in the original plant.
    pub origin: Vec<Label>,
}

pub fn masked_product(plant: &Plant, obs: &Observer) -> Result<MaskedProduct> {
    if plant.alphabet() != obs.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut queue = VecDeque::new();
    let intern = |pair: (StateId, StateId),
                  index: &mut HashMap<(StateId, StateId), StateId>,
                  pairs: &mut Vec<(StateId, StateId)>,
                  queue: &mut VecDeque<(StateId, StateId)>| {
        *index.entry(pair).or_insert_with(|| {
            pairs.push(pair);
            queue.push_back(pair);
            pairs.len() - 1
        })
    };
    intern(
        (plant.initial(), obs.initial()),
        &mut index,
        &mut pairs,
        &mut queue,
    );
    // (product transition, original label)
    let mut annotated: Vec<(Transition, Label)> = Vec::new();
    while let Some((q, s)) = queue.pop_front() {
        let src = index[&(q, s)];
        for t in plant.outgoing(q) {
            let (label, s2) = match t.label {
                Label::Event(e) => {
                    if obs.watch(s).contains(e) {
                        (Label::Event(e), obs.step(s, e))
                    } else {
                        // stutter closure keeps the observer in place
                        (Label::Epsilon, s)
                    }
                }
                silent => (silent, s),
            };
            let dst = intern((t.dst, s2), &mut index, &mut pairs, &mut queue);
            annotated.push((Transition { src, label, dst }, t.label));
        }
    }
    // identical product transitions with different origins collapse to one;
    // keeping the least origin keeps the mapping deterministic
    annotated.sort();
    annotated.dedup_by_key(|&mut (t, _)| t);
    let (transitions, origin): (Vec<_>, Vec<_>) = annotated.into_iter().unzip();
    let state_names = pairs
        .iter()
        .map(|&(q, s)| format!("{}*{}", plant.state_name(q), obs.state_name(s)))
        .collect();
    let product = Plant::new(
        format!("{}*{}", plant.name(), obs.name()),
        plant.alphabet().clone(),
        state_names,
        0,
        transitions,
    )?;
    debug_assert_eq!(product.transitions().len(), origin.len());
    Ok(MaskedProduct {
        plant: product,
        pairs,
        origin,
    })
}

impl MaskedProduct {
    fn origin_of(&self, src: StateId, label: Label, dst: StateId) -> Label {
        let ts = self.plant.transitions();
        let idx = ts
            .binary_search(&Transition { src, label, dst })
            .expect("step is a product transition");
        self.origin[idx]
    }

    /// Map product-run steps back to plant steps (original labels, plant
    /// components of the states).
    pub fn plant_steps(&self, from: StateId, steps: &[(Label, StateId)]) -> Vec<(Label, StateId)> {
        let mut cur = from;
        let mut out = Vec::with_capacity(steps.len());
        for &(l, dst) in steps {
            out.push((self.origin_of(cur, l, dst), self.pairs[dst].0));
            cur = dst;
        }
        out
    }

    /// Map a product run back to a run of the original plant.
    pub fn plant_run(&self, run: &Run) -> Run {
        Run {
            start: self.pairs[run.start].0,
            steps: self.plant_steps(run.start, &run.steps),
        }
    }
}
