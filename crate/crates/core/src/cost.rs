//! Observation cost: the price of watching, averaged over time.
//!
//! Watching an event set costs its size per time step. The cost of an
//! observer against a plant is the worst long-run average over infinite runs,
//! which is a maximum mean cycle in the synchronized product and is computed
//! exactly with Karp's recurrence.

use std::collections::{HashMap, VecDeque};

use num::rational::Ratio;

use crate::alphabet::Label;
use crate::error::{Error, Result};
use crate::observer::Observer;
use crate::plant::{Plant, Run, StateId, Transition};

/// Exact rational value; all costs and game values use this.
pub type Rational = Ratio<i64>;

/// A plant with a weight per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedAutomaton {
    pub plant: Plant,
    pub weights: Vec<i64>,
}

impl WeightedAutomaton {
    pub fn new(plant: Plant, weights: Vec<i64>) -> Result<WeightedAutomaton> {
        if weights.len() != plant.num_states() {
            return Err(Error::InvalidGame(format!(
                "{} weights for {} states",
                weights.len(),
                plant.num_states()
            )));
        }
        Ok(WeightedAutomaton { plant, weights })
    }

    /// Every state can take a step (infinite runs exist from everywhere).
    pub fn is_complete(&self) -> bool {
        (0..self.plant.num_states()).all(|q| !self.plant.outgoing(q).is_empty())
    }
}

/// A maximum-mean cycle: its mean and its states in order (the edge closing
/// the cycle back to the first state is implicit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeanCycle {
    pub value: Rational,
    pub cycle: Vec<StateId>,
}

/// Karp's recurrence over the part reachable from the initial state, state
/// weights read as the weight of each step's destination. Errors when no
/// cycle is reachable.
pub fn karp_max_mean(wa: &WeightedAutomaton) -> Result<MeanCycle> {
    let plant = &wa.plant;
    // dense indexing of reachable states, adjacency deduplicated
    let mut reach: Vec<StateId> = Vec::new();
    let mut dense: HashMap<StateId, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    reach.push(plant.initial());
    dense.insert(plant.initial(), 0);
    queue.push_back(plant.initial());
    while let Some(q) = queue.pop_front() {
        for t in plant.outgoing(q) {
            if let std::collections::hash_map::Entry::Vacant(e) = dense.entry(t.dst) {
                e.insert(reach.len());
                reach.push(t.dst);
                queue.push_back(t.dst);
            }
        }
    }
    let n = reach.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, &q) in reach.iter().enumerate() {
        let mut targets: Vec<usize> = plant.outgoing(q).iter().map(|t| dense[&t.dst]).collect();
        targets.sort_unstable();
        targets.dedup();
        adj[u] = targets;
    }
    let w = |v: usize| wa.weights[reach[v]];

    // d[t][v]: best weight of a t-step walk from the initial state to v,
    // counting the weight of every visited state including the start
    const NONE: i64 = i64::MIN;
    let mut d = vec![vec![NONE; n]; n + 1];
    d[0][0] = w(0);
    for t in 1..=n {
        for u in 0..n {
            if d[t - 1][u] == NONE {
                continue;
            }
            for &v in &adj[u] {
                let cand = d[t - 1][u] + w(v);
                if cand > d[t][v] {
                    d[t][v] = cand;
                }
            }
        }
    }
    let mut best: Option<Rational> = None;
    for (v, &dnv) in d[n].iter().enumerate() {
        if dnv == NONE {
            continue;
        }
        let mut worst: Option<Rational> = None;
        for (t, row) in d.iter().enumerate().take(n) {
            if row[v] == NONE {
                continue;
            }
            let r = Rational::new(dnv - row[v], (n - t) as i64);
            if worst.is_none_or(|x| r < x) {
                worst = Some(r);
            }
        }
        let worst = worst.expect("an n-step walk has a shorter prefix to the same state");
        if best.is_none_or(|x| worst > x) {
            best = Some(worst);
        }
    }
    let value = best.ok_or(Error::NoCycle)?;

    // witness: after subtracting the mean from every step, all cycles have
    // non-positive weight and some cycle has weight zero; longest-walk
    // potentials make that cycle's edges tight
    let (p, q) = (*value.numer(), *value.denom());
    let wprime = |u: usize, v: usize| {
        let _ = u;
        q * w(v) - p
    };
    let mut pot = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            for &v in &adj[u] {
                let cand = pot[u] + wprime(u, v);
                if cand > pot[v] {
                    pot[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    // a cycle in the tight subgraph has mean exactly `value`
    let tight = |u: usize, v: usize| pot[u] + wprime(u, v) == pot[v];
    let mut color = vec![0u8; n]; // 0 unseen, 1 on stack, 2 done
    let mut cycle: Vec<usize> = Vec::new();
    'outer: for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut path: Vec<usize> = vec![root];
        color[root] = 1;
        while let Some(&mut (u, ref mut ei)) = stack.last_mut() {
            let next = adj[u].iter().skip(*ei).find(|&&v| tight(u, v)).copied();
            match next {
                Some(v) => {
                    *ei = adj[u].iter().position(|&x| x == v).unwrap() + 1;
                    if color[v] == 1 {
                        let at = path.iter().position(|&x| x == v).unwrap();
                        cycle = path[at..].to_vec();
                        break 'outer;
                    }
                    if color[v] == 0 {
                        color[v] = 1;
                        stack.push((v, 0));
                        path.push(v);
                    }
                }
                None => {
                    color[u] = 2;
                    stack.pop();
                    path.pop();
                }
            }
        }
    }
    assert!(
        !cycle.is_empty(),
        "a tight cycle exists whenever a cycle does"
    );
    debug_assert_eq!(
        {
            let sum: i64 = cycle.iter().map(|&v| w(v)).sum();
            Rational::new(sum, cycle.len() as i64)
        },
        value
    );
    Ok(MeanCycle {
        value,
        cycle: cycle.into_iter().map(|v| reach[v]).collect(),
    })
}

/// Average watch-set size an observer pays over a word and all its prefixes,
/// including the empty one: the sum of |watch| after each prefix, divided by
/// the number of prefixes.
pub fn word_cost(obs: &Observer, word: &[crate::alphabet::EventId]) -> Rational {
    let mut s = obs.initial();
    let mut total = obs.watch(s).len() as i64;
    for &e in word {
        s = obs.step(s, e);
        total += obs.watch(s).len() as i64;
    }
    Rational::new(total, word.len() as i64 + 1)
}

/// Average watch-set size along a plant run: the observer state evolves on
/// watched events only, and each of the run's n+1 time points is charged the
/// current watch-set size.
pub fn run_cost(plant: &Plant, obs: &Observer, run: &Run) -> Result<Rational> {
    if plant.alphabet() != obs.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    run.validate(plant)?;
    let mut s = obs.initial();
    let mut total = obs.watch(s).len() as i64;
    for &(label, _) in &run.steps {
        if let Label::Event(e) = label {
            if obs.watch(s).contains(e) {
                s = obs.step(s, e);
            }
        }
        total += obs.watch(s).len() as i64;
    }
    Ok(Rational::new(total, run.len() as i64 + 1))
}

/// The synchronized product driving [`observer_cost`]: plant and observer
/// step together (the observer stutters on unwatched events and stays put on
/// silent steps), each product state weighted by the observer component.
pub fn cost_automaton(
    plant: &Plant,
    obs: &Observer,
    weight: impl Fn(&Observer, StateId) -> i64,
) -> Result<(WeightedAutomaton, Vec<(StateId, StateId)>)> {
    if plant.alphabet() != obs.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let (plant, _) = plant.epsilon_complete();
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((plant.initial(), obs.initial()), 0);
    pairs.push((plant.initial(), obs.initial()));
    queue.push_back((plant.initial(), obs.initial()));
    let mut transitions = Vec::new();
    while let Some((q, s)) = queue.pop_front() {
        let src = index[&(q, s)];
        for t in plant.outgoing(q) {
            let s2 = match t.label {
                Label::Event(e) if obs.watch(s).contains(e) => obs.step(s, e),
                _ => s,
            };
            let key = (t.dst, s2);
            let dst = *index.entry(key).or_insert_with(|| {
                pairs.push(key);
                queue.push_back(key);
                pairs.len() - 1
            });
            transitions.push(Transition {
                src,
                label: t.label,
                dst,
            });
        }
    }
    let names = pairs
        .iter()
        .map(|&(q, s)| format!("{}*{}", plant.state_name(q), obs.state_name(s)))
        .collect();
    let product = Plant::new(
        format!("{}*{}", plant.name(), obs.name()),
        plant.alphabet().clone(),
        names,
        0,
        transitions,
    )?;
    let weights = pairs.iter().map(|&(_, s)| weight(obs, s)).collect();
    let wa = WeightedAutomaton::new(product, weights)?;
    debug_assert!(wa.is_complete());
    Ok((wa, pairs))
}

/// Worst-case long-run average cost of running `obs` against `plant`, with a
/// witness cycle in (plant state, observer state) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverCost {
    pub value: Rational,
    pub cycle: Vec<(StateId, StateId)>,
    pub product_states: usize,
}

/// Observer cost with a custom state-weight hook.
pub fn observer_cost_with(
    plant: &Plant,
    obs: &Observer,
    weight: impl Fn(&Observer, StateId) -> i64,
) -> Result<ObserverCost> {
    let (wa, pairs) = cost_automaton(plant, obs, weight)?;
    let mc = karp_max_mean(&wa)?;
    Ok(ObserverCost {
        value: mc.value,
        cycle: mc.cycle.into_iter().map(|v| pairs[v]).collect(),
        product_states: pairs.len(),
    })
}

/// Observer cost under the standard weighting: watching n events costs n per
/// time step.
pub fn observer_cost(plant: &Plant, obs: &Observer) -> Result<ObserverCost> {
    observer_cost_with(plant, obs, |o, s| o.watch(s).len() as i64)
}

/// Largest run cost over all runs of exactly `len` steps, by dynamic
/// programming over the synchronized product. Used to cross-check that
/// finite-horizon averages converge to the cycle value.
pub fn max_run_cost_at(plant: &Plant, obs: &Observer, len: usize) -> Result<Rational> {
    let (wa, _) = cost_automaton(plant, obs, |o, s| o.watch(s).len() as i64)?;
    let n = wa.plant.num_states();
    const NONE: i64 = i64::MIN;
    let mut d = vec![NONE; n];
    d[wa.plant.initial()] = wa.weights[wa.plant.initial()];
    for _ in 0..len {
        let mut next = vec![NONE; n];
        for (u, &du) in d.iter().enumerate() {
            if du == NONE {
                continue;
            }
            for t in wa.plant.outgoing(u) {
                let cand = du + wa.weights[t.dst];
                if cand > next[t.dst] {
                    next[t.dst] = cand;
                }
            }
        }
        d = next;
    }
    let best = d.into_iter().max().expect("complete product has runs");
    assert!(best != NONE, "complete product has runs of every length");
    Ok(Rational::new(best, len as i64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, EventId, EventSet};
    use crate::observer::static_observer;
    use crate::testing::{
        fig2_observer, plant_b, random_observer, random_plant, random_weighted, rng, PlantOptions,
    };

    fn ids(s: &str) -> Vec<EventId> {
        s.bytes()
            .map(|c| match c {
                b'a' => EventId(0),
                b'b' => EventId(1),
                _ => panic!(),
            })
            .collect()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn word_and_run_cost_goldens() {
        let obs = fig2_observer();
        assert_eq!(word_cost(&obs, &ids("ab")), rat(2, 3));
        assert_eq!(word_cost(&obs, &ids("")), rat(1, 1));
        // the observation "ab" and any word producing it cost differently:
        // baab visits watch sets {a},{a},{b},{b},∅
        assert_eq!(word_cost(&obs, &ids("baab")), rat(4, 5));

        let plant = plant_b();
        let run = Run {
            start: 0,
            steps: vec![
                (Label::Fault, 1),
                (Label::Event(EventId(0)), 2),
                (Label::Event(EventId(1)), 3),
            ],
        };
        assert_eq!(run_cost(&plant, &obs, &run).unwrap(), rat(3, 4));
        let full = static_observer(plant.alphabet().clone(), plant.alphabet().full_set());
        assert_eq!(run_cost(&plant, &full, &run).unwrap(), rat(2, 1));
    }

    #[test]
    fn karp_on_a_two_cycle() {
        // x <-> y with weights 2 and 4: the only cycle has mean 3
        let al = Alphabet::new(["a"]).unwrap();
        let t = |s, d| Transition {
            src: s,
            label: Label::Event(EventId(0)),
            dst: d,
        };
        let plant = Plant::new(
            "two",
            al,
            vec!["x".into(), "y".into()],
            0,
            vec![t(0, 1), t(1, 0)],
        )
        .unwrap();
        let wa = WeightedAutomaton::new(plant, vec![2, 4]).unwrap();
        let mc = karp_max_mean(&wa).unwrap();
        assert_eq!(mc.value, rat(3, 1));
        assert_eq!(mc.cycle.len(), 2);
    }

    #[test]
    fn karp_picks_the_heavier_loop() {
        // self-loops of weight 2 and 3 reachable from the start
        let al = Alphabet::new(["a", "b"]).unwrap();
        let e = |s, ev, d| Transition {
            src: s,
            label: Label::Event(EventId(ev)),
            dst: d,
        };
        let plant = Plant::new(
            "loops",
            al,
            vec!["s".into(), "x".into(), "y".into()],
            0,
            vec![e(0, 0, 1), e(0, 1, 2), e(1, 0, 1), e(2, 0, 2)],
        )
        .unwrap();
        let wa = WeightedAutomaton::new(plant, vec![7, 2, 3]).unwrap();
        let mc = karp_max_mean(&wa).unwrap();
        assert_eq!(mc.value, rat(3, 1));
        assert_eq!(mc.cycle, vec![2]);
    }

    #[test]
    fn karp_errors_without_a_reachable_cycle() {
        let al = Alphabet::new(["a"]).unwrap();
        let plant = Plant::new(
            "dag",
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
        let wa = WeightedAutomaton::new(plant, vec![1, 1]).unwrap();
        assert!(!wa.is_complete());
        assert!(matches!(karp_max_mean(&wa), Err(Error::NoCycle)));
    }

    #[test]
    fn observer_cost_goldens_for_b() {
        let plant = plant_b();
        let full = static_observer(plant.alphabet().clone(), plant.alphabet().full_set());
        let c = observer_cost(&plant, &full).unwrap();
        assert_eq!(c.value, rat(2, 1));

        let c = observer_cost(&plant, &fig2_observer()).unwrap();
        assert_eq!(c.value, rat(1, 1));
        // the expensive cycle is the non-faulty branch stuck watching {b}
        let (q, s) = c.cycle[0];
        assert_eq!(plant.state_name(q), "q5");
        assert_eq!(fig2_observer().watch(s), EventSet::singleton(EventId(1)));

        let nothing = static_observer(plant.alphabet().clone(), EventSet::EMPTY);
        assert_eq!(observer_cost(&plant, &nothing).unwrap().value, rat(0, 1));
    }

    #[test]
    fn karp_matches_cycle_enumeration_on_random_automata() {
        let opts = PlantOptions {
            max_states: 8,
            max_events: 3,
            ..PlantOptions::default()
        };
        let mut r = rng(60);
        for _ in 0..200 {
            let wa = random_weighted(&mut r, &opts, 6);
            let mc = karp_max_mean(&wa).unwrap();
            let expected = crate::testing::oracle::max_mean_by_cycle_enumeration(&wa)
                .expect("complete automaton has a cycle");
            assert_eq!(mc.value, expected);
            // witness is a real cycle achieving the value
            let m = mc.cycle.len();
            for (i, &q) in mc.cycle.iter().enumerate() {
                let next = mc.cycle[(i + 1) % m];
                assert!(
                    wa.plant.outgoing(q).iter().any(|t| t.dst == next),
                    "witness cycle must follow transitions"
                );
            }
            let sum: i64 = mc.cycle.iter().map(|&q| wa.weights[q]).sum();
            assert_eq!(rat(sum, m as i64), mc.value);
        }
    }

    #[test]
    fn constant_weights_give_that_constant() {
        let opts = PlantOptions::default();
        let mut r = rng(61);
        for _ in 0..40 {
            let plant = random_plant(&mut r, &opts);
            let obs = random_observer(&mut r, plant.alphabet(), 3);
            let c = observer_cost_with(&plant, &obs, |_, _| 5).unwrap();
            assert_eq!(c.value, rat(5, 1));
        }
    }

    #[test]
    fn shifting_weights_shifts_the_cost() {
        let opts = PlantOptions::default();
        let mut r = rng(62);
        for _ in 0..40 {
            let plant = random_plant(&mut r, &opts);
            let obs = random_observer(&mut r, plant.alphabet(), 3);
            let base = observer_cost(&plant, &obs).unwrap().value;
            let shifted = observer_cost_with(&plant, &obs, |o, s| o.watch(s).len() as i64 + 3)
                .unwrap()
                .value;
            assert_eq!(shifted, base + rat(3, 1));
        }
    }

    #[test]
    fn finite_horizon_maxima_approach_the_cycle_value() {
        let plant = plant_b();
        let obs = fig2_observer();
        let nu = observer_cost(&plant, &obs).unwrap().value;
        let at64 = max_run_cost_at(&plant, &obs, 64).unwrap();
        let diff = if at64 > nu { at64 - nu } else { nu - at64 };
        assert!(diff <= rat(2 * 2, 64), "got {at64} vs {nu}");
    }

    #[test]
    fn observation_never_costs_more_than_watching_everything() {
        let opts = PlantOptions::default();
        let mut r = rng(63);
        for _ in 0..40 {
            let plant = random_plant(&mut r, &opts);
            let obs = random_observer(&mut r, plant.alphabet(), 3);
            let full = static_observer(plant.alphabet().clone(), plant.alphabet().full_set());
            let c_obs = observer_cost(&plant, &obs).unwrap().value;
            let c_full = observer_cost(&plant, &full).unwrap().value;
            assert!(c_obs <= rat(plant.alphabet().len() as i64, 1));
            assert!(c_full <= rat(plant.alphabet().len() as i64, 1));
            assert!(c_obs >= rat(0, 1));
        }
    }
}
