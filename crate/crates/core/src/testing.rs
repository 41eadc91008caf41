//! Reference models and seeded random generators, shared by unit tests,
//! property tests, and the acceptance suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, EventId, EventSet, Label};
use crate::game::{Player, WeightedGraphGame};
use crate::observer::{Observer, RawObserver};
use crate::plant::{Plant, Transition};

/// Two-branch plant over {a,b}: a faulty branch f·a·b·ε^ω and a non-faulty
/// branch b·a·ε^ω. The smallest plant on which static and dynamic observers
/// genuinely differ.
pub fn plant_b() -> Plant {
    let alphabet = Alphabet::new(["a", "b"]).unwrap();
    let (a, b) = (EventId(0), EventId(1));
    let st = |s: usize, label, d: usize| Transition {
        src: s,
        label,
        dst: d,
    };
    Plant::new(
        "B",
        alphabet,
        vec![
            "q0".into(),
            "q1".into(),
            "q2".into(),
            "q3".into(),
            "q4".into(),
            "q5".into(),
        ],
        0,
        vec![
            st(0, Label::Fault, 1),
            st(1, Label::Event(a), 2),
            st(2, Label::Event(b), 3),
            st(3, Label::Epsilon, 3),
            st(0, Label::Event(b), 4),
            st(4, Label::Event(a), 5),
            st(5, Label::Epsilon, 5),
        ],
    )
    .unwrap()
}

/// Three-state observer over {a,b}: watch a, after a watch b, after a·b stop.
pub fn fig2_observer() -> Observer {
    let alphabet = Alphabet::new(["a", "b"]).unwrap();
    let (a, b) = (EventId(0), EventId(1));
    RawObserver {
        name: "watch_ab_once".into(),
        alphabet,
        states: vec!["0".into(), "1".into(), "2".into()],
        initial: 0,
        watch: vec![
            EventSet::singleton(a),
            EventSet::singleton(b),
            EventSet::EMPTY,
        ],
        transitions: vec![(0, a, 1), (1, b, 2)],
    }
    .build()
    .unwrap()
}

/// Plant whose root loops silently on c with a fault available at every lap;
/// the faulty branch emits one a and goes quiet. Any diagnosing observer must
/// keep watching a while c spins, so its long-run cost cannot drop to zero.
pub fn plant_delayed_fault() -> Plant {
    let alphabet = Alphabet::new(["a", "c"]).unwrap();
    let (a, c) = (EventId(0), EventId(1));
    let st = |s: usize, label, d: usize| Transition {
        src: s,
        label,
        dst: d,
    };
    Plant::new(
        "delayed_fault",
        alphabet,
        vec!["r0".into(), "r1".into(), "r2".into()],
        0,
        vec![
            st(0, Label::Event(c), 0),
            st(0, Label::Fault, 1),
            st(1, Label::Event(a), 2),
            st(2, Label::Epsilon, 2),
        ],
    )
    .unwrap()
}

/// Deterministic RNG for a test seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Options for [`random_plant`].
#[derive(Debug, Clone)]
pub struct PlantOptions {
    pub max_states: usize,
    pub max_events: usize,
    /// Expected transitions per state (at least 1 is drawn).
    pub density: f64,
    pub fault_probability: f64,
    pub epsilon_probability: f64,
}

impl Default for PlantOptions {
    fn default() -> Self {
        PlantOptions {
            max_states: 6,
            max_events: 3,
            density: 2.0,
            fault_probability: 0.35,
            epsilon_probability: 0.3,
        }
    }
}

/// Random plant: connected enough to be interesting (every non-initial state
/// gets one incoming transition from an earlier state), labels drawn from
/// events/ε/f by the configured probabilities.
pub fn random_plant(rng: &mut ChaCha8Rng, opts: &PlantOptions) -> Plant {
    let n = rng.random_range(1..=opts.max_states);
    let ev = rng.random_range(1..=opts.max_events);
    let alphabet = Alphabet::new((0..ev).map(|i| format!("e{i}"))).unwrap();
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut transitions = Vec::new();
    let draw_label = |rng: &mut ChaCha8Rng| {
        let x: f64 = rng.random();
        if x < opts.fault_probability {
            Label::Fault
        } else if x < opts.fault_probability + opts.epsilon_probability {
            Label::Epsilon
        } else {
            Label::Event(EventId(rng.random_range(0..ev) as u8))
        }
    };
    for q in 1..n {
        let src = rng.random_range(0..q);
        transitions.push(Transition {
            src,
            label: draw_label(rng),
            dst: q,
        });
    }
    let extra = (opts.density * n as f64) as usize;
    for _ in 0..extra {
        transitions.push(Transition {
            src: rng.random_range(0..n),
            label: draw_label(rng),
            dst: rng.random_range(0..n),
        });
    }
    Plant::new("random", alphabet, states, 0, transitions).unwrap()
}

/// Random well-formed observer over `alphabet` with up to `max_states`
/// states. Watched transitions target uniformly random states.
pub fn random_observer(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max_states: usize) -> Observer {
    let n = rng.random_range(1..=max_states);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut watch = Vec::with_capacity(n);
    let mut transitions = Vec::new();
    for s in 0..n {
        let bits: u32 = rng.random_range(0..(1u32 << alphabet.len()));
        let w = EventSet::from_bits(bits);
        watch.push(w);
        for e in w.iter() {
            transitions.push((s, e, rng.random_range(0..n)));
        }
    }
    RawObserver {
        name: "random".into(),
        alphabet: alphabet.clone(),
        states,
        initial: 0,
        watch,
        transitions,
    }
    .build()
    .expect("generated observer is well formed")
}

/// Random weighted automaton: a random plant (forced live) with random state
/// weights in `0..=max_weight`.
pub fn random_weighted(
    rng: &mut ChaCha8Rng,
    opts: &PlantOptions,
    max_weight: i64,
) -> crate::cost::WeightedAutomaton {
    let (plant, _) = random_plant(rng, opts).epsilon_complete();
    let weights = (0..plant.num_states())
        .map(|_| rng.random_range(0..=max_weight))
        .collect();
    crate::cost::WeightedAutomaton::new(plant, weights).unwrap()
}

/// Options for [`random_game`].
#[derive(Debug, Clone)]
pub struct GameOptions {
    pub max_vertices: usize,
    pub max_degree: usize,
    pub max_weight: i64,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            max_vertices: 10,
            max_degree: 3,
            max_weight: 4,
        }
    }
}

/// Random bipartite mean-payoff game: vertices alternate owners by parity,
/// every edge crosses sides, every vertex keeps out-degree at least 1, and
/// unreachable vertices are pruned by construction (edges from earlier
/// vertices reach every later one).
pub fn random_game(rng: &mut ChaCha8Rng, opts: &GameOptions) -> WeightedGraphGame {
    let n = rng.random_range(2..=opts.max_vertices.max(2));
    let owner: Vec<Player> = (0..n)
        .map(|v| if v % 2 == 0 { Player::Max } else { Player::Min })
        .collect();
    let other = |v: usize, rng: &mut ChaCha8Rng| {
        // a vertex of the other parity, preferring earlier ones for reachability
        let mut tries = 0;
        loop {
            let u = rng.random_range(0..n);
            if u % 2 != v % 2 {
                return u;
            }
            tries += 1;
            if tries > 64 {
                return if v.is_multiple_of(2) { 1 } else { 0 };
            }
        }
    };
    let mut edges: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    // chain v -> v+1 guarantees reachability from 0 and out-degree >= 1
    // everywhere except the last vertex
    for (v, out) in edges.iter_mut().enumerate() {
        let t = if v + 1 < n { v + 1 } else { other(v, rng) };
        out.push((t, rng.random_range(-opts.max_weight..=opts.max_weight)));
    }
    for (v, out) in edges.iter_mut().enumerate() {
        let deg = rng.random_range(0..opts.max_degree);
        for _ in 0..deg {
            let t = other(v, rng);
            out.push((t, rng.random_range(-opts.max_weight..=opts.max_weight)));
        }
    }
    let names: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
    WeightedGraphGame::new(names, owner, edges, 0).expect("generated game is well formed")
}

/// Slow reference implementations, written straight from the definitions,
/// that the fast algorithms are checked against. Nothing here shares code
/// with the twin construction, Karp's recurrence, or value iteration.
pub mod oracle {
    use std::collections::{BTreeSet, HashMap, VecDeque};

    use crate::alphabet::Label;
    use crate::cost::{Rational, WeightedAutomaton};
    use crate::game::{Player, WeightedGraphGame};
    use crate::observer::Observer;
    use crate::plant::{Plant, Run, StateId};

    /// Decides (Obs,k)-diagnosability from the definition: search for a
    /// k-faulty run and a fault-free run with the same observation, pairing
    /// the two runs move by move. Watched events advance both runs and the
    /// observer together; everything else advances one side silently.
    pub fn diagnosable(plant: &Plant, obs: &Observer, k: u32) -> bool {
        let (plant, _) = plant.epsilon_complete();
        let k = k as i64;
        // (left state, right state, observer state, steps since first fault
        // on the left, or -1), counter saturating at k
        let start = (plant.initial(), plant.initial(), obs.initial(), -1i64);
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((lq, rq, s, j)) = queue.pop_front() {
            if j >= k {
                return false;
            }
            let bump = |j: i64, fault: bool| -> i64 {
                if fault && j < 0 {
                    0
                } else if j >= 0 {
                    (j + 1).min(k)
                } else {
                    j
                }
            };
            let push = |st: (StateId, StateId, StateId, i64),
                        seen: &mut BTreeSet<_>,
                        queue: &mut VecDeque<_>| {
                if seen.insert(st) {
                    queue.push_back(st);
                }
            };
            for t in plant.outgoing(lq) {
                match t.label {
                    Label::Epsilon => push((t.dst, rq, s, bump(j, false)), &mut seen, &mut queue),
                    Label::Fault => push((t.dst, rq, s, bump(j, true)), &mut seen, &mut queue),
                    Label::Event(e) if !obs.watch(s).contains(e) => {
                        push((t.dst, rq, s, bump(j, false)), &mut seen, &mut queue)
                    }
                    Label::Event(e) => {
                        // watched: the fault-free side must produce the same
                        // observable event at the same moment
                        for t2 in plant.outgoing(rq) {
                            if t2.label == Label::Event(e) {
                                push(
                                    (t.dst, t2.dst, obs.step(s, e), bump(j, false)),
                                    &mut seen,
                                    &mut queue,
                                );
                            }
                        }
                    }
                }
            }
            for t2 in plant.outgoing(rq) {
                match t2.label {
                    Label::Epsilon => push((lq, t2.dst, s, j), &mut seen, &mut queue),
                    Label::Fault => {} // the comparison run stays fault-free
                    Label::Event(e) if !obs.watch(s).contains(e) => {
                        push((lq, t2.dst, s, j), &mut seen, &mut queue)
                    }
                    Label::Event(_) => {} // handled jointly above
                }
            }
        }
        true
    }

    /// Least k at which the plant is (Obs,k)-diagnosable, by scanning k
    /// upward; stops at the pigeonhole bound on distinguishable pair states.
    pub fn min_k(plant: &Plant, obs: &Observer) -> Option<u32> {
        let bound = plant.num_states() * plant.num_states() * obs.num_states() + 2;
        (0..=bound as u32).find(|&k| diagnosable(plant, obs, k))
    }

    /// Looks for a definitional violation by brute force: a k-faulty run and
    /// a fault-free run of length at most `max_len` with equal observations.
    pub fn refute_by_enumeration(
        plant: &Plant,
        obs: &Observer,
        k: u32,
        max_len: usize,
    ) -> Option<(Run, Run)> {
        let (plant, _) = plant.epsilon_complete();
        let runs = plant
            .enumerate_runs_capped(max_len, 1 << 22)
            .expect("enumeration within cap");
        let mut fault_free: HashMap<Vec<crate::alphabet::EventId>, Run> = HashMap::new();
        for run in &runs {
            if !run.is_faulty() {
                let o = obs.observe_run(&plant, run).expect("valid run");
                fault_free.entry(o).or_insert_with(|| run.clone());
            }
        }
        for run in &runs {
            if run.is_k_faulty(k) {
                let o = obs.observe_run(&plant, run).expect("valid run");
                if let Some(right) = fault_free.get(&o) {
                    return Some((run.clone(), right.clone()));
                }
            }
        }
        None
    }

    /// Maximum mean over all simple cycles reachable from the initial state,
    /// by enumerating every simple cycle.
    pub fn max_mean_by_cycle_enumeration(wa: &WeightedAutomaton) -> Option<Rational> {
        let plant = &wa.plant;
        let mut reach = BTreeSet::from([plant.initial()]);
        let mut queue = VecDeque::from([plant.initial()]);
        while let Some(q) = queue.pop_front() {
            for t in plant.outgoing(q) {
                if reach.insert(t.dst) {
                    queue.push_back(t.dst);
                }
            }
        }
        let verts: Vec<StateId> = reach.iter().copied().collect();
        let mut best: Option<Rational> = None;
        // cycles are rooted at their smallest state; the search never walks
        // below the root, so each simple cycle is found exactly once
        for (ri, &root) in verts.iter().enumerate() {
            let mut path = vec![root];
            let mut on_path = BTreeSet::from([root]);
            // a recursive walk needs its whole state as arguments
            #[allow(clippy::too_many_arguments)]
            fn dfs(
                plant: &Plant,
                weights: &[i64],
                root: usize,
                allowed: &[StateId],
                ri: usize,
                path: &mut Vec<StateId>,
                on_path: &mut BTreeSet<StateId>,
                best: &mut Option<Rational>,
            ) {
                let q = *path.last().unwrap();
                let mut nexts: Vec<StateId> = plant.outgoing(q).iter().map(|t| t.dst).collect();
                nexts.sort_unstable();
                nexts.dedup();
                for v in nexts {
                    if v == root {
                        let sum: i64 = path.iter().map(|&u| weights[u]).sum();
                        let mean = Rational::new(sum, path.len() as i64);
                        if best.is_none_or(|b| mean > b) {
                            *best = Some(mean);
                        }
                    } else if allowed[ri..].contains(&v) && !on_path.contains(&v) {
                        on_path.insert(v);
                        path.push(v);
                        dfs(plant, weights, root, allowed, ri, path, on_path, best);
                        path.pop();
                        on_path.remove(&v);
                    }
                }
            }
            dfs(
                plant,
                &wa.weights,
                root,
                &verts,
                ri,
                &mut path,
                &mut on_path,
                &mut best,
            );
        }
        best
    }

    fn profiles(degrees: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &d in degrees {
            let mut next = Vec::with_capacity(out.len() * d);
            for p in &out {
                for c in 0..d {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    fn values_under(g: &WeightedGraphGame, outer: Player) -> Vec<Rational> {
        let n = g.len();
        let outer_vs: Vec<usize> = (0..n).filter(|&v| g.owner(v) == outer).collect();
        let inner_vs: Vec<usize> = (0..n).filter(|&v| g.owner(v) != outer).collect();
        let outer_profiles = profiles(
            &outer_vs
                .iter()
                .map(|&v| g.edges(v).len())
                .collect::<Vec<_>>(),
        );
        let inner_profiles = profiles(
            &inner_vs
                .iter()
                .map(|&v| g.edges(v).len())
                .collect::<Vec<_>>(),
        );
        let mut best: Vec<Option<Rational>> = vec![None; n];
        for op in &outer_profiles {
            let mut worst: Vec<Option<Rational>> = vec![None; n];
            for ip in &inner_profiles {
                let mut choice = vec![0usize; n];
                for (i, &v) in outer_vs.iter().enumerate() {
                    choice[v] = op[i];
                }
                for (i, &v) in inner_vs.iter().enumerate() {
                    choice[v] = ip[i];
                }
                let vals = g.value_with_strategies(&choice);
                for v in 0..n {
                    let better = worst[v].is_none_or(|w| {
                        if outer == Player::Max {
                            vals[v] < w
                        } else {
                            vals[v] > w
                        }
                    });
                    if better {
                        worst[v] = Some(vals[v]);
                    }
                }
            }
            for v in 0..n {
                let w = worst[v].unwrap();
                let better =
                    best[v].is_none_or(|b| if outer == Player::Max { w > b } else { w < b });
                if better {
                    best[v] = Some(w);
                }
            }
        }
        best.into_iter().map(|x| x.unwrap()).collect()
    }

    /// Game values by exhaustive strategy enumeration: sup over Max
    /// strategies of inf over Min strategies, per vertex.
    pub fn game_values_by_enumeration(g: &WeightedGraphGame) -> Vec<Rational> {
        values_under(g, Player::Max)
    }

    /// The inf-sup order; equals [`game_values_by_enumeration`] because
    /// mean-payoff games are determined.
    pub fn game_values_minmax_by_enumeration(g: &WeightedGraphGame) -> Vec<Rational> {
        values_under(g, Player::Min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_per_seed() {
        let opts = PlantOptions::default();
        let p1 = random_plant(&mut rng(7), &opts);
        let p2 = random_plant(&mut rng(7), &opts);
        assert_eq!(p1, p2);
        let g1 = random_game(&mut rng(7), &GameOptions::default());
        let g2 = random_game(&mut rng(7), &GameOptions::default());
        assert_eq!(g1, g2);
        let al = Alphabet::new(["a", "b"]).unwrap();
        let o1 = random_observer(&mut rng(9), &al, 4);
        let o2 = random_observer(&mut rng(9), &al, 4);
        assert_eq!(o1, o2);
    }
}
