//! Observer synthesis as a safety game.
//!
//! Player 1 repeatedly picks a watch set; Player 2 answers with twin-plant
//! moves under that set. Player 1 loses once the faulty copy has run k steps
//! past its fault without the twins having been told apart. Determinizing
//! Player 1's partial view with a knowledge-subset construction yields, for
//! each reachable knowledge state, every watch set that still wins; keeping
//! all of them gives the most permissive observer, a machine whose members
//! are exactly the observers that diagnose the plant within k steps.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, EventId, EventSet, Label};
use crate::diagnosis::bump;
use crate::error::{Error, Result};
use crate::observer::{AnnotatedHistory, Observer, RawObserver};
use crate::plant::{Plant, StateId};

/// One twin configuration: the state of the faulty-candidate copy with its
/// post-fault step counter (-1 before any fault), and the state of the
/// fault-free copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub left: StateId,
    pub j: i32,
    pub right: StateId,
}

/// Explicit alternating game arena. Player-1 states are twin configurations
/// about to receive a watch set; Player-2 states are configurations paired
/// with the chosen set.
#[derive(Debug, Clone)]
pub struct GameArena {
    pub alphabet: Alphabet,
    pub k: u32,
    pub p1: Vec<Triple>,
    pub p2: Vec<(Triple, EventSet)>,
    /// Per Player-1 state, indexed by watch-set bitmask: the Player-2 state
    /// entered by choosing that set.
    pub choice: Vec<Vec<usize>>,
    /// Per Player-2 state: silent twin moves (the set stays chosen).
    pub silent: Vec<Vec<usize>>,
    /// Per Player-2 state: watched joint moves, handing back to Player 1.
    pub visible: Vec<Vec<(EventId, usize)>>,
    pub initial: usize,
}

impl GameArena {
    /// Player 1 has lost in this configuration.
    pub fn is_bad(&self, t: Triple) -> bool {
        t.j == self.k as i32
    }

    pub fn num_states(&self) -> usize {
        self.p1.len() + self.p2.len()
    }
}

/// Build the alternating arena for `plant` and delay `k`. The plant is made
/// live first (ε self-loops on deadlocks).
pub fn build_game(plant: &Plant, k: u32, cap: usize) -> Result<GameArena> {
    let (plant, _) = plant.epsilon_complete();
    let alphabet = plant.alphabet().clone();
    let n_sets = 1usize << alphabet.len();
    let sat = k as i32;

    let mut p1: Vec<Triple> = Vec::new();
    let mut p2: Vec<(Triple, EventSet)> = Vec::new();
    let mut p1_index: HashMap<Triple, usize> = HashMap::new();
    let mut p2_index: HashMap<(Triple, EventSet), usize> = HashMap::new();
    let mut choice: Vec<Vec<usize>> = Vec::new();
    let mut silent: Vec<Vec<usize>> = Vec::new();
    let mut visible: Vec<Vec<(EventId, usize)>> = Vec::new();

    // queue entries: true = p1 index, false = p2 index
    let mut queue: VecDeque<(bool, usize)> = VecDeque::new();

    let init = Triple {
        left: plant.initial(),
        j: -1,
        right: plant.initial(),
    };
    p1.push(init);
    p1_index.insert(init, 0);
    choice.push(Vec::new());
    queue.push_back((true, 0));

    while let Some((is_p1, u)) = queue.pop_front() {
        if p1.len() + p2.len() > cap {
            return Err(Error::ResourceCap {
                what: "game arena",
                cap,
            });
        }
        if is_p1 {
            let t = p1[u];
            let mut row = Vec::with_capacity(n_sets);
            for mask in 0..n_sets {
                let x = EventSet::from_bits(mask as u32);
                let key = (t, x);
                let v = *p2_index.entry(key).or_insert_with(|| {
                    p2.push(key);
                    silent.push(Vec::new());
                    visible.push(Vec::new());
                    queue.push_back((false, p2.len() - 1));
                    p2.len() - 1
                });
                row.push(v);
            }
            choice[u] = row;
        } else {
            let (t, x) = p2[u];
            let is_silent = |l: Label| match l {
                Label::Event(e) => !x.contains(e),
                _ => true,
            };
            let mut sil = Vec::new();
            let mut vis = Vec::new();
            for tl in plant.outgoing(t.left) {
                if is_silent(tl.label) {
                    let nt = Triple {
                        left: tl.dst,
                        j: bump(t.j, tl.label, sat),
                        right: t.right,
                    };
                    let key = (nt, x);
                    let v = *p2_index.entry(key).or_insert_with(|| {
                        p2.push(key);
                        silent.push(Vec::new());
                        visible.push(Vec::new());
                        queue.push_back((false, p2.len() - 1));
                        p2.len() - 1
                    });
                    sil.push(v);
                }
            }
            for tr in plant.outgoing(t.right) {
                // the fault-free copy skips f and never advances the counter
                if tr.label != Label::Fault && is_silent(tr.label) {
                    let nt = Triple {
                        left: t.left,
                        j: t.j,
                        right: tr.dst,
                    };
                    let key = (nt, x);
                    let v = *p2_index.entry(key).or_insert_with(|| {
                        p2.push(key);
                        silent.push(Vec::new());
                        visible.push(Vec::new());
                        queue.push_back((false, p2.len() - 1));
                        p2.len() - 1
                    });
                    sil.push(v);
                }
            }
            for tl in plant.outgoing(t.left) {
                if let Label::Event(e) = tl.label {
                    if x.contains(e) {
                        for tr in plant.outgoing(t.right) {
                            if tr.label == tl.label {
                                let nt = Triple {
                                    left: tl.dst,
                                    j: bump(t.j, tl.label, sat),
                                    right: tr.dst,
                                };
                                let v = *p1_index.entry(nt).or_insert_with(|| {
                                    p1.push(nt);
                                    choice.push(Vec::new());
                                    queue.push_back((true, p1.len() - 1));
                                    p1.len() - 1
                                });
                                vis.push((e, v));
                            }
                        }
                    }
                }
            }
            silent[u] = sil;
            visible[u] = vis;
        }
    }
    Ok(GameArena {
        alphabet,
        k,
        p1,
        p2,
        choice,
        silent,
        visible,
        initial: 0,
    })
}

/// One watch-set alternative evaluated at a knowledge state.
#[derive(Debug, Clone)]
pub struct KnowledgeChoice {
    pub watch: EventSet,
    /// The silent closure under this set already contains a lost
    /// configuration; successors are not expanded.
    pub losing: bool,
    /// Successor knowledge per event that can actually be observed here.
    pub succ: Vec<(EventId, usize)>,
}

/// Knowledge-subset determinization of the arena: states are the sets of
/// twin configurations compatible with Player 1's observations so far.
#[derive(Debug, Clone)]
pub struct KnowledgeArena {
    /// Sorted Player-1 arena indices forming each knowledge state.
    pub states: Vec<Vec<usize>>,
    /// Per state, per watch set in ascending bitmask order.
    pub choices: Vec<Vec<KnowledgeChoice>>,
    pub initial: usize,
}

pub fn build_knowledge_game(arena: &GameArena, cap: usize) -> Result<KnowledgeArena> {
    let n_sets = 1usize << arena.alphabet.len();
    let mut states: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut choices: Vec<Vec<KnowledgeChoice>> = Vec::new();
    let mut queue = VecDeque::new();

    let init = vec![arena.initial];
    states.push(init.clone());
    index.insert(init, 0);
    choices.push(Vec::new());
    queue.push_back(0usize);

    while let Some(u) = queue.pop_front() {
        let mut rows = Vec::with_capacity(n_sets);
        for mask in 0..n_sets {
            let x = EventSet::from_bits(mask as u32);
            // silent closure of the chosen Player-2 states
            let mut closure: BTreeSet<usize> = BTreeSet::new();
            let mut work: Vec<usize> = states[u].iter().map(|&p| arena.choice[p][mask]).collect();
            while let Some(v) = work.pop() {
                if closure.insert(v) {
                    work.extend(arena.silent[v].iter().copied());
                }
            }
            let losing = closure.iter().any(|&v| arena.is_bad(arena.p2[v].0));
            if losing {
                rows.push(KnowledgeChoice {
                    watch: x,
                    losing,
                    succ: Vec::new(),
                });
                continue;
            }
            let mut by_event: BTreeMap<EventId, BTreeSet<usize>> = BTreeMap::new();
            for &v in &closure {
                for &(e, t) in &arena.visible[v] {
                    by_event.entry(e).or_default().insert(t);
                }
            }
            let mut succ = Vec::new();
            for (e, set) in by_event {
                let key: Vec<usize> = set.into_iter().collect();
                let v = *index.entry(key.clone()).or_insert_with(|| {
                    states.push(key);
                    choices.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                succ.push((e, v));
            }
            rows.push(KnowledgeChoice {
                watch: x,
                losing,
                succ,
            });
        }
        choices[u] = rows;
        if states.len() > cap {
            return Err(Error::ResourceCap {
                what: "knowledge game",
                cap,
            });
        }
    }
    Ok(KnowledgeArena {
        states,
        choices,
        initial: 0,
    })
}

/// Winning knowledge states of the safety game and, for each, every watch
/// set that keeps Player 1 winning.
#[derive(Debug, Clone)]
pub struct SafetySolution {
    pub winning: Vec<bool>,
    pub allowed: Vec<Vec<EventSet>>,
}

/// Greatest fixpoint: a state stays winning while some non-losing choice has
/// all successors winning.
pub fn solve_safety(kg: &KnowledgeArena) -> SafetySolution {
    let n = kg.states.len();
    let mut winning = vec![true; n];
    loop {
        let mut changed = false;
        for u in 0..n {
            if !winning[u] {
                continue;
            }
            let ok = kg.choices[u]
                .iter()
                .any(|c| !c.losing && c.succ.iter().all(|&(_, v)| winning[v]));
            if !ok {
                winning[u] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let allowed = (0..n)
        .map(|u| {
            if !winning[u] {
                return Vec::new();
            }
            kg.choices[u]
                .iter()
                .filter(|c| !c.losing && c.succ.iter().all(|&(_, v)| winning[v]))
                .map(|c| c.watch)
                .collect()
        })
        .collect();
    SafetySolution { winning, allowed }
}

/// A choice node of the most permissive observer: the watch sets that remain
/// winning here, each leading to its wait node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenNode {
    pub choices: Vec<(EventSet, usize)>,
}

/// A wait node: the chosen watch set, and the choice node reached on each
/// event that can actually be observed under it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddNode {
    pub watch: EventSet,
    pub obs: Vec<(EventId, usize)>,
}

/// The most permissive observer: a bipartite machine alternating between
/// choice (even) and wait (odd) nodes. Every way of resolving the choices
/// yields an observer that diagnoses the plant within k steps, and every
/// observer that does so resolves the choices this way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MostPermissiveObserver {
    pub name: String,
    pub alphabet: Alphabet,
    pub k: u32,
    pub evens: Vec<EvenNode>,
    pub odds: Vec<OddNode>,
    pub initial: usize,
}

/// Synthesis outcome with search statistics.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub mpo: Option<MostPermissiveObserver>,
    pub arena_p1: usize,
    pub arena_p2: usize,
    pub knowledge_states: usize,
}

pub fn most_permissive_observer(plant: &Plant, k: u32, cap: usize) -> Result<Synthesis> {
    let arena = build_game(plant, k, cap)?;
    let kg = build_knowledge_game(&arena, cap)?;
    let sol = solve_safety(&kg);
    let stats = |mpo| Synthesis {
        mpo,
        arena_p1: arena.p1.len(),
        arena_p2: arena.p2.len(),
        knowledge_states: kg.states.len(),
    };
    if !sol.winning[kg.initial] {
        return Ok(stats(None));
    }
    // keep the winning region reachable under allowed choices
    let mut evens: Vec<EvenNode> = Vec::new();
    let mut odds: Vec<OddNode> = Vec::new();
    let mut even_of: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    even_of.insert(kg.initial, 0);
    evens.push(EvenNode {
        choices: Vec::new(),
    });
    queue.push_back(kg.initial);
    let mut order = vec![kg.initial];
    while let Some(u) = queue.pop_front() {
        for c in &kg.choices[u] {
            if c.losing || !sol.allowed[u].contains(&c.watch) {
                continue;
            }
            for &(_, v) in &c.succ {
                debug_assert!(sol.winning[v]);
                even_of.entry(v).or_insert_with(|| {
                    evens.push(EvenNode {
                        choices: Vec::new(),
                    });
                    queue.push_back(v);
                    order.push(v);
                    evens.len() - 1
                });
            }
        }
    }
    for (e_idx, &u) in order.iter().enumerate() {
        let mut choices = Vec::new();
        for c in &kg.choices[u] {
            if c.losing || !sol.allowed[u].contains(&c.watch) {
                continue;
            }
            let obs = c.succ.iter().map(|&(ev, v)| (ev, even_of[&v])).collect();
            odds.push(OddNode {
                watch: c.watch,
                obs,
            });
            choices.push((c.watch, odds.len() - 1));
        }
        debug_assert!(!choices.is_empty(), "winning state without allowed choice");
        evens[e_idx].choices = choices;
    }
    Ok(stats(Some(MostPermissiveObserver {
        name: format!("mpo_k{k}"),
        alphabet: arena.alphabet.clone(),
        k,
        evens,
        odds,
        initial: 0,
    })))
}

/// Why an observer is not a member: after `history`, it watches `watch`,
/// which is not among the `allowed` sets there.
#[derive(Debug, Clone)]
pub struct MembershipViolation {
    pub history: AnnotatedHistory,
    pub watch: EventSet,
    pub allowed: Vec<EventSet>,
}

#[derive(Debug, Clone)]
pub enum Membership {
    Member,
    NotMember(MembershipViolation),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

/// Does `obs` resolve the most permissive observer's choices, i.e. is its
/// watch set allowed at every reachable observation history? The first
/// (shortest) offending history is returned otherwise.
pub fn mpo_membership(mpo: &MostPermissiveObserver, obs: &Observer) -> Result<Membership> {
    if &mpo.alphabet != obs.alphabet() {
        return Err(Error::AlphabetMismatch);
    }
    let mut seen: BTreeSet<(StateId, usize)> = BTreeSet::new();
    let mut queue: VecDeque<((StateId, usize), Vec<EventId>)> = VecDeque::new();
    let start = (obs.initial(), mpo.initial);
    seen.insert(start);
    queue.push_back((start, Vec::new()));
    while let Some(((s, e), word)) = queue.pop_front() {
        let w = obs.watch(s);
        let node = &mpo.evens[e];
        match node.choices.iter().find(|&&(x, _)| x == w) {
            None => {
                let history = obs.annotated_history(&word)?;
                return Ok(Membership::NotMember(MembershipViolation {
                    history,
                    watch: w,
                    allowed: node.choices.iter().map(|&(x, _)| x).collect(),
                }));
            }
            Some(&(_, o)) => {
                for &(ev, e2) in &mpo.odds[o].obs {
                    let next = (obs.step(s, ev), e2);
                    if seen.insert(next) {
                        let mut w2 = word.clone();
                        w2.push(ev);
                        queue.push_back((next, w2));
                    }
                }
            }
        }
    }
    Ok(Membership::Member)
}

/// How to resolve each choice node when folding the most permissive observer
/// into a single observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// Lexicographically least watch set (on sorted event lists).
    LexLeast,
    /// Fewest events, ties lexicographic.
    Smallest,
    /// Most events, ties lexicographic.
    Largest,
    /// Seeded uniform draw per choice node.
    Random(u64),
}

pub(crate) fn extract_with(
    mpo: &MostPermissiveObserver,
    mut pick: impl FnMut(usize, &[(EventSet, usize)]) -> usize,
) -> Observer {
    let mut state_of: HashMap<usize, usize> = HashMap::new();
    let mut chosen: Vec<(usize, EventSet, usize)> = Vec::new(); // (even, watch, odd)
    let mut queue = VecDeque::new();
    state_of.insert(mpo.initial, 0);
    queue.push_back(mpo.initial);
    while let Some(e) = queue.pop_front() {
        let node = &mpo.evens[e];
        let i = pick(e, &node.choices);
        let (watch, odd) = node.choices[i];
        chosen.push((e, watch, odd));
        for &(_, e2) in &mpo.odds[odd].obs {
            if !state_of.contains_key(&e2) {
                state_of.insert(e2, state_of.len());
                queue.push_back(e2);
            }
        }
    }
    let n = chosen.len();
    let mut watch = vec![EventSet::EMPTY; n];
    let mut transitions = Vec::new();
    for &(e, x, odd) in &chosen {
        let s = state_of[&e];
        watch[s] = x;
        for ev in x.iter() {
            let target = mpo.odds[odd]
                .obs
                .iter()
                .find(|&&(oe, _)| oe == ev)
                .map(|&(_, e2)| state_of[&e2]);
            // a watched event the game can never produce keeps the watch set
            transitions.push((s, ev, target.unwrap_or(s)));
        }
    }
    RawObserver {
        name: "extracted".into(),
        alphabet: mpo.alphabet.clone(),
        states: (0..n).map(|i| format!("s{i}")).collect(),
        initial: 0,
        watch,
        transitions,
    }
    .build()
    .expect("extraction yields a well-formed observer")
}

/// Fold the most permissive observer into one observer by resolving every
/// choice node with the selector.
pub fn extract_observer(mpo: &MostPermissiveObserver, selector: Selector) -> Observer {
    match selector {
        Selector::LexLeast => extract_with(mpo, |_, cs| {
            (0..cs.len())
                .min_by(|&i, &j| cs[i].0.lex_cmp(cs[j].0))
                .unwrap()
        }),
        Selector::Smallest => extract_with(mpo, |_, cs| {
            (0..cs.len())
                .min_by(|&i, &j| {
                    cs[i]
                        .0
                        .len()
                        .cmp(&cs[j].0.len())
                        .then(cs[i].0.lex_cmp(cs[j].0))
                })
                .unwrap()
        }),
        Selector::Largest => extract_with(mpo, |_, cs| {
            (0..cs.len())
                .min_by(|&i, &j| {
                    cs[j]
                        .0
                        .len()
                        .cmp(&cs[i].0.len())
                        .then(cs[i].0.lex_cmp(cs[j].0))
                })
                .unwrap()
        }),
        Selector::Random(seed) => extract_with(mpo, |e, cs| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_add((e as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            rng.random_range(0..cs.len())
        }),
    }
}

/// One step of a play, as much of it as the trace projection needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameMove {
    Choose(EventSet),
    Silent(Label),
    Observe(EventId),
}

/// An observer read as a Player-1 strategy: after any play history, watch
/// what the observer watches after the history's observation.
#[derive(Debug, Clone)]
pub struct TraceStrategy<'a> {
    obs: &'a Observer,
    arena: &'a GameArena,
}

pub fn observer_to_strategy<'a>(
    obs: &'a Observer,
    arena: &'a GameArena,
) -> Result<TraceStrategy<'a>> {
    if obs.alphabet() != &arena.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    Ok(TraceStrategy { obs, arena })
}

impl TraceStrategy<'_> {
    /// The watch set prescribed at the Player-1 state this history ends in.
    /// The history must alternate correctly: a choice, then silent moves,
    /// then an observed event from the chosen set, and so on.
    pub fn choice(&self, history: &[GameMove]) -> Result<EventSet> {
        let mut current: Option<EventSet> = None; // None = at Player 1
        let mut word = Vec::new();
        for (i, mv) in history.iter().enumerate() {
            match (current, mv) {
                (None, GameMove::Choose(x)) => {
                    if !self.arena.alphabet.contains_set(*x) {
                        return Err(Error::InvalidHistory(format!(
                            "move {i} chooses events outside the alphabet"
                        )));
                    }
                    current = Some(*x);
                }
                (Some(x), GameMove::Silent(l)) => {
                    let silent = match l {
                        Label::Event(e) => !x.contains(*e),
                        _ => true,
                    };
                    if !silent {
                        return Err(Error::InvalidHistory(format!(
                            "move {i} is silent on a watched event"
                        )));
                    }
                }
                (Some(x), GameMove::Observe(e)) => {
                    if !x.contains(*e) {
                        return Err(Error::InvalidHistory(format!(
                            "move {i} observes an unwatched event"
                        )));
                    }
                    word.push(*e);
                    current = None;
                }
                _ => {
                    return Err(Error::InvalidHistory(format!(
                        "move {i} breaks the turn order"
                    )));
                }
            }
        }
        if current.is_some() {
            return Err(Error::InvalidHistory(
                "history ends in the middle of a Player-2 turn".into(),
            ));
        }
        Ok(self.obs.watch(self.obs.state_after(&word)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnosis::{check_dynamic, check_static, DEFAULT_CAP};
    use crate::observer::static_observer;
    use crate::testing::{
        fig2_observer, plant_b, random_observer, random_plant, rng, PlantOptions,
    };

    fn a() -> EventId {
        EventId(0)
    }

    fn b() -> EventId {
        EventId(1)
    }

    fn sets(al: &Alphabet, xs: &[EventSet]) -> Vec<String> {
        xs.iter().map(|&x| al.fmt_set(x)).collect()
    }

    fn synth_b(k: u32) -> Synthesis {
        most_permissive_observer(&plant_b(), k, DEFAULT_CAP).unwrap()
    }

    #[test]
    fn arena_for_b_is_small_and_alternating() {
        let arena = build_game(&plant_b(), 2, DEFAULT_CAP).unwrap();
        // |Q|^2 (k+2) P1 states and four times as many P2 states at most
        assert!(arena.num_states() <= 720);
        assert_eq!(
            arena.p1[arena.initial],
            Triple {
                left: 0,
                j: -1,
                right: 0
            }
        );
        for (u, row) in arena.choice.iter().enumerate() {
            assert_eq!(row.len(), 4);
            for (mask, &v) in row.iter().enumerate() {
                assert_eq!(arena.p2[v].0, arena.p1[u]);
                assert_eq!(arena.p2[v].1.bits(), mask as u32);
            }
        }
        // silent moves keep the chosen set; visible moves return to P1
        for (v, &(_, x)) in arena.p2.iter().enumerate() {
            for &w in &arena.silent[v] {
                assert_eq!(arena.p2[w].1, x);
            }
            for &(e, _) in &arena.visible[v] {
                assert!(x.contains(e));
            }
        }
    }

    #[test]
    fn allowed_sets_for_b_at_k2() {
        let al = Alphabet::new(["a", "b"]).unwrap();
        let mpo = synth_b(2)
            .mpo
            .expect("B is diagnosable at k=2 under full watch");
        let init = &mpo.evens[mpo.initial];
        let watches: Vec<EventSet> = init.choices.iter().map(|&(x, _)| x).collect();
        assert_eq!(sets(&al, &watches), vec!["{a}", "{a,b}"]);
        // after observing a under {a}: allowed sets are {b} and {a,b}
        let (_, o) = init.choices[0];
        assert_eq!(mpo.odds[o].watch, EventSet::singleton(a()));
        let (ev, e1) = mpo.odds[o].obs[0];
        assert_eq!(ev, a());
        let watches: Vec<EventSet> = mpo.evens[e1].choices.iter().map(|&(x, _)| x).collect();
        assert_eq!(sets(&al, &watches), vec!["{b}", "{a,b}"]);
    }

    #[test]
    fn b_has_no_winning_observer_at_k0() {
        // the fault is silent, so zero delay is hopeless whatever is watched
        assert!(synth_b(0).mpo.is_none());
    }

    #[test]
    fn b_at_k1_forces_full_watching_initially() {
        let al = Alphabet::new(["a", "b"]).unwrap();
        let mpo = synth_b(1).mpo.expect("static {a,b} works at k=1");
        let init = &mpo.evens[mpo.initial];
        let watches: Vec<EventSet> = init.choices.iter().map(|&(x, _)| x).collect();
        assert_eq!(sets(&al, &watches), vec!["{a,b}"]);
    }

    #[test]
    fn smallest_extraction_for_b_is_the_two_state_observer() {
        let mpo = synth_b(2).mpo.unwrap();
        let obs = extract_observer(&mpo, Selector::Smallest);
        assert_eq!(obs.num_states(), 2);
        assert_eq!(obs.watch(0), EventSet::singleton(a()));
        assert_eq!(obs.watch(1), EventSet::singleton(b()));
        assert_eq!(obs.step(0, a()), 1);
        // b never occurs once the game reaches that knowledge; watching it
        // loops
        assert_eq!(obs.step(1, b()), 1);
        let v = check_dynamic(&plant_b(), &obs, 2, DEFAULT_CAP).unwrap();
        assert!(v.diagnosable);
        assert_eq!(v.min_k, Some(2));
    }

    #[test]
    fn all_selectors_give_members_that_diagnose() {
        let plant = plant_b();
        let mpo = synth_b(2).mpo.unwrap();
        let mut observers = vec![
            extract_observer(&mpo, Selector::LexLeast),
            extract_observer(&mpo, Selector::Smallest),
            extract_observer(&mpo, Selector::Largest),
        ];
        for seed in 0..50 {
            observers.push(extract_observer(&mpo, Selector::Random(seed)));
        }
        for obs in observers {
            assert!(mpo_membership(&mpo, &obs).unwrap().is_member());
            assert!(
                check_dynamic(&plant, &obs, 2, DEFAULT_CAP)
                    .unwrap()
                    .diagnosable
            );
        }
    }

    #[test]
    fn random_extraction_is_seed_deterministic() {
        let mpo = synth_b(2).mpo.unwrap();
        assert_eq!(
            extract_observer(&mpo, Selector::Random(7)),
            extract_observer(&mpo, Selector::Random(7))
        );
    }

    #[test]
    fn membership_goldens_for_b() {
        let plant = plant_b();
        let al = plant.alphabet().clone();
        let mpo = synth_b(2).mpo.unwrap();
        assert!(mpo_membership(&mpo, &fig2_observer()).unwrap().is_member());
        assert!(
            mpo_membership(&mpo, &static_observer(al.clone(), al.full_set()))
                .unwrap()
                .is_member()
        );
        // watching only a forever: fine initially, wrong after observing a
        let only_a = static_observer(al.clone(), EventSet::singleton(a()));
        match mpo_membership(&mpo, &only_a).unwrap() {
            Membership::NotMember(v) => {
                assert_eq!(v.history.events, vec![a()]);
                assert_eq!(v.watch, EventSet::singleton(a()));
                assert_eq!(sets(&al, &v.allowed), vec!["{b}", "{a,b}"]);
                assert_eq!(v.history.render(&al), "{a}·a");
            }
            Membership::Member => panic!("static {{a}} must not be a member"),
        }
        // watching only b is wrong from the start
        let only_b = static_observer(al.clone(), EventSet::singleton(b()));
        match mpo_membership(&mpo, &only_b).unwrap() {
            Membership::NotMember(v) => {
                assert!(v.history.events.is_empty());
                assert_eq!(v.history.watches, vec![EventSet::singleton(b())]);
                assert_eq!(sets(&al, &v.allowed), vec!["{a}", "{a,b}"]);
            }
            Membership::Member => panic!("static {{b}} must not be a member"),
        }
    }

    #[test]
    fn mpo_exists_iff_fully_observed_plant_is_diagnosable() {
        let opts = PlantOptions::default();
        let mut r = rng(50);
        for _ in 0..40 {
            let plant = random_plant(&mut r, &opts);
            for k in 0..3u32 {
                let synth = most_permissive_observer(&plant, k, DEFAULT_CAP).unwrap();
                let full =
                    check_static(&plant, plant.alphabet().full_set(), k, DEFAULT_CAP).unwrap();
                assert_eq!(
                    synth.mpo.is_some(),
                    full.diagnosable,
                    "existence must match full-watch diagnosability"
                );
            }
        }
    }

    #[test]
    fn membership_decides_dynamic_diagnosability() {
        let opts = PlantOptions {
            max_states: 5,
            ..PlantOptions::default()
        };
        let mut r = rng(51);
        let mut checked = 0;
        let mut attempts = 0;
        // most random plants are undiagnosable even fully watched, so keep
        // drawing until enough of them carry an mpo at all
        while checked < 40 && attempts < 800 {
            attempts += 1;
            let plant = random_plant(&mut r, &opts);
            let k = Rng::random_range(&mut r, 0..3u32);
            let synth = most_permissive_observer(&plant, k, DEFAULT_CAP).unwrap();
            let obs = random_observer(&mut r, plant.alphabet(), 3);
            let diag = check_dynamic(&plant, &obs, k, DEFAULT_CAP)
                .unwrap()
                .diagnosable;
            match &synth.mpo {
                Some(mpo) => {
                    let member = mpo_membership(mpo, &obs).unwrap().is_member();
                    assert_eq!(member, diag, "membership must match diagnosability");
                    checked += 1;
                }
                None => assert!(!diag, "no observer works when synthesis fails"),
            }
        }
        assert!(checked >= 40, "need informative instances, got {checked}");
    }

    #[test]
    fn violations_point_at_a_genuinely_disallowed_watch() {
        let opts = PlantOptions {
            max_states: 5,
            ..PlantOptions::default()
        };
        let mut r = rng(52);
        for _ in 0..80 {
            let plant = random_plant(&mut r, &opts);
            let k = Rng::random_range(&mut r, 0..3u32);
            let Some(mpo) = most_permissive_observer(&plant, k, DEFAULT_CAP)
                .unwrap()
                .mpo
            else {
                continue;
            };
            let obs = random_observer(&mut r, plant.alphabet(), 3);
            if let Membership::NotMember(v) = mpo_membership(&mpo, &obs).unwrap() {
                assert!(!v.allowed.contains(&v.watch));
                assert!(!v.allowed.is_empty());
                // the history is a real observation of the observer
                let h = obs.annotated_history(&v.history.events).unwrap();
                assert_eq!(h, v.history);
            }
        }
    }

    #[test]
    fn strategy_reads_off_the_observer() {
        let arena = build_game(&plant_b(), 2, DEFAULT_CAP).unwrap();
        let obs = fig2_observer();
        let strat = observer_to_strategy(&obs, &arena).unwrap();
        let aset = EventSet::singleton(a());
        let bset = EventSet::singleton(b());
        assert_eq!(strat.choice(&[]).unwrap(), aset);
        let hist = [
            GameMove::Choose(aset),
            GameMove::Silent(Label::Fault),
            GameMove::Observe(a()),
        ];
        assert_eq!(strat.choice(&hist).unwrap(), bset);
        let hist = [
            GameMove::Choose(aset),
            GameMove::Silent(Label::Event(b())),
            GameMove::Observe(a()),
            GameMove::Choose(bset),
            GameMove::Observe(b()),
        ];
        assert_eq!(strat.choice(&hist).unwrap(), EventSet::EMPTY);
        // malformed histories are rejected
        assert!(strat.choice(&[GameMove::Observe(a())]).is_err());
        assert!(strat
            .choice(&[GameMove::Choose(aset), GameMove::Silent(Label::Event(a()))])
            .is_err());
        assert!(strat.choice(&[GameMove::Choose(aset)]).is_err());
        assert!(strat
            .choice(&[GameMove::Choose(aset), GameMove::Observe(b())])
            .is_err());
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            build_game(&plant_b(), 2, 10),
            Err(Error::ResourceCap {
                what: "game arena",
                cap: 10
            })
        ));
        let arena = build_game(&plant_b(), 2, DEFAULT_CAP).unwrap();
        assert!(matches!(
            build_knowledge_game(&arena, 2),
            Err(Error::ResourceCap {
                what: "knowledge game",
                cap: 2
            })
        ));
    }
}
