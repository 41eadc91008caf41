//! Diagnosability checking by twin-plant search.
//!
//! Two copies of the plant run side by side: the left copy follows a run
//! containing the fault, the right copy a fault-free one, and the two
//! synchronize exactly on watched events, so a reachable twin state is a pair
//! of runs with identical observations. A counter tracks how many steps the
//! left copy has taken since its first fault; driving it to k refutes
//! diagnosability within delay k, and a reachable flagged cycle that moves
//! the left copy refutes it for every k at once.

use std::collections::{HashMap, VecDeque};

use crate::alphabet::{EventSet, Label};
use crate::error::{Error, Result};
use crate::observer::Observer;
use crate::plant::{Plant, Run, StateId, Transition};
use crate::product::{masked_product, MaskedProduct};

/// Default cap on explored states for every search in this crate.
pub const DEFAULT_CAP: usize = 1 << 20;

/// Outcome of a diagnosability question.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub diagnosable: bool,
    /// Least delay that works: present when diagnosable (bounded checks
    /// report the least delay within their bound).
    pub min_k: Option<u32>,
    /// Refutation: a faulty and a fault-free run with identical
    /// observations. Pumpable lassos when no delay works at all, plain
    /// finite runs (empty cycles) when a specific delay fails.
    pub counterexample: Option<RunPair>,
    /// States explored by the twin search, for reporting.
    pub twin_states: usize,
}

/// A finite stem plus a (possibly empty) cycle from the stem's end state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Run,
    pub cycle: Vec<(Label, StateId)>,
}

impl Lasso {
    pub fn is_finite(&self) -> bool {
        self.cycle.is_empty()
    }

    /// The run that unrolls the cycle `m` times.
    pub fn unrolled(&self, m: usize) -> Run {
        let mut steps = self.stem.steps.clone();
        for _ in 0..m {
            steps.extend(self.cycle.iter().copied());
        }
        Run {
            start: self.stem.start,
            steps,
        }
    }
}

/// A refuting pair of runs. Unrolling both lassos the same number of times
/// always yields identical observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPair {
    pub faulty: Lasso,
    pub nonfaulty: Lasso,
}

#[derive(Debug, Clone, Copy)]
enum StepKind {
    Left(Transition),
    Right(Transition),
    Joint(Transition, Transition),
}

impl StepKind {
    fn moves_left(self) -> bool {
        matches!(self, StepKind::Left(_) | StepKind::Joint(..))
    }
}

/// Post-fault counter update for a left move, saturating at `sat`.
pub(crate) fn bump(j: i32, label: Label, sat: i32) -> i32 {
    if j >= 0 {
        (j + 1).min(sat)
    } else if label == Label::Fault {
        0
    } else {
        -1
    }
}

struct Twin<'a> {
    plant: &'a Plant,
    sub: EventSet,
}

type TwinState = (StateId, StateId, i32);

impl Twin<'_> {
    /// All twin moves from (lq, rq, j), in canonical order: left-only, then
    /// right-only, then joint, each following the sorted transition order.
    fn edges(&self, (lq, rq, j): TwinState, sat: i32, mut emit: impl FnMut(StepKind, TwinState)) {
        let silent = |l: Label| match l {
            Label::Event(e) => !self.sub.contains(e),
            _ => true,
        };
        for t in self.plant.outgoing(lq) {
            if silent(t.label) {
                emit(StepKind::Left(*t), (t.dst, rq, bump(j, t.label, sat)));
            }
        }
        for t in self.plant.outgoing(rq) {
            // the right copy never takes the fault, and never bumps the counter
            if t.label != Label::Fault && silent(t.label) {
                emit(StepKind::Right(*t), (lq, t.dst, j));
            }
        }
        for tl in self.plant.outgoing(lq) {
            if let Label::Event(e) = tl.label {
                if self.sub.contains(e) {
                    for tr in self.plant.outgoing(rq) {
                        if tr.label == tl.label {
                            emit(
                                StepKind::Joint(*tl, *tr),
                                (tl.dst, tr.dst, bump(j, tl.label, sat)),
                            );
                        }
                    }
                }
            }
        }
    }

    fn initial(&self) -> TwinState {
        (self.plant.initial(), self.plant.initial(), -1)
    }

    /// Breadth-first search of the counter graph; stops at the first state
    /// with counter k and returns the step sequence reaching it.
    fn counter_search(&self, k: u32, cap: usize) -> Result<CounterSearch> {
        let k = k as i32;
        let mut index: HashMap<TwinState, usize> = HashMap::new();
        let mut parent: Vec<Option<(usize, StepKind)>> = Vec::new();
        let mut states: Vec<TwinState> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(self.initial(), 0);
        states.push(self.initial());
        parent.push(None);
        queue.push_back(0usize);
        while let Some(u) = queue.pop_front() {
            let mut hit = None;
            self.edges(states[u], k, |kind, next| {
                if hit.is_some() {
                    return;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(next) {
                    e.insert(states.len());
                    states.push(next);
                    parent.push(Some((u, kind)));
                    queue.push_back(states.len() - 1);
                    if next.2 == k {
                        hit = Some(states.len() - 1);
                    }
                }
            });
            if let Some(v) = hit {
                let mut kinds = Vec::new();
                let mut cur = v;
                while let Some((p, kind)) = parent[cur] {
                    kinds.push(kind);
                    cur = p;
                }
                kinds.reverse();
                return Ok(CounterSearch {
                    states: states.len(),
                    violation: Some(kinds),
                });
            }
            if states.len() > cap {
                return Err(Error::ResourceCap {
                    what: "twin product",
                    cap,
                });
            }
        }
        Ok(CounterSearch {
            states: states.len(),
            violation: None,
        })
    }

    /// Full exploration of the twin graph with the counter collapsed to a
    /// fault flag (saturation at 0).
    fn flag_search(&self, cap: usize) -> Result<FlagSearch> {
        let mut index: HashMap<TwinState, usize> = HashMap::new();
        let mut states: Vec<TwinState> = Vec::new();
        let mut parent: Vec<Option<(usize, StepKind)>> = Vec::new();
        let mut adj: Vec<Vec<(usize, StepKind)>> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(self.initial(), 0);
        states.push(self.initial());
        parent.push(None);
        adj.push(Vec::new());
        queue.push_back(0usize);
        while let Some(u) = queue.pop_front() {
            let mut out = Vec::new();
            let mut grew = false;
            self.edges(states[u], 0, |kind, next| {
                let v = *index.entry(next).or_insert_with(|| {
                    states.push(next);
                    parent.push(Some((u, kind)));
                    adj.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    grew = true;
                    states.len() - 1
                });
                out.push((v, kind));
            });
            adj[u] = out;
            if grew && states.len() > cap {
                return Err(Error::ResourceCap {
                    what: "twin product",
                    cap,
                });
            }
        }
        Ok(FlagSearch {
            states,
            parent,
            adj,
        })
    }
}

struct CounterSearch {
    states: usize,
    violation: Option<Vec<StepKind>>,
}

struct FlagSearch {
    states: Vec<TwinState>,
    parent: Vec<Option<(usize, StepKind)>>,
    adj: Vec<Vec<(usize, StepKind)>>,
}

impl FlagSearch {
    /// Shortest path from the twin root to `to`, as step kinds.
    fn stem_to(&self, to: usize) -> Vec<StepKind> {
        let mut kinds = Vec::new();
        let mut cur = to;
        while let Some((p, kind)) = self.parent[cur] {
            kinds.push(kind);
            cur = p;
        }
        kinds.reverse();
        kinds
    }

    /// Shortest path `from` -> `to` staying inside one strongly connected
    /// component (empty when `from == to`).
    fn path_within(&self, scc: &[usize], from: usize, to: usize) -> Vec<StepKind> {
        if from == to {
            return Vec::new();
        }
        let comp = scc[from];
        let mut prev: HashMap<usize, (usize, StepKind)> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            for &(v, kind) in &self.adj[u] {
                if scc[v] == comp && !prev.contains_key(&v) && v != from {
                    prev.insert(v, (u, kind));
                    if v == to {
                        let mut kinds = Vec::new();
                        let mut cur = v;
                        while cur != from {
                            let (p, k) = prev[&cur];
                            kinds.push(k);
                            cur = p;
                        }
                        kinds.reverse();
                        return kinds;
                    }
                    queue.push_back(v);
                }
            }
        }
        unreachable!("states of one SCC are mutually reachable")
    }

    /// A reachable flagged cycle that moves the left copy, as
    /// (stem, cycle) step sequences.
    fn pumpable(&self) -> Option<(Vec<StepKind>, Vec<StepKind>)> {
        let scc = tarjan(&self.adj);
        for u in 0..self.states.len() {
            if self.states[u].2 != 0 {
                continue;
            }
            for &(v, kind) in &self.adj[u] {
                if scc[v] == scc[u] && kind.moves_left() {
                    let mut cycle = vec![kind];
                    cycle.extend(self.path_within(&scc, v, u));
                    return Some((self.stem_to(u), cycle));
                }
            }
        }
        None
    }
}

/// Strongly connected components (iterative Tarjan); returns the component
/// index of each vertex.
fn tarjan(adj: &[Vec<(usize, StepKind)>]) -> Vec<usize> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut num = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_num = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if num[root] != usize::MAX {
            continue;
        }
        // (vertex, next edge index)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei == 0 {
                num[v] = next_num;
                low[v] = next_num;
                next_num += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&(w, _)) = adj[v].get(*ei) {
                *ei += 1;
                if num[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(num[w]);
                }
            } else {
                if low[v] == num[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }
    comp
}

/// Steps of one side of a twin path, in [`Run::steps`] shape.
type Steps = Vec<(Label, StateId)>;

fn split_steps(kinds: &[StepKind]) -> (Steps, Steps) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for k in kinds {
        match *k {
            StepKind::Left(t) => left.push((t.label, t.dst)),
            StepKind::Right(t) => right.push((t.label, t.dst)),
            StepKind::Joint(tl, tr) => {
                left.push((tl.label, tl.dst));
                right.push((tr.label, tr.dst));
            }
        }
    }
    (left, right)
}

fn run_pair(init: StateId, stem: &[StepKind], cycle: &[StepKind]) -> RunPair {
    let (lstem, rstem) = split_steps(stem);
    let (lcycle, rcycle) = split_steps(cycle);
    RunPair {
        faulty: Lasso {
            stem: Run {
                start: init,
                steps: lstem,
            },
            cycle: lcycle,
        },
        nonfaulty: Lasso {
            stem: Run {
                start: init,
                steps: rstem,
            },
            cycle: rcycle,
        },
    }
}

fn check_inner(plant: &Plant, sub: EventSet, k: u32, cap: usize) -> Result<Verdict> {
    let twin = Twin { plant, sub };
    let cs = twin.counter_search(k, cap)?;
    match cs.violation {
        Some(kinds) => Ok(Verdict {
            diagnosable: false,
            min_k: None,
            counterexample: Some(run_pair(plant.initial(), &kinds, &[])),
            twin_states: cs.states,
        }),
        None => Ok(Verdict {
            diagnosable: true,
            min_k: Some(least_k(&twin, k, cap)?),
            counterexample: None,
            twin_states: cs.states,
        }),
    }
}

/// Least delay in [0, known_good] without a violation, by binary search
/// (a violation for delay k is one for every smaller delay).
fn least_k(twin: &Twin, known_good: u32, cap: usize) -> Result<u32> {
    let (mut lo, mut hi) = (0u32, known_good);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if twin.counter_search(mid, cap)?.violation.is_none() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

fn min_k_inner(plant: &Plant, sub: EventSet, cap: usize) -> Result<Verdict> {
    let twin = Twin { plant, sub };
    let fs = twin.flag_search(cap)?;
    if let Some((stem, cycle)) = fs.pumpable() {
        return Ok(Verdict {
            diagnosable: false,
            min_k: None,
            counterexample: Some(run_pair(plant.initial(), &stem, &cycle)),
            twin_states: fs.states.len(),
        });
    }
    // No pumpable pair: every violating pair ends within the twin graph, so
    // the least working delay is at most the number of reachable twin states
    // (a longer post-fault path would revisit a flagged state and pump).
    let bound = fs.states.len() as u32;
    if twin.counter_search(bound, cap)?.violation.is_some() {
        unreachable!("twin without flagged left cycles is diagnosable within its state count");
    }
    Ok(Verdict {
        diagnosable: true,
        min_k: Some(least_k(&twin, bound, cap)?),
        counterexample: None,
        twin_states: fs.states.len(),
    })
}

fn check_sub(plant: &Plant, sub: EventSet) -> Result<()> {
    if !plant.alphabet().contains_set(sub) {
        return Err(Error::EventOutOfRange(
            sub.minus(plant.alphabet().full_set())
                .iter()
                .next()
                .map(|e| e.0)
                .unwrap_or(0),
        ));
    }
    Ok(())
}

/// Is every fault announced within `k` steps when exactly `sub` is watched,
/// permanently? Deadlocked states are treated as stuttering.
pub fn check_static(plant: &Plant, sub: EventSet, k: u32, cap: usize) -> Result<Verdict> {
    check_sub(plant, sub)?;
    let (p, _) = plant.epsilon_complete();
    check_inner(&p, sub, k, cap)
}

/// Least delay under a fixed watch set, or a pumpable refutation.
pub fn min_k_static(plant: &Plant, sub: EventSet, cap: usize) -> Result<Verdict> {
    check_sub(plant, sub)?;
    let (p, _) = plant.epsilon_complete();
    min_k_inner(&p, sub, cap)
}

fn map_lasso(mp: &MaskedProduct, lasso: &Lasso) -> Lasso {
    let at = lasso.stem.target();
    Lasso {
        stem: mp.plant_run(&lasso.stem),
        cycle: mp.plant_steps(at, &lasso.cycle),
    }
}

fn map_verdict(mp: &MaskedProduct, mut v: Verdict) -> Verdict {
    v.counterexample = v.counterexample.map(|pair| RunPair {
        faulty: map_lasso(mp, &pair.faulty),
        nonfaulty: map_lasso(mp, &pair.nonfaulty),
    });
    v
}

/// Diagnosability under a dynamic observer: compose plant and observer,
/// masking unwatched events to ε, then ask the fully-observed question on
/// the product. Counterexamples are mapped back to plant runs.
pub fn check_dynamic(plant: &Plant, obs: &Observer, k: u32, cap: usize) -> Result<Verdict> {
    let (p, _) = plant.epsilon_complete();
    let mp = masked_product(&p, obs)?;
    let v = check_inner(&mp.plant, mp.plant.alphabet().full_set(), k, cap)?;
    Ok(map_verdict(&mp, v))
}

/// Least delay under a dynamic observer, or a pumpable refutation.
pub fn min_k_dynamic(plant: &Plant, obs: &Observer, cap: usize) -> Result<Verdict> {
    let (p, _) = plant.epsilon_complete();
    let mp = masked_product(&p, obs)?;
    let v = min_k_inner(&mp.plant, mp.plant.alphabet().full_set(), cap)?;
    Ok(map_verdict(&mp, v))
}
