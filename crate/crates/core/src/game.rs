//! Mean-payoff games on bipartite weighted graphs, solved exactly by value
//! iteration, plus the cost game that prices the choices of the most
//! permissive observer.
//!
//! Vertices belong to Max or Min; every edge crosses sides. A play is an
//! infinite walk; its payoff is the limit average of edge weights; Max plays
//! to raise it, Min to lower it. Both players have optimal positional
//! strategies and every vertex has an exact rational value with denominator
//! at most the number of vertices, which value iteration pins down after
//! finitely many rounds.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num::Signed;

use crate::alphabet::Label;
use crate::cost::Rational;
use crate::error::{Error, Result};
use crate::observer::Observer;
use crate::plant::{Plant, StateId};
use crate::synthesis::{extract_with, most_permissive_observer, MostPermissiveObserver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Max,
    Min,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Max => Player::Min,
            Player::Min => Player::Max,
        }
    }
}

/// Weight magnitudes above this are rejected up front; they would make the
/// exact iteration bound overflow long before any practical game needs them.
pub const MAX_WEIGHT: i64 = 1 << 20;

/// A bipartite mean-payoff game. Edge order within a vertex is preserved
/// from construction; the cost game relies on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraphGame {
    names: Vec<String>,
    owner: Vec<Player>,
    adj: Vec<Vec<(usize, i64)>>,
    source: usize,
}

impl WeightedGraphGame {
    pub fn new(
        names: Vec<String>,
        owner: Vec<Player>,
        adj: Vec<Vec<(usize, i64)>>,
        source: usize,
    ) -> Result<WeightedGraphGame> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidGame("no vertices".into()));
        }
        if owner.len() != n || adj.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} names, {} owners, {} adjacency rows",
                n,
                owner.len(),
                adj.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !crate::alphabet::valid_token(name) {
                return Err(Error::BadName(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        if source >= n {
            return Err(Error::StateOutOfRange(source));
        }
        for (v, out) in adj.iter().enumerate() {
            if out.is_empty() {
                return Err(Error::InvalidGame(format!(
                    "vertex {} has no outgoing edge",
                    names[v]
                )));
            }
            for &(u, w) in out {
                if u >= n {
                    return Err(Error::StateOutOfRange(u));
                }
                if owner[u] == owner[v] {
                    return Err(Error::InvalidGame(format!(
                        "edge {} -> {} stays on one side",
                        names[v], names[u]
                    )));
                }
                if w.abs() > MAX_WEIGHT {
                    return Err(Error::InvalidGame(format!(
                        "weight {w} on {} -> {} out of range",
                        names[v], names[u]
                    )));
                }
            }
        }
        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([source]);
        reached[source] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adj[v] {
                if !reached[u] {
                    reached[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if let Some(v) = reached.iter().position(|r| !r) {
            return Err(Error::InvalidGame(format!(
                "vertex {} unreachable from the source",
                names[v]
            )));
        }
        Ok(WeightedGraphGame {
            names,
            owner,
            adj,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn owner(&self, v: usize) -> Player {
        self.owner[v]
    }

    pub fn edges(&self, v: usize) -> &[(usize, i64)] {
        &self.adj[v]
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn max_weight(&self) -> i64 {
        self.adj
            .iter()
            .flatten()
            .map(|&(_, w)| w.abs())
            .max()
            .unwrap_or(0)
    }

    /// Exact values of every vertex.
    pub fn zp_value(&self) -> Result<ZpSolution> {
        solve(&self.owner, &self.adj)
    }

    /// Values when each vertex with `fixed[v] = Some(i)` may only use its
    /// i-th edge.
    pub(crate) fn solve_restricted(&self, fixed: &[Option<usize>]) -> Result<ZpSolution> {
        let adj: Vec<Vec<(usize, i64)>> = self
            .adj
            .iter()
            .enumerate()
            .map(|(v, out)| match fixed[v] {
                Some(i) => vec![out[i]],
                None => out.clone(),
            })
            .collect();
        solve(&self.owner, &adj)
    }

    fn solve_active(&self, active: &[Vec<usize>]) -> Result<ZpSolution> {
        let adj: Vec<Vec<(usize, i64)>> = active
            .iter()
            .enumerate()
            .map(|(v, keep)| keep.iter().map(|&i| self.adj[v][i]).collect())
            .collect();
        solve(&self.owner, &adj)
    }

    /// One optimal edge per vertex, for both players at once. Found by
    /// halving each vertex's edge list and keeping the half under which the
    /// whole value vector is unchanged.
    pub fn zp_optimal_strategies(&self) -> Result<PositionalStrategies> {
        let base = self.zp_value()?;
        let n = self.len();
        let mut active: Vec<Vec<usize>> = self
            .adj
            .iter()
            .map(|out| (0..out.len()).collect())
            .collect();
        for v in 0..n {
            while active[v].len() > 1 {
                let keep = active[v].len().div_ceil(2);
                let tail = active[v].split_off(keep);
                let sol = self.solve_active(&active)?;
                if sol.values != base.values {
                    // no optimal profile uses the kept half here, so one
                    // survives in the other half
                    active[v] = tail;
                }
            }
        }
        let choice: Vec<usize> = active.iter().map(|a| a[0]).collect();
        let walked = self.value_with_strategies(&choice);
        assert_eq!(
            walked, base.values,
            "pruned positional strategies must replay the game values"
        );
        Ok(PositionalStrategies {
            choice,
            values: base.values,
        })
    }

    /// Values when both players commit to one edge per vertex: every walk is
    /// a lasso and its payoff is the mean of its cycle.
    pub fn value_with_strategies(&self, choice: &[usize]) -> Vec<Rational> {
        let n = self.len();
        let mut val: Vec<Option<Rational>> = vec![None; n];
        for start in 0..n {
            if val[start].is_some() {
                continue;
            }
            let mut path: Vec<usize> = Vec::new();
            let mut at: HashMap<usize, usize> = HashMap::new();
            let mut v = start;
            let value = loop {
                if let Some(x) = val[v] {
                    break x;
                }
                if let Some(&i) = at.get(&v) {
                    let cycle = &path[i..];
                    let sum: i64 = cycle.iter().map(|&u| self.adj[u][choice[u]].1).sum();
                    break Rational::new(sum, cycle.len() as i64);
                }
                at.insert(v, path.len());
                path.push(v);
                v = self.adj[v][choice[v]].0;
            };
            for &u in &path {
                val[u] = Some(value);
            }
        }
        val.into_iter().map(|x| x.unwrap()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZpSolution {
    pub values: Vec<Rational>,
    /// Number of value-iteration rounds that were run.
    pub iterations: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalStrategies {
    /// Chosen edge index per vertex, into [`WeightedGraphGame::edges`].
    pub choice: Vec<usize>,
    pub values: Vec<Rational>,
}

/// Finite-horizon value iteration. After t = 4n³W rounds the average
/// ν_t(v)/t is within 2nW/t of the true value, which is closer than half the
/// gap 1/(n(n-1)) between distinct candidate rationals, so rounding to the
/// nearest fraction with denominator at most n recovers the value exactly.
fn solve(owner: &[Player], adj: &[Vec<(usize, i64)>]) -> Result<ZpSolution> {
    let n = owner.len();
    let w = adj
        .iter()
        .flatten()
        .map(|&(_, x)| x.abs())
        .max()
        .unwrap_or(0)
        .max(1);
    let t = (n as i64)
        .checked_pow(3)
        .and_then(|c| c.checked_mul(4))
        .and_then(|c| c.checked_mul(w))
        .ok_or_else(|| Error::InvalidGame("value-iteration horizon overflows".into()))?;
    t.checked_mul(w)
        .ok_or_else(|| Error::InvalidGame("value-iteration range overflows".into()))?;
    let mut prev = vec![0i64; n];
    let mut next = vec![0i64; n];
    for _ in 0..t {
        for v in 0..n {
            let fold = adj[v].iter().map(|&(u, wt)| wt + prev[u]);
            next[v] = match owner[v] {
                Player::Max => fold.max(),
                Player::Min => fold.min(),
            }
            .expect("validated games have no dead ends");
        }
        std::mem::swap(&mut prev, &mut next);
    }
    let values = prev.iter().map(|&nu| round_value(nu, t, n)).collect();
    Ok(ZpSolution {
        values,
        iterations: t,
    })
}

/// Nearest rational to ν_t/t with denominator at most n, accepted only when
/// strictly within half the minimal gap between such rationals.
fn round_value(nu: i64, t: i64, n: usize) -> Rational {
    let approx = Rational::new(nu, t);
    if n < 2 {
        return approx;
    }
    let alpha = Rational::new(1, 2 * n as i64 * (n as i64 - 1));
    for d in 1..=n as i64 {
        let p = (approx * Rational::from_integer(d)).round().to_integer();
        let cand = Rational::new(p, d);
        if (cand - approx).abs() < alpha {
            return cand;
        }
    }
    panic!("no rational with denominator <= {n} is within tolerance of {nu}/{t}");
}

/// Where a cost-game vertex came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostVertex {
    /// Min picks a watch set: plant state paired with a choice node.
    Choice { plant: StateId, even: usize },
    /// Max picks a plant move: plant state paired with a wait node.
    Event { plant: StateId, odd: usize },
    /// Bookkeeping stop between an escaping plant move and re-entering the
    /// wait node; its single edge re-charges the watch set.
    Completion { plant: StateId, odd: usize },
}

/// The game that prices observer choices against worst-case plant behavior.
///
/// Plays alternate a Min edge carrying the chosen watch-set size and a Max
/// edge carrying 0, so a play's mean is half the per-step average cost; the
/// reported cost doubles the source value to undo that.
#[derive(Debug, Clone)]
pub struct CostGame {
    pub game: WeightedGraphGame,
    pub kinds: Vec<CostVertex>,
    /// ε-completed plant the game ranges over.
    pub plant: Plant,
    pub completed: bool,
}

pub fn build_cost_game(plant: &Plant, mpo: &MostPermissiveObserver) -> Result<CostGame> {
    if plant.alphabet() != &mpo.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    let (plant, completed) = plant.epsilon_complete();
    let mut index: HashMap<CostVertex, usize> = HashMap::new();
    let mut kinds: Vec<CostVertex> = Vec::new();
    let mut adj: Vec<Vec<(usize, i64)>> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let root = CostVertex::Choice {
        plant: plant.initial(),
        even: mpo.initial,
    };
    index.insert(root, 0);
    kinds.push(root);
    adj.push(Vec::new());
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        let kind = kinds[v];
        let mut out: Vec<(usize, i64)> = Vec::new();
        let mut seen: BTreeSet<(usize, i64)> = BTreeSet::new();
        let mut intern = |kind: CostVertex,
                          kinds: &mut Vec<CostVertex>,
                          adj: &mut Vec<Vec<(usize, i64)>>,
                          queue: &mut VecDeque<usize>| {
            *index.entry(kind).or_insert_with(|| {
                kinds.push(kind);
                adj.push(Vec::new());
                queue.push_back(kinds.len() - 1);
                kinds.len() - 1
            })
        };
        match kind {
            CostVertex::Choice { plant: q, even } => {
                for &(x, odd) in &mpo.evens[even].choices {
                    let u = intern(
                        CostVertex::Event { plant: q, odd },
                        &mut kinds,
                        &mut adj,
                        &mut queue,
                    );
                    out.push((u, x.len() as i64));
                }
            }
            CostVertex::Event { plant: q, odd } => {
                for tr in plant.outgoing(q) {
                    let next =
                        match tr.label {
                            Label::Event(e) => {
                                mpo.odds[odd].obs.iter().find(|&&(oe, _)| oe == e).map(
                                    |&(_, even)| CostVertex::Choice {
                                        plant: tr.dst,
                                        even,
                                    },
                                )
                            }
                            Label::Epsilon | Label::Fault => None,
                        }
                        .unwrap_or(CostVertex::Completion { plant: tr.dst, odd });
                    let u = intern(next, &mut kinds, &mut adj, &mut queue);
                    if seen.insert((u, 0)) {
                        out.push((u, 0));
                    }
                }
            }
            CostVertex::Completion { plant: q, odd } => {
                let u = intern(
                    CostVertex::Event { plant: q, odd },
                    &mut kinds,
                    &mut adj,
                    &mut queue,
                );
                out.push((u, mpo.odds[odd].watch.len() as i64));
            }
        }
        adj[v] = out;
    }
    let names = kinds
        .iter()
        .map(|k| match *k {
            CostVertex::Choice { plant: q, even } => format!("{}*e{even}", plant.state_name(q)),
            CostVertex::Event { plant: q, odd } => format!("{}*o{odd}", plant.state_name(q)),
            CostVertex::Completion { plant: q, odd } => {
                format!("{}*c{odd}", plant.state_name(q))
            }
        })
        .collect();
    let owner = kinds
        .iter()
        .map(|k| match k {
            CostVertex::Event { .. } => Player::Max,
            _ => Player::Min,
        })
        .collect();
    let game = WeightedGraphGame::new(names, owner, adj, 0)?;
    Ok(CostGame {
        game,
        kinds,
        plant,
        completed,
    })
}

/// An observer achieving, or at least approaching from above, the optimal
/// cost, together with that optimum.
#[derive(Debug, Clone)]
pub struct OptimalObserver {
    /// Value of the cost game: the cheapest worst-case long-run average any
    /// strategy of the most permissive observer can guarantee.
    pub cost: Rational,
    /// Observer folded from the game by committing one watch set per choice
    /// node, preferring commitments that leave every vertex value unchanged.
    pub observer: Observer,
    pub game_vertices: usize,
}

#[derive(Debug, Clone)]
pub enum OptimalOutcome {
    /// No observer makes the plant diagnosable at this k.
    NoObserver,
    Found(OptimalObserver),
}

/// Cheapest observer among the strategies of the most permissive observer.
pub fn optimal_cost_observer(plant: &Plant, k: u32, cap: usize) -> Result<OptimalOutcome> {
    let synth = most_permissive_observer(plant, k, cap)?;
    let Some(mpo) = synth.mpo else {
        return Ok(OptimalOutcome::NoObserver);
    };
    let cg = build_cost_game(plant, &mpo)?;
    let n = cg.game.len();
    let mut base = cg.game.zp_value()?;
    let cost = base.values[cg.game.source()] * Rational::from_integer(2);
    let mut verts_of: Vec<Vec<usize>> = vec![Vec::new(); mpo.evens.len()];
    for (v, kind) in cg.kinds.iter().enumerate() {
        if let CostVertex::Choice { even, .. } = kind {
            verts_of[*even].push(v);
        }
    }
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut chosen: Vec<usize> = vec![0; mpo.evens.len()];
    for e in 0..mpo.evens.len() {
        let m = mpo.evens[e].choices.len();
        if m <= 1 || verts_of[e].is_empty() {
            continue;
        }
        let mut committed: Option<(usize, ZpSolution)> = None;
        let mut fallback: Option<(Rational, usize, ZpSolution)> = None;
        for c in 0..m {
            for &v in &verts_of[e] {
                fixed[v] = Some(c);
            }
            let sol = cg.game.solve_restricted(&fixed)?;
            if sol.values == base.values {
                committed = Some((c, sol));
                break;
            }
            let at_source = sol.values[cg.game.source()];
            if fallback
                .as_ref()
                .is_none_or(|&(best, _, _)| at_source < best)
            {
                fallback = Some((at_source, c, sol));
            }
        }
        // committing the same watch set at every plant state of this choice
        // node can in principle cost more than the game optimum; take the
        // least bad commitment and keep comparing against its values
        let (c, sol) = committed.unwrap_or_else(|| {
            let (_, c, sol) = fallback.expect("every choice node offers a watch set");
            (c, sol)
        });
        chosen[e] = c;
        for &v in &verts_of[e] {
            fixed[v] = Some(c);
        }
        base = sol;
    }
    let observer = extract_with(&mpo, |e, _| chosen[e]);
    Ok(OptimalOutcome::Found(OptimalObserver {
        cost,
        observer,
        game_vertices: n,
    }))
}

#[derive(Debug, Clone)]
pub enum BoundedOutcome {
    /// No observer makes the plant diagnosable at this k.
    NoObserver,
    /// Diagnosis is possible but not within the budget.
    OverBudget {
        optimal: Rational,
    },
    Within(OptimalObserver),
}

/// Like [`optimal_cost_observer`] but gated by a budget.
pub fn bounded_cost_observer(
    plant: &Plant,
    k: u32,
    budget: Rational,
    cap: usize,
) -> Result<BoundedOutcome> {
    match optimal_cost_observer(plant, k, cap)? {
        OptimalOutcome::NoObserver => Ok(BoundedOutcome::NoObserver),
        OptimalOutcome::Found(opt) => {
            if opt.cost <= budget {
                Ok(BoundedOutcome::Within(opt))
            } else {
                Ok(BoundedOutcome::OverBudget { optimal: opt.cost })
            }
        }
    }
}
