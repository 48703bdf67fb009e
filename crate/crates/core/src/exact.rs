//! Exact matching oracles.
//!
//! [`find_perfect_matching`] and [`maximum_matching`] are exhaustive
//! backtracking searches over an incrementally maintained "alive edge"
//! structure: covering an edge kills every edge meeting it and decrements
//! the alive degree of their vertices, and backtracking replays the trail in
//! reverse. The perfect matching search always branches on an uncovered
//! vertex of minimum alive degree (lowest id on ties) and tries its edges in
//! lexicographic order, so results are deterministic.
//!
//! Both searches count visited nodes against an optional budget and report
//! exhaustion as [`Search::BudgetExceeded`], never as absence.

use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::hypergraph::{Hypergraph, Matching};
use crate::vertex_set::VertexSet;

/// Default node budget for exhaustive searches.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Outcome of a budgeted exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search<T> {
    Found(T),
    /// The search space was exhausted: no solution exists.
    Exhausted,
    BudgetExceeded,
}

impl<T> Search<T> {
    pub fn found(self) -> Option<T> {
        match self {
            Search::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Search::Found(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Search<U> {
        match self {
            Search::Found(t) => Search::Found(f(t)),
            Search::Exhausted => Search::Exhausted,
            Search::BudgetExceeded => Search::BudgetExceeded,
        }
    }
}

struct OutOfBudget;

struct State<'a> {
    h: &'a Hypergraph,
    alive: Vec<bool>,
    deg: Vec<u32>,
    /// Covered or discarded vertices.
    removed: VertexSet,
    trail: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl<'a> State<'a> {
    fn new(h: &'a Hypergraph, budget: Option<u64>) -> Self {
        State {
            h,
            alive: vec![true; h.edge_count()],
            deg: (0..h.n() as u32)
                .map(|v| h.vertex_degree(v) as u32)
                .collect(),
            removed: VertexSet::empty(),
            trail: Vec::new(),
            nodes: 0,
            budget: budget.unwrap_or(u64::MAX),
        }
    }

    fn tick(&mut self) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(OutOfBudget)
        } else {
            Ok(())
        }
    }

    /// Removes the vertices in `verts`, killing every alive edge through them.
    fn remove(&mut self, verts: &[u32]) -> usize {
        let mark = self.trail.len();
        for &x in verts {
            self.removed.insert(x);
            for &f in self.h.incident(x) {
                if self.alive[f as usize] {
                    self.alive[f as usize] = false;
                    self.trail.push(f);
                    for &y in self.h.edge(f as usize) {
                        self.deg[y as usize] -= 1;
                    }
                }
            }
        }
        mark
    }

    fn restore(&mut self, mark: usize, verts: &[u32]) {
        while self.trail.len() > mark {
            let f = self.trail.pop().expect("trail");
            self.alive[f as usize] = true;
            for &y in self.h.edge(f as usize) {
                self.deg[y as usize] += 1;
            }
        }
        for &x in verts {
            self.removed.remove(x);
        }
    }

    fn alive_edges_of(&self, v: u32) -> Vec<u32> {
        self.h
            .incident(v)
            .iter()
            .copied()
            .filter(|&f| self.alive[f as usize])
            .collect()
    }

    fn remaining(&self) -> VertexSet {
        self.h.vertex_set() - self.removed
    }

    /// Greedy set of remaining vertices no two of which share an alive edge.
    /// Every such vertex needs its own matching edge.
    fn separated_vertices(&self, remaining: &VertexSet) -> usize {
        let mut order: Vec<u32> = remaining.iter().collect();
        order.sort_by_key(|&v| (self.deg[v as usize], v));
        let mut blocked = VertexSet::empty();
        let mut count = 0;
        for v in order {
            if blocked.contains(v) {
                continue;
            }
            count += 1;
            for &f in self.h.incident(v) {
                if self.alive[f as usize] {
                    blocked |= *self.h.edge_mask(f as usize);
                }
            }
        }
        count
    }

    fn perfect(&mut self, chosen: &mut Vec<u32>) -> std::result::Result<bool, OutOfBudget> {
        self.tick()?;
        let remaining = self.remaining();
        if remaining.is_empty() {
            return Ok(true);
        }
        let v = remaining
            .iter()
            .min_by_key(|&v| (self.deg[v as usize], v))
            .expect("nonempty");
        if self.deg[v as usize] == 0 {
            return Ok(false);
        }
        if self.separated_vertices(&remaining) * self.h.k() > remaining.len() {
            return Ok(false);
        }
        for f in self.alive_edges_of(v) {
            let edge = self.h.edge(f as usize).to_vec();
            let mark = self.remove(&edge);
            chosen.push(f);
            let done = self.perfect(chosen);
            if !matches!(done, Ok(false)) {
                return done;
            }
            chosen.pop();
            self.restore(mark, &edge);
        }
        Ok(false)
    }

    fn maximum(
        &mut self,
        chosen: &mut Vec<u32>,
        best: &mut Vec<u32>,
        ceiling: usize,
    ) -> std::result::Result<(), OutOfBudget> {
        self.tick()?;
        if best.len() == ceiling {
            return Ok(());
        }
        let remaining = self.remaining();
        let active: Vec<u32> = remaining
            .iter()
            .filter(|&v| self.deg[v as usize] > 0)
            .collect();
        if chosen.len() + active.len() / self.h.k() <= best.len() {
            return Ok(());
        }
        let Some(v) = active
            .iter()
            .copied()
            .min_by_key(|&v| (self.deg[v as usize], v))
        else {
            if chosen.len() > best.len() {
                best.clone_from(chosen);
            }
            return Ok(());
        };
        for f in self.alive_edges_of(v) {
            let edge = self.h.edge(f as usize).to_vec();
            let mark = self.remove(&edge);
            chosen.push(f);
            let r = self.maximum(chosen, best, ceiling);
            chosen.pop();
            self.restore(mark, &edge);
            r?;
            if best.len() == ceiling {
                return Ok(());
            }
        }
        // Leave v unmatched.
        let mark = self.remove(&[v]);
        let r = self.maximum(chosen, best, ceiling);
        self.restore(mark, &[v]);
        r
    }
}

fn to_matching(h: &Hypergraph, ids: &[u32]) -> Matching {
    let mut m = Matching::new(ids.iter().map(|&f| h.edge(f as usize).to_vec()).collect());
    m.canonicalize();
    m
}

/// Exhaustive perfect matching search.
pub fn find_perfect_matching(h: &Hypergraph, budget: Option<u64>) -> Result<Search<Matching>> {
    if !h.n().is_multiple_of(h.k()) {
        return Err(invalid(format!(
            "k = {} does not divide n = {}",
            h.k(),
            h.n()
        )));
    }
    Ok(perfect_matching_search(h, budget).0)
}

/// Like [`find_perfect_matching`] but also reports the number of search nodes.
pub fn perfect_matching_search(h: &Hypergraph, budget: Option<u64>) -> (Search<Matching>, u64) {
    if !h.n().is_multiple_of(h.k()) {
        return (Search::Exhausted, 0);
    }
    let mut st = State::new(h, budget);
    let mut chosen = Vec::new();
    let out = match st.perfect(&mut chosen) {
        Ok(true) => Search::Found(to_matching(h, &chosen)),
        Ok(false) => Search::Exhausted,
        Err(OutOfBudget) => Search::BudgetExceeded,
    };
    (out, st.nodes)
}

/// Lexicographically-first maximal matching.
pub fn greedy_matching(h: &Hypergraph) -> Matching {
    let mut covered = VertexSet::empty();
    let mut edges = Vec::new();
    for i in 0..h.edge_count() {
        if covered.is_disjoint(h.edge_mask(i)) {
            covered |= *h.edge_mask(i);
            edges.push(h.edge(i).to_vec());
        }
    }
    Matching::new(edges)
}

/// Exact maximum matching by branch and bound, seeded with the greedy
/// matching as lower bound and bounded above by the number of remaining
/// vertices that still lie in an alive edge. `Search::Found` always carries
/// a maximum matching; `Exhausted` is never returned.
pub fn maximum_matching(h: &Hypergraph, budget: Option<u64>) -> Search<Matching> {
    let greedy = greedy_matching(h);
    let mut best: Vec<u32> = greedy
        .edges()
        .map(|e| h.edge_index(e).expect("edge") as u32)
        .collect();
    let ceiling = h.n() / h.k();
    let mut st = State::new(h, budget);
    match st.maximum(&mut Vec::new(), &mut best, ceiling) {
        Ok(()) => Search::Found(to_matching(h, &best)),
        Err(OutOfBudget) => Search::BudgetExceeded,
    }
}

pub fn max_matching_size(h: &Hypergraph, budget: Option<u64>) -> Search<usize> {
    maximum_matching(h, budget).map(|m| m.len())
}

/// Exact maximum matching of a graph (k = 2) by memoised search over the
/// set of remaining vertices.
pub fn graph_max_matching(g: &Hypergraph) -> Result<Matching> {
    if g.k() != 2 {
        return Err(invalid(format!(
            "graph matching needs k = 2, got k = {}",
            g.k()
        )));
    }
    let adj: Vec<VertexSet> = (0..g.n() as u32)
        .map(|v| {
            let mut s = VertexSet::empty();
            for &f in g.incident(v) {
                s |= *g.edge_mask(f as usize);
            }
            s.remove(v);
            s
        })
        .collect();
    let mut solver = GraphMatcher {
        adj: &adj,
        memo: HashMap::new(),
    };
    let mut rest = g.vertex_set();
    solver.solve(rest);
    let mut pairs = Vec::new();
    while let Some(&(_, choice)) = solver.memo.get(&rest) {
        match choice {
            Choice::Stop => break,
            Choice::Shrink => rest = solver.active(&rest),
            Choice::Skip(v) => rest.remove(v),
            Choice::Pair(u, v) => {
                pairs.push(vec![u, v]);
                rest.remove(u);
                rest.remove(v);
            }
        }
    }
    let mut m = Matching::new(pairs);
    m.canonicalize();
    Ok(m)
}

#[derive(Clone, Copy)]
enum Choice {
    Stop,
    /// Drop the vertices with no neighbour among the remaining ones.
    Shrink,
    Skip(u32),
    Pair(u32, u32),
}

struct GraphMatcher<'a> {
    adj: &'a [VertexSet],
    memo: HashMap<VertexSet, (u32, Choice)>,
}

impl GraphMatcher<'_> {
    fn active(&self, rest: &VertexSet) -> VertexSet {
        rest.iter()
            .filter(|&v| !self.adj[v as usize].is_disjoint(rest))
            .collect()
    }

    fn solve(&mut self, rest: VertexSet) -> u32 {
        if let Some(&(size, _)) = self.memo.get(&rest) {
            return size;
        }
        let active = self.active(&rest);
        let result = if active != rest {
            (self.solve(active), Choice::Shrink)
        } else if let Some(v) = active.min() {
            let ceiling = (active.len() / 2) as u32;
            let mut best = (0, Choice::Stop);
            for u in (self.adj[v as usize] & rest).iter() {
                let mut next = rest;
                next.remove(u);
                next.remove(v);
                let size = 1 + self.solve(next);
                if size > best.0 {
                    best = (size, Choice::Pair(v, u));
                }
                if best.0 == ceiling {
                    break;
                }
            }
            if best.0 < ceiling {
                let mut next = rest;
                next.remove(v);
                let size = self.solve(next);
                if size > best.0 {
                    best = (size, Choice::Skip(v));
                }
            }
            best
        } else {
            (0, Choice::Stop)
        };
        self.memo.insert(rest, result);
        result.0
    }
}
