//! Extremality witnesses and the constructive perfect matching for
//! extremal hypergraphs.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::constructions::{for_each_subset, kpartite_restrict, PartitionSpec};
use crate::error::{invalid, Error, Result};
use crate::exact::{find_perfect_matching, graph_max_matching, Search};
use crate::hypergraph::{binomial, Hypergraph, Matching};
use crate::lp::{extremal_set_from_certificate, perfect_fractional_matching, FractionalOutcome};
use crate::par::{map_range, Exec};
use crate::rational::ratio;
use crate::vertex_set::VertexSet;

/// Largest candidate count the exhaustive search accepts.
pub const EXHAUSTIVE_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalWitness {
    pub s: VertexSet,
    pub bad_edge_count: usize,
    #[serde(with = "crate::rational")]
    pub gamma: BigRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Certificate,
    Heuristic,
}

/// `1/(2k)^{2k}`.
pub fn default_gamma(k: usize) -> BigRational {
    let base = BigInt::from(2 * k as u64);
    BigRational::new(1.into(), num_traits::pow(base, 2 * k))
}

fn gamma_bound(gamma: &BigRational, n: usize, k: usize) -> BigRational {
    gamma * BigRational::from_integer(num_traits::pow(BigInt::from(n), k))
}

fn require_divisible(h: &Hypergraph) -> Result<()> {
    if !h.n().is_multiple_of(h.k()) {
        return Err(invalid(format!(
            "k = {} does not divide n = {}",
            h.k(),
            h.n()
        )));
    }
    Ok(())
}

/// A witness iff at most `γ n^k` edges have two or more vertices in `s`.
pub fn verify_extremal(
    h: &Hypergraph,
    s: &VertexSet,
    gamma: &BigRational,
) -> Result<Option<ExtremalWitness>> {
    require_divisible(h)?;
    if s.len() != h.n() / h.k() || s.max().is_some_and(|v| v as usize >= h.n()) {
        return Err(invalid(format!(
            "|S| = {}, expected n/k = {}",
            s.len(),
            h.n() / h.k()
        )));
    }
    let count = h.edges_with_two_in(s);
    let fits = BigRational::from_integer(count.into()) <= gamma_bound(gamma, h.n(), h.k());
    Ok(fits.then(|| ExtremalWitness {
        s: *s,
        bad_edge_count: count,
        gamma: gamma.clone(),
    }))
}

/// Searches for an extremality witness. Only exhaustive mode proves absence.
pub fn find_extremal_set(
    h: &Hypergraph,
    gamma: &BigRational,
    mode: SearchMode,
    exec: Exec,
) -> Result<Option<ExtremalWitness>> {
    require_divisible(h)?;
    let (n, size) = (h.n(), h.n() / h.k());
    let candidate = match mode {
        SearchMode::Exhaustive => {
            let total = binomial(n as u64, size as u64);
            if total > EXHAUSTIVE_CAP {
                return Err(Error::TooLarge(format!(
                    "C({n}, {size}) = {total} candidates exceed {EXHAUSTIVE_CAP}"
                )));
            }
            best_subset(h, size, exec)
        }
        SearchMode::Certificate => match perfect_fractional_matching(h) {
            FractionalOutcome::Infeasible { certificate } => {
                Some(extremal_set_from_certificate(h, &certificate)?.0)
            }
            FractionalOutcome::Perfect { .. } => None,
        },
        SearchMode::Heuristic => Some(heuristic_set(h)),
    };
    match candidate {
        Some(s) => verify_extremal(h, &s, gamma),
        None => Ok(None),
    }
}

/// Lexicographically first `size`-set with the fewest edges meeting it twice.
fn best_subset(h: &Hypergraph, size: usize, exec: Exec) -> Option<VertexSet> {
    let n = h.n();
    if size == 0 {
        return Some(VertexSet::empty());
    }
    // Split by smallest member so the work parallelises.
    let per_first = map_range(exec, n, |first| {
        let mut best: Option<(usize, VertexSet)> = None;
        let rest = n - first - 1;
        for_each_subset(rest, size - 1, |tail| {
            let mut s = VertexSet::singleton(first as u32);
            for &t in tail {
                s.insert(first as u32 + 1 + t);
            }
            let c = h.edges_with_two_in(&s);
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, s));
            }
        });
        best
    });
    per_first
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .map(|(_, s)| s)
}

/// The `n/k` vertices with the smallest internal score, ties to lower ids.
/// A vertex scores the number of its edges meeting another vertex of lower
/// degree, so a sparse-inside block ranks first.
fn heuristic_set(h: &Hypergraph) -> VertexSet {
    let n = h.n();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (h.vertex_degree(v), v));
    let low: VertexSet = order[..n / h.k()].iter().copied().collect();
    let score = |v: u32| {
        h.incident(v)
            .iter()
            .filter(|&&f| h.edge_mask(f as usize).intersection_len(&low) >= 2)
            .count()
    };
    order.sort_by_key(|&v| (score(v), h.vertex_degree(v), v));
    order[..n / h.k()].iter().copied().collect()
}

/// Diagnostics of one run of [`extremal_perfect_matching`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub x: VertexSet,
    pub y: VertexSet,
    pub cover_edges: usize,
    /// Whether every vertex of the k-partite remainder met the classical
    /// degree condition guaranteeing a perfect matching.
    pub partite_degree_condition: Option<bool>,
    pub failed_stage: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalRun {
    pub matching: Option<Matching>,
    pub report: ExtremalReport,
}

/// Checks the hypotheses under which the construction is meant to run.
pub fn extremal_preconditions(h: &Hypergraph, witness: &ExtremalWitness) -> Result<()> {
    require_divisible(h)?;
    let (n, k) = (h.n(), h.k());
    match verify_extremal(h, &witness.s, &witness.gamma)? {
        Some(w) if w.bad_edge_count == witness.bad_edge_count => {}
        _ => return Err(invalid("witness does not verify")),
    }
    let need = (k - 1) * n / k - (k - 2);
    if h.delta_plus() < need {
        return Err(invalid(format!(
            "minimum positive codegree {} is below (k-1)n/k - (k-2) = {need}",
            h.delta_plus()
        )));
    }
    if !h.isolated_vertices().is_empty() {
        return Err(invalid("hypergraph has isolated vertices"));
    }
    Ok(())
}

/// Number of sets in `K(S, T^{k-1})` through each vertex that are not edges.
fn missing_degrees(h: &Hypergraph, s: &VertexSet) -> Vec<u128> {
    let (n, k) = (h.n(), h.k());
    let t_len = (n - s.len()) as u64;
    let from_s = binomial(t_len, k as u64 - 1);
    let from_t = s.len() as u128 * binomial(t_len.saturating_sub(1), k as u64 - 2);
    (0..n as u32)
        .map(|v| {
            let present = h
                .incident(v)
                .iter()
                .filter(|&&f| h.edge_mask(f as usize).intersection_len(s) == 1)
                .count() as u128;
            let total = if s.contains(v) { from_s } else { from_t };
            total - present
        })
        .collect()
}

/// Extends `base` inside `pool` by `extra` vertices, keeping every
/// intermediate set inside some edge, for each request in turn and with all
/// results pairwise disjoint. Backtracks over candidate choices.
fn extend_all(
    h: &Hypergraph,
    requests: &[(VertexSet, usize)],
    pool: &VertexSet,
    used: &mut VertexSet,
    out: &mut Vec<VertexSet>,
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    let Some(&(base, extra)) = requests.get(out.len()) else {
        return Some(true);
    };
    grow(h, base, extra, requests, pool, used, out, nodes, budget)
}

#[allow(clippy::too_many_arguments)]
fn grow(
    h: &Hypergraph,
    current: VertexSet,
    extra: usize,
    requests: &[(VertexSet, usize)],
    pool: &VertexSet,
    used: &mut VertexSet,
    out: &mut Vec<VertexSet>,
    nodes: &mut u64,
    budget: u64,
) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    if extra == 0 {
        out.push(current);
        let r = extend_all(h, requests, pool, used, out, nodes, budget);
        if r != Some(false) {
            return r;
        }
        out.pop();
        return Some(false);
    }
    let options = h.extend_candidates(&current).ok()? & *pool;
    for b in (options - *used).iter() {
        let mut next = current;
        next.insert(b);
        debug_assert!(h.degree(&next).unwrap_or(0) >= 1);
        used.insert(b);
        let r = grow(h, next, extra - 1, requests, pool, used, out, nodes, budget);
        if r != Some(false) {
            return r;
        }
        used.remove(b);
    }
    Some(false)
}

fn failed(report: &mut ExtremalReport, stage: &str) -> ExtremalRun {
    report.failed_stage = Some(stage.to_string());
    ExtremalRun {
        matching: None,
        report: std::mem::take(report),
    }
}

/// Builds a perfect matching from an extremality witness: cover the
/// atypical vertices with a small matching, then solve the k-partite
/// remainder exactly.
pub fn extremal_perfect_matching(
    h: &Hypergraph,
    witness: &ExtremalWitness,
    budget: Option<u64>,
) -> Result<ExtremalRun> {
    extremal_preconditions(h, witness)?;
    let (n, k) = (h.n(), h.k());
    let budget_nodes = budget.unwrap_or(u64::MAX);
    let s = witness.s;
    let mut report = ExtremalReport::default();

    // Atypical vertices: deg_F(v)^2 > γ n^{2(k-1)}.
    let limit =
        &witness.gamma * BigRational::from_integer(num_traits::pow(BigInt::from(n), 2 * (k - 1)));
    let deg_f = missing_degrees(h, &s);
    for v in 0..n as u32 {
        let d = BigInt::from(deg_f[v as usize]);
        if BigRational::from_integer(&d * &d) > limit {
            if s.contains(v) {
                report.x.insert(v);
            } else {
                report.y.insert(v);
            }
        }
    }
    let a = s | report.y;
    let b = h.vertex_set() - a;

    // Pair up |Y| vertices of A along pairs of positive codegree.
    let a_list = a.to_vec();
    let mut pairs = Vec::new();
    for (i, &u) in a_list.iter().enumerate() {
        for (j, &v) in a_list.iter().enumerate().skip(i + 1) {
            if h.degree(&[u, v].iter().collect())? >= 1 {
                pairs.push([i as u32, j as u32]);
            }
        }
    }
    let g = Hypergraph::new(2, a_list.len(), pairs)?;
    let mut mg: Vec<Vec<u32>> = graph_max_matching(&g)?
        .relabel(&a_list)
        .edges()
        .map(<[u32]>::to_vec)
        .collect();
    if mg.len() < report.y.len() {
        return Ok(failed(&mut report, "auxiliary matching"));
    }
    mg.sort();
    mg.truncate(report.y.len());
    let in_mg: VertexSet = mg.iter().flatten().collect();
    let leftover = (report.x | report.y) - in_mg;

    // Extend every pair by k-2 and every leftover vertex by k-1 vertices of B.
    let mut requests: Vec<(VertexSet, usize)> =
        mg.iter().map(|p| (p.iter().collect(), k - 2)).collect();
    requests.extend(leftover.iter().map(|x| (VertexSet::singleton(x), k - 1)));
    let mut used = VertexSet::empty();
    let mut cover = Vec::new();
    let mut nodes = 0;
    match extend_all(
        h,
        &requests,
        &b,
        &mut used,
        &mut cover,
        &mut nodes,
        budget_nodes,
    ) {
        Some(true) => {}
        Some(false) => return Ok(failed(&mut report, "extension")),
        None => return Ok(failed(&mut report, "extension budget")),
    }
    let m: Vec<Vec<u32>> = cover.iter().map(VertexSet::to_vec).collect();
    report.cover_edges = m.len();
    let covered: VertexSet = cover.iter().fold(VertexSet::empty(), |acc, e| acc | *e);

    // Split B' round-robin into k-1 parts and solve the k-partite remainder.
    let a_rest = a - covered;
    let b_rest = b - covered;
    let n_rest = n - covered.len();
    debug_assert_eq!(a_rest.len() * k, n_rest);
    debug_assert_eq!(b_rest.len() * k, (k - 1) * n_rest);
    let (sub, map) = h.induced(&(a_rest | b_rest));
    let mut parts = vec![VertexSet::empty(); k];
    let mut b_seen = 0;
    for (new, &old) in map.iter().enumerate() {
        if a_rest.contains(old) {
            parts[0].insert(new as u32);
        } else {
            parts[1 + b_seen % (k - 1)].insert(new as u32);
            b_seen += 1;
        }
    }
    let star = kpartite_restrict(&sub, &PartitionSpec::new(sub.n(), parts)?)?;
    let class = n_rest / k;
    let need = ratio((k - 1) as i64, k as i64)
        * BigRational::from_integer(num_traits::pow(BigInt::from(class), k - 1));
    let dh = (0..star.n() as u32)
        .all(|v| BigRational::from_integer(star.vertex_degree(v).into()) >= need);
    log::info!("k-partite degree condition holds: {dh}");
    report.partite_degree_condition = Some(dh);
    let rest = match find_perfect_matching(&star, budget)? {
        Search::Found(pm) => pm.relabel(&map),
        Search::Exhausted => return Ok(failed(&mut report, "k-partite matching")),
        Search::BudgetExceeded => return Ok(failed(&mut report, "k-partite budget")),
    };
    let mut full = Matching::new(m);
    full.extend(rest);
    full.canonicalize();
    if !h.validate_matching(&full, true) {
        return Ok(failed(&mut report, "validation"));
    }
    Ok(ExtremalRun {
        matching: Some(full),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, extremal_construction};

    fn set(v: &[u32]) -> VertexSet {
        v.iter().collect()
    }

    #[test]
    fn default_gamma_for_three() {
        assert_eq!(default_gamma(3), ratio(1, 46656));
    }

    #[test]
    fn verify_examples() {
        let g = default_gamma(3);
        let ext = extremal_construction(3, 6).unwrap();
        let w = verify_extremal(&ext, &set(&[0, 2]), &g).unwrap().unwrap();
        assert_eq!(w.bad_edge_count, 0);
        let k6 = complete(3, 6).unwrap();
        assert!(verify_extremal(&k6, &set(&[0, 1]), &g).unwrap().is_none());
        assert!(verify_extremal(&k6, &set(&[0, 1, 2]), &g).is_err());
    }

    #[test]
    fn find_examples() {
        let g = default_gamma(3);
        let ext = extremal_construction(3, 6).unwrap();
        let w = find_extremal_set(&ext, &g, SearchMode::Exhaustive, Exec::Parallel)
            .unwrap()
            .unwrap();
        assert_eq!(w.bad_edge_count, 0);
        let k6 = complete(3, 6).unwrap();
        assert!(
            find_extremal_set(&k6, &g, SearchMode::Exhaustive, Exec::Sequential)
                .unwrap()
                .is_none()
        );
        let w = find_extremal_set(&ext, &g, SearchMode::Certificate, Exec::Parallel)
            .unwrap()
            .unwrap();
        assert_eq!(w.bad_edge_count, 0);
        let w = find_extremal_set(&ext, &g, SearchMode::Heuristic, Exec::Parallel)
            .unwrap()
            .unwrap();
        assert!(w.s.is_subset(&set(&[0, 1, 2])));
        assert!(matches!(
            find_extremal_set(
                &complete(3, 60).unwrap(),
                &g,
                SearchMode::Exhaustive,
                Exec::Parallel
            ),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn exhaustive_modes_agree() {
        let ext = extremal_construction(3, 12).unwrap();
        let g = default_gamma(3);
        let a = find_extremal_set(&ext, &g, SearchMode::Exhaustive, Exec::Parallel).unwrap();
        let b = find_extremal_set(&ext, &g, SearchMode::Exhaustive, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.unwrap().s, set(&[0, 1, 2, 3]));
    }

    #[test]
    fn ext_plus_one_inner_edge() {
        // The extra edge {0,1,2} makes a perfect matching possible but drops
        // the minimum positive codegree to 1, so the construction refuses.
        let ext = extremal_construction(3, 12).unwrap();
        let mut edges: Vec<Vec<u32>> = ext.edges().map(<[u32]>::to_vec).collect();
        edges.push(vec![0, 1, 2]);
        let h = Hypergraph::new(3, 12, edges).unwrap();
        assert!(find_perfect_matching(&h, None).unwrap().is_found());
        let g = default_gamma(3);
        assert!(
            find_extremal_set(&h, &g, SearchMode::Exhaustive, Exec::Parallel)
                .unwrap()
                .is_none()
        );
        let w = find_extremal_set(&h, &ratio(1, 1000), SearchMode::Exhaustive, Exec::Parallel)
            .unwrap()
            .unwrap();
        assert_eq!(w.bad_edge_count, 1);
        assert!(matches!(
            extremal_perfect_matching(&h, &w, None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn two_complete_blocks() {
        // Disjoint union of two complete 3-graphs on six vertices.
        let mut edges = Vec::new();
        for_each_subset(6, 3, |e| {
            edges.push(e.to_vec());
            edges.push(e.iter().map(|v| v + 6).collect::<Vec<u32>>());
        });
        let h = Hypergraph::new(3, 12, edges).unwrap();
        let g = ratio(1, 10);
        let w = find_extremal_set(&h, &g, SearchMode::Exhaustive, Exec::Parallel).unwrap();
        let w = w.expect("a set of four vertices with few edges meeting it twice");
        // Codegrees inside a block are 4, below (k-1)n/k - (k-2) = 7.
        assert!(matches!(
            extremal_perfect_matching(&h, &w, None),
            Err(Error::InvalidInput(_))
        ));
        assert!(find_perfect_matching(&h, None).unwrap().is_found());
    }

    #[test]
    fn balanced_barrier_is_solved() {
        // Every triple meeting S = {0, .., n/3 - 1} at most once: the
        // witness has count 0 and the codegree condition holds exactly.
        for n in [12u32, 30] {
            let h = complete(3, n as usize)
                .unwrap()
                .filter_edges(|e| e[1] >= n / 3);
            assert_eq!(h.delta_plus(), 2 * n as usize / 3 - 1);
            let s: VertexSet = (0..n / 3).collect();
            let w = verify_extremal(&h, &s, &default_gamma(3)).unwrap().unwrap();
            let run = extremal_perfect_matching(&h, &w, None).unwrap();
            assert_eq!(run.report.failed_stage, None);
            assert_eq!(run.report.partite_degree_condition, Some(true));
            assert!(h.validate_matching(&run.matching.unwrap(), true));
        }
    }

    #[test]
    fn indivisible_is_rejected() {
        let h = complete(3, 7).unwrap();
        let w = ExtremalWitness {
            s: set(&[0, 1]),
            bad_edge_count: 0,
            gamma: ratio(1, 2),
        };
        assert!(extremal_perfect_matching(&h, &w, None).is_err());
    }
}
