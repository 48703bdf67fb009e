//! k-uniform hypergraphs, codegree computations and matchings.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::vertex_set::{VertexSet, MAX_VERTICES};

/// An immutable k-uniform hypergraph on the vertices `0..n`.
///
/// Edges are stored as strictly increasing vertex lists in lexicographic
/// order, so two hypergraphs with the same edge set compare and serialise
/// identically. Each vertex keeps the ascending list of its incident edge
/// indices.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    verts: Vec<u32>,
    masks: Vec<VertexSet>,
    incidence: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Builds a hypergraph from arbitrary edge lists.
    ///
    /// Vertices inside an edge may be given in any order. Out-of-range
    /// vertices, repeated vertices within an edge, wrong edge sizes and
    /// duplicate edges are rejected.
    pub fn new<I, E>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[u32]>,
    {
        check_dims(k, n)?;
        let mut list: Vec<Vec<u32>> = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let mut e = e.as_ref().to_vec();
            if e.len() != k {
                return Err(invalid(format!(
                    "edge {i} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            e.sort_unstable();
            if let Some(&v) = e.iter().find(|&&v| v as usize >= n) {
                return Err(invalid(format!("edge {i} uses vertex {v} outside 0..{n}")));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("edge {i} repeats a vertex: {e:?}")));
            }
            list.push(e);
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self::from_sorted(k, n, list.concat()))
    }

    /// The hypergraph with no edges.
    pub fn empty(k: usize, n: usize) -> Result<Self> {
        check_dims(k, n)?;
        Ok(Self::from_sorted(k, n, Vec::new()))
    }

    /// `verts` must hold strictly increasing k-chunks in strictly increasing
    /// lexicographic order.
    pub(crate) fn from_sorted(k: usize, n: usize, verts: Vec<u32>) -> Self {
        debug_assert!(k >= 1 && verts.len().is_multiple_of(k));
        debug_assert!(verts.chunks(k).all(|e| e.windows(2).all(|w| w[0] < w[1])));
        debug_assert!(verts
            .chunks(k)
            .zip(verts.chunks(k).skip(1))
            .all(|(a, b)| a < b));
        let m = verts.len() / k;
        let mut masks = Vec::with_capacity(m);
        let mut incidence = vec![Vec::new(); n];
        for (i, e) in verts.chunks(k).enumerate() {
            masks.push(e.iter().collect());
            for &v in e {
                incidence[v as usize].push(i as u32);
            }
        }
        Hypergraph {
            n,
            k,
            verts,
            masks,
            incidence,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.masks.len()
    }

    /// Edge `i` in canonical order, as a sorted vertex slice.
    pub fn edge(&self, i: usize) -> &[u32] {
        &self.verts[i * self.k..(i + 1) * self.k]
    }

    pub fn edge_mask(&self, i: usize) -> &VertexSet {
        &self.masks[i]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.verts.chunks(self.k.max(1))
    }

    /// Indices of the edges containing `v`, ascending.
    pub fn incident(&self, v: u32) -> &[u32] {
        &self.incidence[v as usize]
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Index of `edge` (sorted) in the canonical order.
    pub fn edge_index(&self, edge: &[u32]) -> Option<usize> {
        if edge.len() != self.k {
            return None;
        }
        let m = self.edge_count();
        let pos = partition_point(m, |i| self.edge(i) < edge);
        (pos < m && self.edge(pos) == edge).then_some(pos)
    }

    pub fn contains_edge(&self, edge: &[u32]) -> bool {
        let mut e = edge.to_vec();
        e.sort_unstable();
        self.edge_index(&e).is_some()
    }

    pub fn vertex_degree(&self, v: u32) -> usize {
        self.incidence[v as usize].len()
    }

    fn check_subset(&self, s: &VertexSet) -> Result<()> {
        match s.max() {
            Some(v) if v as usize >= self.n => {
                Err(invalid(format!("vertex {v} outside 0..{}", self.n)))
            }
            _ => Ok(()),
        }
    }

    /// Indices of the edges containing every member of `s` (all edges if `s` is empty).
    fn edges_containing<'a>(&'a self, s: &'a VertexSet) -> Box<dyn Iterator<Item = usize> + 'a> {
        match s.iter().min_by_key(|&v| self.incidence[v as usize].len()) {
            None => Box::new(0..self.edge_count()),
            Some(pivot) => Box::new(
                self.incidence[pivot as usize]
                    .iter()
                    .map(|&i| i as usize)
                    .filter(move |&i| s.is_subset(&self.masks[i])),
            ),
        }
    }

    /// Number of edges containing `s`. `degree(∅)` is the edge count.
    pub fn degree(&self, s: &VertexSet) -> Result<usize> {
        self.check_subset(s)?;
        Ok(self.edges_containing(s).count())
    }

    /// Codegree of every (k-1)-set that lies in at least one edge.
    fn positive_codegrees(&self) -> HashMap<VertexSet, u32> {
        let mut map: HashMap<VertexSet, u32> = HashMap::with_capacity(self.edge_count() * self.k);
        for (i, e) in self.edges().enumerate() {
            for &v in e {
                let mut sub = self.masks[i];
                sub.remove(v);
                *map.entry(sub).or_insert(0) += 1;
            }
        }
        map
    }

    fn require_n_at_least_k(&self) -> Result<()> {
        if self.n < self.k {
            return Err(invalid(format!(
                "n = {} is smaller than k = {}",
                self.n, self.k
            )));
        }
        Ok(())
    }

    /// Minimum codegree: the minimum of `degree(S)` over all (k-1)-sets `S`.
    pub fn min_codegree(&self) -> Result<usize> {
        self.require_n_at_least_k()?;
        let map = self.positive_codegrees();
        let all = binomial(self.n as u64, self.k as u64 - 1);
        if (map.len() as u128) < all {
            return Ok(0);
        }
        Ok(map.values().min().map_or(0, |&d| d as usize))
    }

    /// Minimum positive codegree with a minimising (k-1)-set.
    ///
    /// Ties are broken towards the lexicographically smallest set. Returns
    /// `(0, None)` for a hypergraph without edges.
    pub fn min_positive_codegree(&self) -> Result<(usize, Option<VertexSet>)> {
        self.require_n_at_least_k()?;
        let map = self.positive_codegrees();
        let best = map
            .iter()
            .min_by(|(sa, da), (sb, db)| da.cmp(db).then_with(|| sa.iter().cmp(sb.iter())));
        Ok(match best {
            Some((s, &d)) => (d as usize, Some(*s)),
            None => (0, None),
        })
    }

    /// Minimum positive codegree only; `0` when there are no edges.
    pub fn delta_plus(&self) -> usize {
        self.positive_codegrees()
            .values()
            .min()
            .map_or(0, |&d| d as usize)
    }

    pub fn isolated_vertices(&self) -> VertexSet {
        (0..self.n as u32)
            .filter(|&v| self.incidence[v as usize].is_empty())
            .collect()
    }

    /// Number of edges meeting `s` in at least two vertices.
    pub fn edges_with_two_in(&self, s: &VertexSet) -> usize {
        self.masks
            .iter()
            .filter(|m| m.intersection_len(s) >= 2)
            .count()
    }

    /// True iff the edges of `m` are edges of this hypergraph, pairwise
    /// disjoint and, if `require_perfect`, cover every vertex.
    pub fn validate_matching(&self, m: &Matching, require_perfect: bool) -> bool {
        let mut covered = VertexSet::empty();
        for e in m.edges() {
            if self.edge_index(e).is_none() {
                return false;
            }
            let mask: VertexSet = e.iter().collect();
            if !covered.is_disjoint(&mask) {
                return false;
            }
            covered |= mask;
        }
        !require_perfect || covered.len() == self.n
    }

    /// Vertices `x ∉ S` such that `S ∪ {x}` lies in some edge.
    pub fn extend_candidates(&self, s: &VertexSet) -> Result<VertexSet> {
        self.check_subset(s)?;
        if s.len() + 1 > self.k {
            return Err(Error::Precondition(format!(
                "|S| = {} exceeds k - 1 = {}",
                s.len(),
                self.k - 1
            )));
        }
        let mut out = VertexSet::empty();
        let mut any = false;
        for i in self.edges_containing(s) {
            any = true;
            out |= self.masks[i];
        }
        if !any {
            return Err(Error::Precondition(format!("{s:?} lies in no edge")));
        }
        Ok(out - *s)
    }

    /// Checks that every non-isolated vertex has degree at least
    /// `C(δ⁺ + k - 2, k - 1)`.
    pub fn degree_lower_bound_check(&self) -> bool {
        if self.edge_count() == 0 {
            return true;
        }
        let bound = binomial((self.delta_plus() + self.k - 2) as u64, self.k as u64 - 1);
        self.incidence
            .iter()
            .all(|inc| inc.is_empty() || inc.len() as u128 >= bound)
    }

    /// The sub-hypergraph induced on `keep`, relabelled to `0..|keep|` in
    /// ascending order. Also returns the new-to-old vertex map.
    pub fn induced(&self, keep: &VertexSet) -> (Hypergraph, Vec<u32>) {
        let old: Vec<u32> = keep.iter().filter(|&v| (v as usize) < self.n).collect();
        let mut new_id = vec![u32::MAX; self.n];
        for (i, &v) in old.iter().enumerate() {
            new_id[v as usize] = i as u32;
        }
        let mut verts = Vec::new();
        let mut push = |i: usize| {
            verts.extend(self.edge(i).iter().map(|&v| new_id[v as usize]));
        };
        if 2 * keep.len() >= self.n {
            (0..self.edge_count())
                .filter(|&i| self.masks[i].is_subset(keep))
                .for_each(&mut push);
        } else {
            // Edges keyed by their smallest vertex, scanned through incidence lists.
            for &v in &old {
                for &i in &self.incidence[v as usize] {
                    let i = i as usize;
                    if self.edge(i)[0] == v && self.masks[i].is_subset(keep) {
                        push(i);
                    }
                }
            }
            // Incidence lists are ascending per vertex, and first vertices are
            // visited in ascending order, so the result is already sorted.
        }
        (Hypergraph::from_sorted(self.k, old.len(), verts), old)
    }

    /// Same vertex set, keeping only edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&[u32]) -> bool) -> Hypergraph {
        let verts = self
            .edges()
            .filter(|e| keep(e))
            .flatten()
            .copied()
            .collect();
        Hypergraph::from_sorted(self.k, self.n, verts)
    }
}

fn check_dims(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(invalid(format!("uniformity k = {k} must be at least 2")));
    }
    if n > MAX_VERTICES {
        return Err(Error::TooLarge(format!(
            "n = {n} exceeds the supported maximum of {MAX_VERTICES} vertices"
        )));
    }
    Ok(())
}

fn partition_point(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `C(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

impl std::fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Hypergraph(k={}, n={}, m={})",
            self.k,
            self.n,
            self.edge_count()
        )
    }
}

/// A set of pairwise-disjoint edges, each stored sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    edges: Vec<Vec<u32>>,
}

impl Matching {
    pub fn new(edges: Vec<Vec<u32>>) -> Self {
        let edges = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        Matching { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> {
        self.edges.iter().map(Vec::as_slice)
    }

    pub fn push(&mut self, mut edge: Vec<u32>) {
        edge.sort_unstable();
        self.edges.push(edge);
    }

    pub fn extend(&mut self, other: Matching) {
        self.edges.extend(other.edges);
    }

    pub fn vertices(&self) -> VertexSet {
        self.edges.iter().flatten().collect()
    }

    /// Rewrites vertex ids through `map` (e.g. back from an induced sub-hypergraph).
    pub fn relabel(&self, map: &[u32]) -> Matching {
        Matching::new(
            self.edges
                .iter()
                .map(|e| e.iter().map(|&v| map[v as usize]).collect())
                .collect(),
        )
    }

    /// Sorts the edges lexicographically.
    pub fn canonicalize(&mut self) {
        self.edges.sort_unstable();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, extremal_construction};

    fn set(v: &[u32]) -> VertexSet {
        v.iter().collect()
    }

    fn single_edge() -> Hypergraph {
        Hypergraph::new(3, 6, [[0u32, 1, 2]]).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert!(Hypergraph::new(3, 6, [[0u32, 1, 6]]).is_err());
        assert!(Hypergraph::new(3, 6, [[0u32, 1, 1]]).is_err());
        assert!(Hypergraph::new(3, 6, [vec![0u32, 1]]).is_err());
        assert!(Hypergraph::new(3, 6, [[0u32, 1, 2], [2, 1, 0]]).is_err());
        assert!(Hypergraph::new(1, 6, [[0u32]]).is_err());
        assert!(matches!(Hypergraph::empty(3, 513), Err(Error::TooLarge(_))));
    }

    #[test]
    fn canonical_edge_order() {
        let h = Hypergraph::new(3, 5, [[4u32, 2, 3], [1, 0, 2]]).unwrap();
        assert_eq!(h.edge(0), &[0, 1, 2]);
        assert_eq!(h.edge(1), &[2, 3, 4]);
        assert_eq!(h.edge_index(&[2, 3, 4]), Some(1));
        assert!(h.contains_edge(&[3, 4, 2]));
        assert!(!h.contains_edge(&[0, 1, 3]));
    }

    #[test]
    fn degree_examples() {
        let h = extremal_construction(3, 6).unwrap();
        assert_eq!(h.degree(&VertexSet::empty()).unwrap(), 10);
        assert_eq!(h.degree(&set(&[3, 4, 5])).unwrap(), 1);
        assert_eq!(h.degree(&set(&[0, 1])).unwrap(), 0);
        assert!(h.degree(&set(&[6])).is_err());
    }

    #[test]
    fn min_codegree_examples() {
        assert_eq!(complete(3, 6).unwrap().min_codegree().unwrap(), 4);
        assert_eq!(
            extremal_construction(3, 6).unwrap().min_codegree().unwrap(),
            0
        );
        assert_eq!(Hypergraph::empty(3, 6).unwrap().min_codegree().unwrap(), 0);
        assert!(Hypergraph::empty(3, 2).unwrap().min_codegree().is_err());
    }

    #[test]
    fn min_positive_codegree_examples() {
        let (d, w) = extremal_construction(3, 6)
            .unwrap()
            .min_positive_codegree()
            .unwrap();
        assert_eq!(d, 2);
        assert_eq!(w, Some(set(&[0, 3])));
        assert_eq!(
            complete(3, 6).unwrap().min_positive_codegree().unwrap().0,
            4
        );
        let (d, w) = single_edge().min_positive_codegree().unwrap();
        assert_eq!(d, 1);
        assert!(w.unwrap().is_subset(&set(&[0, 1, 2])));
        assert_eq!(
            Hypergraph::empty(3, 6)
                .unwrap()
                .min_positive_codegree()
                .unwrap(),
            (0, None)
        );
    }

    #[test]
    fn isolated_examples() {
        assert!(extremal_construction(3, 6)
            .unwrap()
            .isolated_vertices()
            .is_empty());
        assert_eq!(
            Hypergraph::empty(3, 6).unwrap().isolated_vertices(),
            VertexSet::full(6)
        );
        assert_eq!(single_edge().isolated_vertices(), set(&[3, 4, 5]));
    }

    #[test]
    fn edges_with_two_in_examples() {
        let h = extremal_construction(3, 6).unwrap();
        assert_eq!(h.edges_with_two_in(&set(&[0, 1, 2])), 0);
        assert_eq!(complete(3, 6).unwrap().edges_with_two_in(&set(&[0, 1])), 4);
        assert_eq!(complete(3, 6).unwrap().edges_with_two_in(&set(&[3])), 0);
    }

    #[test]
    fn validate_matching_examples() {
        let k6 = complete(3, 6).unwrap();
        let pm = Matching::new(vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(k6.validate_matching(&pm, true));
        let overlap = Matching::new(vec![vec![0, 1, 2], vec![2, 3, 4]]);
        assert!(!k6.validate_matching(&overlap, false));
        let ext = extremal_construction(3, 6).unwrap();
        let partial = Matching::new(vec![vec![0, 3, 4]]);
        assert!(ext.validate_matching(&partial, false));
        assert!(!ext.validate_matching(&partial, true));
        let non_edge = Matching::new(vec![vec![0, 1, 3]]);
        assert!(!ext.validate_matching(&non_edge, false));
    }

    #[test]
    fn extend_candidates_examples() {
        let ext = extremal_construction(3, 6).unwrap();
        assert_eq!(ext.extend_candidates(&set(&[0])).unwrap(), set(&[3, 4, 5]));
        let k6 = complete(3, 6).unwrap();
        assert_eq!(
            k6.extend_candidates(&set(&[0, 1])).unwrap(),
            set(&[2, 3, 4, 5])
        );
        assert_eq!(
            single_edge().extend_candidates(&set(&[0])).unwrap(),
            set(&[1, 2])
        );
        assert!(matches!(
            ext.extend_candidates(&set(&[0, 1])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            k6.extend_candidates(&set(&[0, 1, 2])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn degree_bound_examples() {
        assert!(extremal_construction(3, 6)
            .unwrap()
            .degree_lower_bound_check());
        assert!(complete(3, 6).unwrap().degree_lower_bound_check());
        assert!(single_edge().degree_lower_bound_check());
        assert!(Hypergraph::empty(3, 6).unwrap().degree_lower_bound_check());
    }

    #[test]
    fn induced_relabels() {
        let k6 = complete(3, 6).unwrap();
        let (sub, map) = k6.induced(&set(&[1, 3, 4, 5]));
        assert_eq!(sub.n(), 4);
        assert_eq!(sub.edge_count(), 4);
        assert_eq!(map, vec![1, 3, 4, 5]);
        let (small, map) = complete(3, 40).unwrap().induced(&set(&[2, 7, 9, 30]));
        assert_eq!(small.edge_count(), 4);
        assert_eq!(small.edge(3), &[1, 2, 3]);
        assert_eq!(map[3], 30);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }
}
