//! Instance generators: the space-barrier construction, complete and random
//! hypergraphs, and k-partite restrictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::hypergraph::{binomial, Hypergraph};
use crate::vertex_set::{VertexSet, MAX_VERTICES};

/// Upper limit on generated edge counts.
pub const MAX_GENERATED_EDGES: u128 = 20_000_000;

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[u32])) {
    if k > n {
        return;
    }
    let mut idx: Vec<u32> = (0..k as u32).collect();
    loop {
        f(&idx);
        // Advance the rightmost position that still has room.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (idx[i] as usize) < n - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_generated(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(invalid(format!("uniformity k = {k} must be at least 2")));
    }
    if n > MAX_VERTICES {
        return Err(Error::TooLarge(format!("n = {n} exceeds {MAX_VERTICES}")));
    }
    if binomial(n as u64, k as u64) > MAX_GENERATED_EDGES {
        return Err(Error::TooLarge(format!(
            "C({n}, {k}) exceeds the generator cap of {MAX_GENERATED_EDGES} edges"
        )));
    }
    Ok(())
}

/// Builds a hypergraph from the k-subsets of `0..n` accepted by `keep`.
fn generate(k: usize, n: usize, mut keep: impl FnMut(&[u32]) -> bool) -> Result<Hypergraph> {
    check_generated(k, n)?;
    let mut verts = Vec::new();
    for_each_subset(n, k, |e| {
        if keep(e) {
            verts.extend_from_slice(e);
        }
    });
    Ok(Hypergraph::from_sorted(k, n, verts))
}

/// Size of the low block `A = {0, .., n/k}` in the space-barrier construction.
pub fn extremal_block_size(k: usize, n: usize) -> usize {
    n / k + 1
}

/// The space barrier: `A = {0, .., n/k}` (so `|A| = n/k + 1`), `B` the
/// remaining vertices, and every k-set meeting `A` in at most one vertex is
/// an edge. It has no perfect matching and minimum positive codegree
/// `(k-1)n/k - (k-1)`.
pub fn extremal_construction(k: usize, n: usize) -> Result<Hypergraph> {
    check_extremal_dims(k, n)?;
    let a = extremal_block_size(k, n) as u32;
    generate(k, n, |e| e.iter().take_while(|&&v| v < a).count() <= 1)
}

fn check_extremal_dims(k: usize, n: usize) -> Result<()> {
    if k < 3 {
        return Err(invalid(format!("the construction needs k >= 3, got {k}")));
    }
    if !n.is_multiple_of(k) {
        return Err(invalid(format!("k = {k} does not divide n = {n}")));
    }
    if n < 2 * k {
        return Err(invalid(format!(
            "the construction needs n >= 2k, got n = {n}"
        )));
    }
    Ok(())
}

/// All `C(n, k)` k-subsets of `0..n`.
pub fn complete(k: usize, n: usize) -> Result<Hypergraph> {
    if n < k {
        return Err(invalid(format!(
            "complete hypergraph needs n >= k, got n = {n}, k = {k}"
        )));
    }
    generate(k, n, |_| true)
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{what} = {p} is not a probability")));
    }
    Ok(())
}

/// Each k-subset is an edge independently with probability `p`.
pub fn random_binomial(k: usize, n: usize, p: f64, seed: u64) -> Result<Hypergraph> {
    check_probability(p, "p")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate(k, n, |_| rng.gen_bool(p))
}

/// The space barrier with noise: every k-set has its membership flipped
/// independently with probability `eps`.
pub fn planted_extremal(k: usize, n: usize, eps: f64, seed: u64) -> Result<Hypergraph> {
    check_probability(eps, "eps")?;
    check_extremal_dims(k, n)?;
    let a = extremal_block_size(k, n) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate(k, n, |e| {
        let planted = e.iter().take_while(|&&v| v < a).count() <= 1;
        planted ^ rng.gen_bool(eps)
    })
}

/// A partition of `V(H)` into parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSpec {
    parts: Vec<VertexSet>,
}

impl PartitionSpec {
    /// Validates that `parts` are pairwise disjoint and cover `0..n`.
    pub fn new(n: usize, parts: Vec<VertexSet>) -> Result<Self> {
        let mut seen = VertexSet::empty();
        for p in &parts {
            if !seen.is_disjoint(p) {
                return Err(invalid("partition parts overlap"));
            }
            seen |= *p;
        }
        if seen != VertexSet::full(n) {
            return Err(invalid(format!("partition parts do not cover 0..{n}")));
        }
        Ok(PartitionSpec { parts })
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }
}

/// Keeps the edges with exactly one vertex in each part.
pub fn kpartite_restrict(h: &Hypergraph, spec: &PartitionSpec) -> Result<Hypergraph> {
    if spec.parts.len() != h.k() {
        return Err(invalid(format!(
            "partition has {} parts, expected k = {}",
            spec.parts.len(),
            h.k()
        )));
    }
    if spec.parts.iter().fold(VertexSet::empty(), |a, p| a | *p) != h.vertex_set() {
        return Err(invalid("partition does not cover the vertex set"));
    }
    let part_of = |v: u32| spec.parts.iter().position(|p| p.contains(v));
    let mut owner = vec![0usize; h.n()];
    for v in 0..h.n() as u32 {
        owner[v as usize] = part_of(v).expect("covered");
    }
    Ok(h.filter_edges(|e| {
        let mut hit = 0u64;
        for &v in e {
            hit |= 1 << owner[v as usize];
        }
        hit.count_ones() as usize == e.len()
    }))
}
