//! Absorbers and absorbing structures.
//!
//! A k(k-1)-set `W` absorbs a k-set `T` when both `H[W]` and `H[W ∪ T]`
//! have perfect matchings. Gadgets are grown as a (k-1) × k grid `v[i][j]`
//! whose rows are edges of `H[W]` and whose columns, each extended by
//! `t_j`, are edges of `H[W ∪ T]`.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{find_perfect_matching, Search};
use crate::hypergraph::{Hypergraph, Matching};
use crate::par::{map_slice, Exec};
use crate::vertex_set::VertexSet;

/// Gadget attempts per call of [`find_absorber_gadget`].
pub const GADGET_RETRIES: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub t: VertexSet,
    pub w: VertexSet,
    pub pm_w: Matching,
    pub pm_wt: Matching,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbParams {
    pub beta: f64,
    pub alpha: f64,
    /// Probability that a found gadget joins the family.
    pub sample_prob: f64,
    /// Number of random k-sets used to measure capacity.
    pub capacity_samples: usize,
    pub seed: u64,
}

impl Default for AbsorbParams {
    fn default() -> Self {
        AbsorbParams {
            beta: 0.1,
            alpha: 0.1,
            sample_prob: 1.0,
            capacity_samples: 200,
            seed: 0,
        }
    }
}

impl AbsorbParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid(format!("beta = {} not in (0, 1]", self.beta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(invalid(format!("alpha = {} not in (0, 1/2]", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.sample_prob) {
            return Err(invalid(format!(
                "p = {} is not a probability",
                self.sample_prob
            )));
        }
        Ok(())
    }

    /// `3 β² (k(k-1))! / α^{k(k-1)}`, the family cap of the asymptotic
    /// argument. Reported only.
    pub fn family_cap(&self, k: usize) -> f64 {
        let s = k * (k - 1);
        let fact: f64 = (1..=s).map(|i| i as f64).product();
        3.0 * self.beta * self.beta * fact / self.alpha.powi(s as i32)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbingStructure {
    pub family: Vec<Absorber>,
    pub a: VertexSet,
    /// Every sampled k-set outside `a` had at least this many absorbers in
    /// the family.
    pub capacity: usize,
    pub target: usize,
    pub attempts: usize,
}

fn induced_pm(h: &Hypergraph, keep: &VertexSet) -> Option<Matching> {
    let (sub, map) = h.induced(keep);
    match find_perfect_matching(&sub, None) {
        Ok(Search::Found(m)) => Some(m.relabel(&map)),
        _ => None,
    }
}

fn check_absorber_shape(h: &Hypergraph, w: &VertexSet, t: &VertexSet) -> Result<()> {
    let k = h.k();
    if t.len() != k {
        return Err(invalid(format!("|T| = {}, expected k = {k}", t.len())));
    }
    if w.len() != k * (k - 1) {
        return Err(invalid(format!(
            "|W| = {}, expected {}",
            w.len(),
            k * (k - 1)
        )));
    }
    if !w.is_disjoint(t) {
        return Err(invalid("W and T intersect"));
    }
    if (*w | *t).max().is_some_and(|v| v as usize >= h.n()) {
        return Err(invalid("vertex out of range"));
    }
    Ok(())
}

/// Whether `W` absorbs `T`, decided by the exact oracle.
pub fn is_absorber(h: &Hypergraph, w: &VertexSet, t: &VertexSet) -> Result<bool> {
    check_absorber_shape(h, w, t)?;
    Ok(induced_pm(h, w).is_some() && induced_pm(h, &(*w | *t)).is_some())
}

/// Grows an absorber for `t` avoiding `forbidden`, choosing each grid vertex
/// uniformly among those keeping both its row prefix and its column (with
/// `t_j`) inside some edge.
pub fn find_absorber_gadget<R: Rng>(
    h: &Hypergraph,
    t: &VertexSet,
    forbidden: &VertexSet,
    rng: &mut R,
) -> Option<Absorber> {
    let k = h.k();
    if t.len() != k || t.max().is_some_and(|v| v as usize >= h.n()) {
        return None;
    }
    let ts = t.to_vec();
    'attempt: for _ in 0..GADGET_RETRIES {
        let mut used = *t | *forbidden;
        let mut grid = vec![vec![0u32; k]; k - 1];
        for i in 0..k - 1 {
            for j in 0..k {
                let row: VertexSet = grid[i][..j].iter().collect();
                let mut col: VertexSet = (0..i).map(|r| grid[r][j]).collect();
                col.insert(ts[j]);
                let (Ok(a), Ok(b)) = (h.extend_candidates(&row), h.extend_candidates(&col)) else {
                    continue 'attempt;
                };
                let options = (a & b) - used;
                let Some(v) = options.iter().choose(rng) else {
                    continue 'attempt;
                };
                grid[i][j] = v;
                used.insert(v);
            }
        }
        let w: VertexSet = grid.iter().flatten().collect();
        let pm_w = Matching::new(grid.clone());
        let pm_wt = Matching::new(
            (0..k)
                .map(|j| {
                    std::iter::once(ts[j])
                        .chain(grid.iter().map(|r| r[j]))
                        .collect()
                })
                .collect(),
        );
        debug_assert!(h.validate_matching(&pm_w, false) && h.validate_matching(&pm_wt, false));
        if is_absorber(h, &w, t).unwrap_or(false) {
            return Some(Absorber {
                t: *t,
                w,
                pm_w,
                pm_wt,
            });
        }
    }
    None
}

fn random_kset<R: Rng>(pool: &[u32], k: usize, rng: &mut R) -> Option<VertexSet> {
    (pool.len() >= k).then(|| pool.choose_multiple(rng, k).collect())
}

/// Family size aimed for: `floor(β n / (k(k-1)))`, so that `|A| <= β n`.
pub fn family_target(n: usize, k: usize, beta: f64) -> usize {
    (beta * n as f64 / (k * (k - 1)) as f64).floor() as usize
}

/// Number of family members absorbing `t`.
pub fn absorber_count(h: &Hypergraph, structure: &AbsorbingStructure, t: &VertexSet) -> usize {
    structure
        .family
        .iter()
        .filter(|m| m.w.is_disjoint(t) && is_absorber(h, &m.w, t).unwrap_or(false))
        .count()
}

/// Samples gadgets for random k-sets, all disjoint from earlier members,
/// until the family reaches its target or `50 n` attempts are spent, then
/// measures capacity on random k-sets outside the family.
pub fn build_absorbing_structure(
    h: &Hypergraph,
    params: &AbsorbParams,
    exec: Exec,
) -> Result<AbsorbingStructure> {
    params.validate()?;
    let (n, k) = (h.n(), h.k());
    let target = family_target(n, k, params.beta);
    let mut out = AbsorbingStructure {
        target,
        ..Default::default()
    };
    if h.edge_count() == 0 || target == 0 {
        return Ok(out);
    }
    let threshold = n as f64 / 2.0 + params.alpha * n as f64;
    if (h.delta_plus() as f64) < threshold {
        log::warn!(
            "minimum positive codegree {} is below n/2 + alpha n = {threshold}",
            h.delta_plus()
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    while out.family.len() < target && out.attempts < 50 * n {
        out.attempts += 1;
        let pool: Vec<u32> = (0..n as u32).filter(|&v| !out.a.contains(v)).collect();
        if pool.len() < k * k {
            break;
        }
        let t = random_kset(&pool, k, &mut rng).expect("pool is large enough");
        if let Some(g) = find_absorber_gadget(h, &t, &out.a, &mut rng) {
            if rng.gen_bool(params.sample_prob) {
                out.a |= g.w;
                out.family.push(g);
            }
        }
    }
    let pool: Vec<u32> = (0..n as u32).filter(|&v| !out.a.contains(v)).collect();
    let samples: Vec<VertexSet> = (0..params.capacity_samples)
        .filter_map(|_| random_kset(&pool, k, &mut rng))
        .collect();
    out.capacity = if out.family.is_empty() || samples.is_empty() {
        0
    } else {
        map_slice(exec, &samples, |t| absorber_count(h, &out, t))
            .into_iter()
            .min()
            .unwrap_or(0)
    };
    Ok(out)
}

/// A perfect matching of `H[A ∪ S]`: `S` is cut into consecutive k-blocks,
/// each block gets its own absorbing member (by backtracking), and the
/// remaining members contribute their own matchings. `None` when no
/// assignment exists.
pub fn absorb(
    h: &Hypergraph,
    s: &VertexSet,
    structure: &AbsorbingStructure,
) -> Result<Option<Matching>> {
    let k = h.k();
    if !s.is_disjoint(&structure.a) {
        return Err(invalid("S meets the absorbing set"));
    }
    if !s.len().is_multiple_of(k) {
        return Err(invalid(format!(
            "|S| = {} is not divisible by k = {k}",
            s.len()
        )));
    }
    if s.len() / k > structure.capacity {
        return Err(invalid(format!(
            "|S|/k = {} exceeds capacity {}",
            s.len() / k,
            structure.capacity
        )));
    }
    let verts = s.to_vec();
    let parts: Vec<VertexSet> = verts.chunks(k).map(|c| c.iter().collect()).collect();
    let options: Vec<Vec<(usize, Matching)>> = parts
        .iter()
        .map(|p| {
            structure
                .family
                .iter()
                .enumerate()
                .filter_map(|(i, m)| induced_pm(h, &(m.w | *p)).map(|pm| (i, pm)))
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; structure.family.len()];
    let mut choice = vec![0usize; parts.len()];
    if !assign(0, &options, &mut owner, &mut choice) {
        return Ok(None);
    }
    let mut m = Matching::default();
    for (i, member) in structure.family.iter().enumerate() {
        match owner[i] {
            Some(p) => m.extend(options[p][choice[p]].1.clone()),
            None => m.extend(member.pm_w.clone()),
        }
    }
    m.canonicalize();
    debug_assert!(h.validate_matching(&m, false) && m.vertices() == structure.a | *s);
    Ok(Some(m))
}

fn assign(
    part: usize,
    options: &[Vec<(usize, Matching)>],
    owner: &mut [Option<usize>],
    choice: &mut [usize],
) -> bool {
    if part == options.len() {
        return true;
    }
    for (c, (member, _)) in options[part].iter().enumerate() {
        if owner[*member].is_some() {
            continue;
        }
        owner[*member] = Some(part);
        choice[part] = c;
        if assign(part + 1, options, owner, choice) {
            return true;
        }
        owner[*member] = None;
    }
    false
}
