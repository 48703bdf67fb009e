use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::simplex::{solve, LinearProgram, LpResult};
use crate::error::{invalid, Result};
use crate::hypergraph::Hypergraph;
use crate::par::{map_range, Exec};
use crate::vertex_set::VertexSet;

/// Nonnegative exact weights indexed by the canonical edge order of a host
/// hypergraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalMatching {
    weights: Vec<BigRational>,
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    edge: usize,
    #[serde(with = "crate::rational")]
    weight: BigRational,
}

#[derive(Serialize, Deserialize)]
struct FractionalRepr {
    edges: usize,
    weights: Vec<WeightEntry>,
}

impl Serialize for FractionalMatching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FractionalRepr {
            edges: self.weights.len(),
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(edge, w)| WeightEntry {
                    edge,
                    weight: w.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FractionalMatching {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FractionalRepr::deserialize(d)?;
        let mut weights = vec![BigRational::zero(); repr.edges];
        for e in repr.weights {
            let slot = weights.get_mut(e.edge).ok_or_else(|| {
                serde::de::Error::custom(format!("edge index {} out of range", e.edge))
            })?;
            *slot = e.weight;
        }
        Ok(FractionalMatching { weights })
    }
}

impl FractionalMatching {
    /// Checks that there is one nonnegative weight per edge and every
    /// vertex load is at most 1.
    pub fn new(h: &Hypergraph, weights: Vec<BigRational>) -> Result<Self> {
        let fm = FractionalMatching { weights };
        fm.validate(h)?;
        Ok(fm)
    }

    /// The same weight on every edge.
    pub fn constant(h: &Hypergraph, w: BigRational) -> Result<Self> {
        Self::new(h, vec![w; h.edge_count()])
    }

    pub fn validate(&self, h: &Hypergraph) -> Result<()> {
        if self.weights.len() != h.edge_count() {
            return Err(invalid(format!(
                "{} weights for {} edges",
                self.weights.len(),
                h.edge_count()
            )));
        }
        if let Some(i) = self.weights.iter().position(Signed::is_negative) {
            return Err(invalid(format!("edge {i} has negative weight")));
        }
        let one = BigRational::one();
        if let Some(v) = self.vertex_loads(h).iter().position(|l| *l > one) {
            return Err(invalid(format!("vertex {v} has load above 1")));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, edge: usize) -> &BigRational {
        &self.weights[edge]
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().sum()
    }

    pub fn vertex_loads(&self, h: &Hypergraph) -> Vec<BigRational> {
        let mut loads = vec![BigRational::zero(); h.n()];
        for (e, w) in h.edges().zip(&self.weights) {
            if w.is_zero() {
                continue;
            }
            for &v in e {
                loads[v as usize] += w;
            }
        }
        loads
    }

    /// Loads of all pairs lying in some edge.
    pub fn pair_loads(&self, h: &Hypergraph) -> BTreeMap<(u32, u32), BigRational> {
        let mut loads = BTreeMap::new();
        for (e, w) in h.edges().zip(&self.weights) {
            for (i, &u) in e.iter().enumerate() {
                for &v in &e[i + 1..] {
                    *loads.entry((u, v)).or_insert_with(BigRational::zero) += w;
                }
            }
        }
        loads
    }

    pub fn max_pair_load(&self, h: &Hypergraph) -> BigRational {
        self.pair_loads(h)
            .into_values()
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Every vertex load is exactly 1.
    pub fn is_perfect(&self, h: &Hypergraph) -> bool {
        let one = BigRational::one();
        self.vertex_loads(h).iter().all(|l| *l == one)
    }
}

/// A vector `y` with `Σ y > 0` and `Σ_{v∈e} y_v <= 0` for every edge `e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    #[serde(with = "crate::rational::vec")]
    pub y: Vec<BigRational>,
}

impl FarkasCertificate {
    pub fn scaled(&self, c: &BigRational) -> FarkasCertificate {
        FarkasCertificate {
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum FractionalOutcome {
    Perfect { matching: FractionalMatching },
    Infeasible { certificate: FarkasCertificate },
}

impl FractionalOutcome {
    /// Exact check of whichever branch was returned.
    pub fn is_valid(&self, h: &Hypergraph) -> bool {
        match self {
            FractionalOutcome::Perfect { matching } => {
                matching.validate(h).is_ok() && matching.is_perfect(h)
            }
            FractionalOutcome::Infeasible { certificate } => {
                verify_certificate(h, certificate).unwrap_or(false)
            }
        }
    }
}

fn ones(n: usize) -> Vec<BigRational> {
    vec![BigRational::one(); n]
}

fn vertex_entries(e: &[u32]) -> Vec<(u32, i64)> {
    e.iter().map(|&v| (v, 1)).collect()
}

fn empty_certificate(h: &Hypergraph) -> Option<FractionalOutcome> {
    (h.edge_count() == 0 && h.n() > 0).then(|| FractionalOutcome::Infeasible {
        certificate: FarkasCertificate { y: ones(h.n()) },
    })
}

/// Weight `1/d` on every edge when every vertex has the same degree `d > 0`.
fn regular_uniform(h: &Hypergraph) -> Option<FractionalOutcome> {
    let d = if h.n() > 0 { h.vertex_degree(0) } else { 0 };
    (d > 0 && (1..h.n() as u32).all(|v| h.vertex_degree(v) == d)).then(|| {
        FractionalOutcome::Perfect {
            matching: FractionalMatching {
                weights: vec![BigRational::new(1.into(), BigInt::from(d)); h.edge_count()],
            },
        }
    })
}

fn feasibility(h: &Hypergraph, order: &[usize]) -> FractionalOutcome {
    let mut lp = LinearProgram::new(h.n(), ones(h.n()));
    for &i in order {
        lp.push_column(vertex_entries(h.edge(i)), 0);
    }
    match solve(&lp, false) {
        LpResult::Optimal { x, .. } => {
            let mut weights = vec![BigRational::zero(); h.edge_count()];
            for (&i, w) in order.iter().zip(x) {
                weights[i] = w;
            }
            FractionalOutcome::Perfect {
                matching: FractionalMatching { weights },
            }
        }
        LpResult::Infeasible { ray } => FractionalOutcome::Infeasible {
            certificate: FarkasCertificate { y: ray },
        },
        LpResult::Unbounded => unreachable!("feasibility problems have no objective"),
    }
}

/// Either a perfect fractional matching or a Farkas certificate that none
/// exists. A hypergraph without edges (on at least one vertex) gets the
/// all-ones certificate.
pub fn perfect_fractional_matching(h: &Hypergraph) -> FractionalOutcome {
    if let Some(c) = empty_certificate(h).or_else(|| regular_uniform(h)) {
        return c;
    }
    let order: Vec<usize> = (0..h.edge_count()).collect();
    feasibility(h, &order)
}

/// The average of `samples` basic perfect fractional matchings found under
/// random column orders.
pub fn spread_fractional_matching(
    h: &Hypergraph,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> FractionalOutcome {
    if let Some(c) = empty_certificate(h) {
        return c;
    }
    let samples = samples.max(1);
    let outcomes = map_range(exec, samples, |s| {
        let mut order: Vec<usize> = (0..h.edge_count()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        order.shuffle(&mut rng);
        feasibility(h, &order)
    });
    let mut sum = vec![BigRational::zero(); h.edge_count()];
    for outcome in outcomes {
        match outcome {
            FractionalOutcome::Perfect { matching } => {
                for (acc, w) in sum.iter_mut().zip(matching.weights) {
                    *acc += w;
                }
            }
            infeasible => return infeasible,
        }
    }
    let scale = BigRational::from_integer(BigInt::from(samples));
    FractionalOutcome::Perfect {
        matching: FractionalMatching {
            weights: sum.into_iter().map(|w| w / &scale).collect(),
        },
    }
}

pub fn verify_certificate(h: &Hypergraph, c: &FarkasCertificate) -> Result<bool> {
    if c.y.len() != h.n() {
        return Err(invalid(format!(
            "certificate has {} entries for {} vertices",
            c.y.len(),
            h.n()
        )));
    }
    if !c.y.iter().sum::<BigRational>().is_positive() {
        return Ok(false);
    }
    Ok(h.edges().all(|e| {
        !e.iter()
            .map(|&v| &c.y[v as usize])
            .sum::<BigRational>()
            .is_positive()
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MinmaxOutcome {
    Optimal {
        matching: FractionalMatching,
        #[serde(with = "crate::rational")]
        max_pair_load: BigRational,
    },
    Infeasible {
        certificate: FarkasCertificate,
    },
}

/// Pairs covered by some edge, numbered in lexicographic order.
fn pair_rows(h: &Hypergraph) -> BTreeMap<(u32, u32), u32> {
    let mut rows = BTreeMap::new();
    for e in h.edges() {
        for (i, &u) in e.iter().enumerate() {
            for &v in &e[i + 1..] {
                rows.insert((u, v), 0);
            }
        }
    }
    for (i, r) in rows.values_mut().enumerate() {
        *r = (h.n() + i) as u32;
    }
    rows
}

/// Number of vertex pairs covered by some edge.
pub fn pair_count(h: &Hypergraph) -> usize {
    pair_rows(h).len()
}

fn edge_column(e: &[u32], pairs: &BTreeMap<(u32, u32), u32>) -> Vec<(u32, i64)> {
    let mut col = vertex_entries(e);
    for (i, &u) in e.iter().enumerate() {
        for &v in &e[i + 1..] {
            col.push((pairs[&(u, v)], 1));
        }
    }
    col
}

/// A perfect fractional matching minimising the largest pair load, with
/// that optimum. Only pairs of positive codegree get a constraint.
pub fn minmax_pair_fractional(h: &Hypergraph) -> MinmaxOutcome {
    if let Some(FractionalOutcome::Infeasible { certificate }) = empty_certificate(h) {
        return MinmaxOutcome::Infeasible { certificate };
    }
    let pairs = pair_rows(h);
    let rows = h.n() + pairs.len();
    let mut rhs = ones(h.n());
    rhs.resize(rows, BigRational::zero());
    let mut lp = LinearProgram::new(rows, rhs);
    for e in h.edges() {
        lp.push_column(edge_column(e, &pairs), 0);
    }
    lp.push_column(pairs.values().map(|&r| (r, -1)).collect(), 1);
    for &r in pairs.values() {
        lp.push_column(vec![(r, 1)], 0);
    }
    match solve(&lp, true) {
        LpResult::Optimal { mut x, objective } => {
            x.truncate(h.edge_count());
            MinmaxOutcome::Optimal {
                matching: FractionalMatching { weights: x },
                max_pair_load: objective,
            }
        }
        // The pair rows can always be satisfied through t and the slacks,
        // so infeasibility comes from the vertex rows alone.
        LpResult::Infeasible { .. } => match perfect_fractional_matching(h) {
            FractionalOutcome::Infeasible { certificate } => {
                MinmaxOutcome::Infeasible { certificate }
            }
            FractionalOutcome::Perfect { .. } => unreachable!("both LPs share feasibility"),
        },
        LpResult::Unbounded => unreachable!("the objective is bounded below by 0"),
    }
}

/// Whether a perfect fractional matching with every pair load at most `cap`
/// exists.
pub fn pair_cap_feasible(h: &Hypergraph, cap: &BigRational) -> bool {
    if cap.is_negative() || empty_certificate(h).is_some() {
        return false;
    }
    let pairs = pair_rows(h);
    let rows = h.n() + pairs.len();
    let mut rhs = ones(h.n());
    rhs.resize(rows, cap.clone());
    let mut lp = LinearProgram::new(rows, rhs);
    for e in h.edges() {
        lp.push_column(edge_column(e, &pairs), 0);
    }
    for &r in pairs.values() {
        lp.push_column(vec![(r, 1)], 0);
    }
    matches!(solve(&lp, false), LpResult::Optimal { .. })
}

/// The `n/k` vertices with the largest certificate values (ties towards
/// higher ids), and the number of edges with two or more vertices in them.
pub fn extremal_set_from_certificate(
    h: &Hypergraph,
    c: &FarkasCertificate,
) -> Result<(VertexSet, usize)> {
    if !h.n().is_multiple_of(h.k()) {
        return Err(invalid(format!(
            "k = {} does not divide n = {}",
            h.k(),
            h.n()
        )));
    }
    if c.y.len() != h.n() {
        return Err(invalid(format!(
            "certificate has {} entries for {} vertices",
            c.y.len(),
            h.n()
        )));
    }
    let mut order: Vec<u32> = (0..h.n() as u32).collect();
    order.sort_by(|&a, &b| c.y[a as usize].cmp(&c.y[b as usize]).then(a.cmp(&b)));
    let s: VertexSet = order[h.n() - h.n() / h.k()..].iter().collect();
    Ok((s, h.edges_with_two_in(&s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, extremal_construction};
    use crate::rational::ratio;

    fn cert(v: &[i64]) -> FarkasCertificate {
        FarkasCertificate {
            y: v.iter().map(|&x| ratio(x, 1)).collect(),
        }
    }

    #[test]
    fn complete_is_uniform() {
        let h = complete(3, 6).unwrap();
        let FractionalOutcome::Perfect { matching } = perfect_fractional_matching(&h) else {
            panic!("expected perfect");
        };
        assert!(matching.is_perfect(&h));
        assert_eq!(matching.total(), ratio(2, 1));
        assert!(matching.weights().iter().all(|w| *w == ratio(1, 10)));
        let single = Hypergraph::new(3, 3, [[0u32, 1, 2]]).unwrap();
        let FractionalOutcome::Perfect { matching } = perfect_fractional_matching(&single) else {
            panic!("expected perfect");
        };
        assert_eq!(matching.weights(), &[ratio(1, 1)]);
    }

    #[test]
    fn extremal_gives_certificate() {
        let h = extremal_construction(3, 6).unwrap();
        let out = perfect_fractional_matching(&h);
        assert!(matches!(out, FractionalOutcome::Infeasible { .. }));
        assert!(out.is_valid(&h));
        assert!(verify_certificate(&h, &cert(&[2, 2, 2, -1, -1, -1])).unwrap());
    }

    #[test]
    fn single_edge_and_empty() {
        let h = Hypergraph::new(3, 3, [[0u32, 1, 2]]).unwrap();
        let FractionalOutcome::Perfect { matching } = perfect_fractional_matching(&h) else {
            panic!()
        };
        assert_eq!(matching.weights(), &[ratio(1, 1)]);
        let e = Hypergraph::empty(3, 6).unwrap();
        assert_eq!(
            perfect_fractional_matching(&e),
            FractionalOutcome::Infeasible {
                certificate: cert(&[1; 6])
            }
        );
    }

    #[test]
    fn certificate_checks() {
        let k6 = complete(3, 6).unwrap();
        assert!(!verify_certificate(&k6, &cert(&[1; 6])).unwrap());
        assert!(!verify_certificate(&k6, &cert(&[0; 6])).unwrap());
        assert!(verify_certificate(&k6, &cert(&[1; 5])).is_err());
        let ext = extremal_construction(3, 6).unwrap();
        let c = cert(&[2, 2, 2, -1, -1, -1]);
        assert!(verify_certificate(&ext, &c.scaled(&ratio(7, 3))).unwrap());
    }

    #[test]
    fn minmax_examples() {
        for (h, m) in [
            (complete(3, 6).unwrap(), ratio(2, 5)),
            (complete(2, 4).unwrap(), ratio(1, 3)),
            (
                Hypergraph::new(3, 6, [[0u32, 1, 2], [3, 4, 5]]).unwrap(),
                ratio(1, 1),
            ),
        ] {
            let MinmaxOutcome::Optimal {
                matching,
                max_pair_load,
            } = minmax_pair_fractional(&h)
            else {
                panic!("expected optimum");
            };
            assert_eq!(max_pair_load, m);
            assert!(matching.is_perfect(&h));
            assert_eq!(matching.max_pair_load(&h), m);
            assert!(pair_cap_feasible(&h, &m));
            assert!(!pair_cap_feasible(&h, &(m - ratio(1, 1_000_000))));
        }
        let ext = extremal_construction(3, 6).unwrap();
        let MinmaxOutcome::Infeasible { certificate } = minmax_pair_fractional(&ext) else {
            panic!()
        };
        assert!(verify_certificate(&ext, &certificate).unwrap());
    }

    #[test]
    fn extremal_set_examples() {
        let ext = extremal_construction(3, 6).unwrap();
        let (s, count) =
            extremal_set_from_certificate(&ext, &cert(&[2, 2, 2, -1, -1, -1])).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|v| v < 3));
        assert_eq!(count, 0);
        let k6 = complete(3, 6).unwrap();
        let (s, count) = extremal_set_from_certificate(&k6, &cert(&[5; 6])).unwrap();
        assert_eq!(s.to_vec(), vec![4, 5]);
        assert_eq!(count, 4);
        let h7 = complete(3, 7).unwrap();
        assert!(extremal_set_from_certificate(&h7, &cert(&[1; 7])).is_err());
    }

    #[test]
    fn spread_is_perfect_and_deterministic() {
        let h = complete(3, 9).unwrap();
        let a = spread_fractional_matching(&h, 4, 11, Exec::Parallel);
        let b = spread_fractional_matching(&h, 4, 11, Exec::Sequential);
        assert_eq!(a, b);
        assert!(a.is_valid(&h));
        assert!(matches!(a, FractionalOutcome::Perfect { .. }));
    }

    #[test]
    fn serde_round_trip() {
        let h = complete(3, 6).unwrap();
        let out = perfect_fractional_matching(&h);
        let json = serde_json::to_string(&out).unwrap();
        assert_eq!(
            serde_json::from_str::<FractionalOutcome>(&json).unwrap(),
            out
        );
        let c = cert(&[2, 2, 2, -1, -1, -1]);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"2/1\""));
        assert_eq!(serde_json::from_str::<FarkasCertificate>(&json).unwrap(), c);
    }
}
