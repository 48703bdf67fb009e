//! End-to-end perfect matching driver: absorbing structure, fractional
//! matching and nibble on the rest, the extremal construction when that
//! fails, and optionally the exact oracle as a last resort.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::absorbing::{absorb, build_absorbing_structure, AbsorbParams};
use crate::error::{invalid, Error, Result};
use crate::exact::{perfect_matching_search, Search, DEFAULT_BUDGET};
use crate::extremal::{
    default_gamma, extremal_perfect_matching, find_extremal_set, verify_extremal, ExtremalReport,
    SearchMode,
};
use crate::hypergraph::{binomial, Hypergraph, Matching};
use crate::lp::{
    extremal_set_from_certificate, minmax_pair_fractional, pair_count, perfect_fractional_matching,
    spread_fractional_matching, FarkasCertificate, FractionalMatching, FractionalOutcome,
    MinmaxOutcome,
};
use crate::nibble::{nibble, NibbleParams};
use crate::par::Exec;
use crate::rational::{format_rational, ratio};
use crate::vertex_set::VertexSet;

/// Largest LP (vertex rows plus pair rows) solved for the min-max spread.
pub const MINMAX_ROW_CAP: usize = 80;
/// Basic solutions averaged when the min-max LP is too large.
pub const SPREAD_SAMPLES: usize = 4;
/// Largest number of candidate sets enumerated by the exhaustive extremal
/// search inside the pipeline.
pub const EXHAUSTIVE_SETS: u128 = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub gamma: BigRational,
    pub beta: BigRational,
    pub alpha: BigRational,
    /// Nibble target: `|M'| >= (1 - eta) n' / k` is reported in the trace.
    pub eta: BigRational,
    /// Spread target: `max pair load <= epsilon` is reported in the trace.
    pub epsilon: BigRational,
    pub seed: u64,
    /// Node budget for each exact search.
    pub budget: u64,
    pub fallback_to_exact: bool,
    pub nibble: NibbleParams,
    pub exec: Exec,
}

impl PipelineConfig {
    pub fn new(k: usize) -> Self {
        let gamma = default_gamma(k);
        PipelineConfig {
            beta: &gamma / BigRational::from_integer(4.into()),
            gamma,
            alpha: ratio(1, 10),
            eta: ratio(1, 10),
            epsilon: ratio(1, 100),
            seed: 0,
            budget: DEFAULT_BUDGET,
            fallback_to_exact: true,
            nibble: NibbleParams::default(),
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, q) in [
            ("gamma", &self.gamma),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("eta", &self.eta),
            ("epsilon", &self.epsilon),
        ] {
            if !(q > &BigRational::zero() && q < &BigRational::one()) {
                return Err(invalid(format!("{name} = {q} not in (0, 1)")));
            }
        }
        if self.beta.clone() * BigRational::from_integer(4.into()) > self.gamma {
            return Err(invalid(format!("beta = {} exceeds gamma/4", self.beta)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolvePath {
    #[serde(rename = "absorb+nibble")]
    AbsorbNibble,
    Extremal,
    ExactFallback,
    None,
}

impl SolvePath {
    pub fn as_str(self) -> &'static str {
        match self {
            SolvePath::AbsorbNibble => "absorb+nibble",
            SolvePath::Extremal => "extremal",
            SolvePath::ExactFallback => "exact-fallback",
            SolvePath::None => "none",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbStats {
    pub family: usize,
    pub target: usize,
    pub absorbing_set: usize,
    pub capacity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NibbleStats {
    /// `minmax`, `spread`, `basic` or `infeasible`.
    pub fractional: String,
    pub max_pair_load: Option<String>,
    pub spread_target_met: Option<bool>,
    pub edges: usize,
    pub leftover: usize,
    pub target_met: bool,
    pub absorbed: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalStats {
    pub source: Option<SearchMode>,
    pub bad_edge_count: Option<usize>,
    pub rejected: Option<String>,
    pub report: Option<ExtremalReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactStatus {
    Found,
    Exhausted,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactStats {
    pub status: ExactStatus,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub path: SolvePath,
    pub absorb: AbsorbStats,
    pub nibble: Option<NibbleStats>,
    pub extremal: Option<ExtremalStats>,
    pub exact: Option<ExactStats>,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub matching: Option<Matching>,
    pub trace: SolveTrace,
}

impl SolveOutcome {
    pub fn budget_exceeded(&self) -> bool {
        matches!(
            self.trace.exact,
            Some(ExactStats {
                status: ExactStatus::BudgetExceeded,
                ..
            })
        )
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(0.0)
}

fn fractional_on(
    h: &Hypergraph,
    cfg: &PipelineConfig,
    stats: &mut NibbleStats,
) -> std::result::Result<FractionalMatching, FarkasCertificate> {
    let basic = match perfect_fractional_matching(h) {
        FractionalOutcome::Perfect { matching } => matching,
        FractionalOutcome::Infeasible { certificate } => return Err(certificate),
    };
    let (kind, matching) = if h.n() + pair_count(h) <= MINMAX_ROW_CAP {
        match minmax_pair_fractional(h) {
            MinmaxOutcome::Optimal { matching, .. } => ("minmax", matching),
            MinmaxOutcome::Infeasible { .. } => unreachable!("feasibility was just established"),
        }
    } else {
        match spread_fractional_matching(h, SPREAD_SAMPLES, cfg.seed, cfg.exec) {
            FractionalOutcome::Perfect { matching } => ("spread", matching),
            FractionalOutcome::Infeasible { .. } => ("basic", basic),
        }
    };
    let load = matching.max_pair_load(h);
    stats.fractional = kind.into();
    stats.spread_target_met = Some(load <= cfg.epsilon);
    stats.max_pair_load = Some(format_rational(&load));
    Ok(matching)
}

/// Pads `s` with the lowest vertices outside it until it has `size` members.
fn pad(s: &VertexSet, size: usize, n: usize) -> VertexSet {
    let mut out = *s;
    for v in 0..n as u32 {
        if out.len() >= size {
            break;
        }
        out.insert(v);
    }
    out
}

/// Candidate extremal sets on `H' = H[V \ A]`, lifted to `H`.
fn extremal_candidates(
    h: &Hypergraph,
    sub: &Hypergraph,
    map: &[u32],
    certificate: Option<&FarkasCertificate>,
    cfg: &PipelineConfig,
) -> Vec<(SearchMode, VertexSet)> {
    let mut out: Vec<(SearchMode, VertexSet)> = Vec::new();
    let mut lift = |mode, s: VertexSet| {
        let lifted: VertexSet = s.iter().map(|v| map[v as usize]).collect();
        let lifted = pad(&lifted, h.n() / h.k(), h.n());
        if !out.iter().any(|(_, t)| *t == lifted) {
            out.push((mode, lifted));
        }
    };
    if sub.n() == 0 || !sub.n().is_multiple_of(sub.k()) {
        return out;
    }
    if let Some(c) = certificate {
        if let Ok((s, _)) = extremal_set_from_certificate(sub, c) {
            lift(SearchMode::Certificate, s);
        }
    }
    let mut modes = vec![SearchMode::Heuristic];
    if binomial(sub.n() as u64, (sub.n() / sub.k()) as u64) <= EXHAUSTIVE_SETS {
        modes.push(SearchMode::Exhaustive);
    }
    for mode in modes {
        if let Ok(Some(w)) = find_extremal_set(sub, &cfg.gamma, mode, cfg.exec) {
            lift(mode, w.s);
        }
    }
    out
}

/// Tries the extremal construction on each lifted candidate set.
fn extremal_path(
    h: &Hypergraph,
    candidates: &[(SearchMode, VertexSet)],
    cfg: &PipelineConfig,
) -> Result<(Option<Matching>, ExtremalStats)> {
    let mut stats = ExtremalStats::default();
    for &(mode, s) in candidates {
        let Some(w) = verify_extremal(h, &s, &cfg.gamma)? else {
            continue;
        };
        stats = ExtremalStats {
            source: Some(mode),
            bad_edge_count: Some(w.bad_edge_count),
            ..Default::default()
        };
        match extremal_perfect_matching(h, &w, Some(cfg.budget)) {
            Ok(run) => {
                stats.report = Some(run.report);
                if run.matching.is_some() {
                    return Ok((run.matching, stats));
                }
            }
            Err(Error::InvalidInput(msg)) => stats.rejected = Some(msg),
            Err(e) => return Err(e),
        }
    }
    Ok((None, stats))
}

/// Runs the pipeline. `matching` is `None` when every enabled path failed;
/// with the exact fallback enabled and within budget this means no perfect
/// matching exists.
pub fn solve(h: &Hypergraph, cfg: &PipelineConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let (n, k) = (h.n(), h.k());
    if n % k != 0 {
        return Err(invalid(format!("k = {k} does not divide n = {n}")));
    }
    if !h.isolated_vertices().is_empty() {
        return Err(invalid(format!(
            "isolated vertices: {:?}",
            h.isolated_vertices().to_vec()
        )));
    }
    let params = AbsorbParams {
        beta: to_f64(&cfg.beta),
        alpha: to_f64(&cfg.alpha),
        seed: cfg.seed,
        ..Default::default()
    };
    let structure = build_absorbing_structure(h, &params, cfg.exec)?;
    let mut trace = SolveTrace {
        path: SolvePath::None,
        absorb: AbsorbStats {
            family: structure.family.len(),
            target: structure.target,
            absorbing_set: structure.a.len(),
            capacity: structure.capacity,
        },
        nibble: None,
        extremal: None,
        exact: None,
        valid: false,
    };
    let finish = |m: Matching, path: SolvePath, mut trace: SolveTrace| -> Result<SolveOutcome> {
        let mut m = m;
        m.canonicalize();
        if !h.validate_matching(&m, true) {
            return Err(Error::Precondition(format!(
                "{} produced an invalid matching",
                path.as_str()
            )));
        }
        trace.path = path;
        trace.valid = true;
        Ok(SolveOutcome {
            matching: Some(m),
            trace,
        })
    };

    let rest = h.vertex_set() - structure.a;
    let (sub, map) = h.induced(&rest);
    let mut stats = NibbleStats::default();
    let certificate = match fractional_on(&sub, cfg, &mut stats) {
        Ok(w) => {
            let params = NibbleParams {
                seed: cfg.nibble.seed ^ cfg.seed,
                ..cfg.nibble.clone()
            };
            let m = nibble(&sub, &w, &params, cfg.exec)?.relabel(&map);
            let leftover = rest - m.vertices();
            stats.edges = m.len();
            stats.leftover = leftover.len();
            let target = (BigRational::one() - &cfg.eta)
                * BigRational::from_integer(BigInt::from(sub.n() / k));
            stats.target_met = BigRational::from_integer(BigInt::from(m.len())) >= target;
            if leftover.len() <= structure.capacity * k {
                let absorbed = absorb(h, &leftover, &structure)?;
                stats.absorbed = Some(absorbed.is_some());
                if let Some(extra) = absorbed {
                    let mut all = m;
                    all.extend(extra);
                    trace.nibble = Some(stats);
                    return finish(all, SolvePath::AbsorbNibble, trace);
                }
            }
            None
        }
        Err(c) => {
            stats.fractional = "infeasible".into();
            Some(c)
        }
    };
    trace.nibble = Some(stats);

    let candidates = extremal_candidates(h, &sub, &map, certificate.as_ref(), cfg);
    let (m, ext) = extremal_path(h, &candidates, cfg)?;
    trace.extremal = Some(ext);
    if let Some(m) = m {
        return finish(m, SolvePath::Extremal, trace);
    }

    if cfg.fallback_to_exact {
        let (search, nodes) = perfect_matching_search(h, Some(cfg.budget));
        let status = match &search {
            Search::Found(_) => ExactStatus::Found,
            Search::Exhausted => ExactStatus::Exhausted,
            Search::BudgetExceeded => ExactStatus::BudgetExceeded,
        };
        trace.exact = Some(ExactStats { status, nodes });
        if let Search::Found(m) = search {
            return finish(m, SolvePath::ExactFallback, trace);
        }
    }
    Ok(SolveOutcome {
        matching: None,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, extremal_construction};
    use crate::exact::find_perfect_matching;

    #[test]
    fn config_validation() {
        let cfg = PipelineConfig::new(3);
        assert_eq!(cfg.gamma, ratio(1, 46656));
        assert!(cfg.validate().is_ok());
        let bad = PipelineConfig {
            beta: ratio(1, 1000),
            ..cfg.clone()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            eta: ratio(1, 1),
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn complete_is_solved() {
        let h = complete(3, 30).unwrap();
        let out = solve(&h, &PipelineConfig::new(3)).unwrap();
        assert!(out.trace.valid);
        assert!(h.validate_matching(out.matching.as_ref().unwrap(), true));
    }

    #[test]
    fn space_barrier_has_none() {
        let h = extremal_construction(3, 30).unwrap();
        let out = solve(&h, &PipelineConfig::new(3)).unwrap();
        assert_eq!(out.matching, None);
        assert_eq!(out.trace.path, SolvePath::None);
        assert_eq!(out.trace.exact.unwrap().status, ExactStatus::Exhausted);
        let cfg = PipelineConfig {
            fallback_to_exact: false,
            ..PipelineConfig::new(3)
        };
        let out = solve(&h, &cfg).unwrap();
        assert!(out.matching.is_none() && out.trace.exact.is_none());
    }

    #[test]
    fn repaired_barrier_is_solved() {
        // Edges {0, 1, b} for every b in B let two A-vertices share an edge,
        // leaving n/3 - 1 A-vertices for the other n/3 - 1 edges.
        let n = 30;
        let ext = extremal_construction(3, n).unwrap();
        let extra = (n as u32 / 3 + 1..n as u32).map(|b| vec![0, 1, b]);
        let h = Hypergraph::new(3, n, ext.edges().map(<[u32]>::to_vec).chain(extra)).unwrap();
        assert!(find_perfect_matching(&h, None).unwrap().is_found());
        let out = solve(&h, &PipelineConfig::new(3)).unwrap();
        assert!(out.trace.valid);
        assert!(h.validate_matching(out.matching.as_ref().unwrap(), true));
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = PipelineConfig::new(3);
        assert!(solve(&complete(3, 7).unwrap(), &cfg).is_err());
        let h = Hypergraph::new(3, 6, [[0u32, 1, 2]]).unwrap();
        assert!(solve(&h, &cfg).is_err());
    }

    #[test]
    fn deterministic() {
        let h = crate::constructions::random_binomial(3, 18, 0.6, 2).unwrap();
        let cfg = PipelineConfig {
            seed: 5,
            ..PipelineConfig::new(3)
        };
        assert_eq!(solve(&h, &cfg).unwrap(), solve(&h, &cfg).unwrap());
        let seq = PipelineConfig {
            exec: Exec::Sequential,
            ..cfg.clone()
        };
        assert_eq!(solve(&h, &cfg).unwrap(), solve(&h, &seq).unwrap());
    }
}
