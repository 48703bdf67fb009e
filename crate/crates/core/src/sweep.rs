//! Threshold sweeps comparing the pipeline with the exact oracle, and the
//! exhaustive report over all 3-graphs on six vertices.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    complete, extremal_construction, for_each_subset, planted_extremal, random_binomial,
};
use crate::error::{invalid, Error, Result};
use crate::exact::{find_perfect_matching, max_matching_size, Search};
use crate::hypergraph::Hypergraph;
use crate::lp::{perfect_fractional_matching, FractionalOutcome};
use crate::par::{fold_chunks, map_range, Exec};
use crate::pipeline::{solve, PipelineConfig};
use crate::vertex_set::VertexSet;

pub const CSV_HEADER: [&str; 9] = [
    "k",
    "n",
    "model",
    "seed",
    "delta_plus",
    "isolated",
    "pm_exists",
    "path",
    "agree",
];

/// Models drawn from by [`Model::Mixed`].
const MIXED: [Model; 7] = [
    Model::Binomial(0.3),
    Model::Binomial(0.6),
    Model::Binomial(0.9),
    Model::Planted(0.002),
    Model::Planted(0.05),
    Model::Ext,
    Model::Complete,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Binomial(f64),
    Planted(f64),
    Ext,
    Complete,
    Mixed,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let prob = |arg: Option<&str>| -> Result<f64> {
            let p: f64 = arg
                .ok_or_else(|| {
                    invalid(format!("model {name} needs a probability, e.g. {name}:0.5"))
                })?
                .parse()
                .map_err(|_| invalid(format!("bad probability in {s:?}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("probability {p} outside [0, 1]")));
            }
            Ok(p)
        };
        match (name, arg) {
            ("binomial", a) => Ok(Model::Binomial(prob(a)?)),
            ("planted", a) => Ok(Model::Planted(prob(a)?)),
            ("ext", None) => Ok(Model::Ext),
            ("complete", None) => Ok(Model::Complete),
            ("mixed", None) => Ok(Model::Mixed),
            _ => Err(invalid(format!(
                "unknown model {s:?}; expected binomial:P, planted:EPS, ext, complete or mixed"
            ))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Binomial(p) => write!(f, "binomial:{p}"),
            Model::Planted(e) => write!(f, "planted:{e}"),
            Model::Ext => write!(f, "ext"),
            Model::Complete => write!(f, "complete"),
            Model::Mixed => write!(f, "mixed"),
        }
    }
}

impl Model {
    /// Resolves `Mixed` to a concrete model for `seed`.
    pub fn resolve(self, seed: u64) -> Model {
        match self {
            Model::Mixed => MIXED[ChaCha8Rng::seed_from_u64(seed).gen_range(0..MIXED.len())],
            m => m,
        }
    }

    pub fn generate(self, k: usize, n: usize, seed: u64) -> Result<Hypergraph> {
        match self.resolve(seed) {
            Model::Binomial(p) => random_binomial(k, n, p, seed),
            Model::Planted(e) => planted_extremal(k, n, e, seed),
            Model::Ext => extremal_construction(k, n),
            Model::Complete => complete(k, n),
            Model::Mixed => unreachable!(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub n: usize,
    pub model: String,
    pub seed: u64,
    pub delta_plus: usize,
    pub isolated: bool,
    /// `None` when the oracle ran out of budget.
    pub pm_exists: Option<bool>,
    pub path: String,
    /// `None` when either side ran out of budget.
    pub agree: Option<bool>,
    /// Whether a returned matching validated as perfect.
    pub valid: bool,
}

fn instance_seed(seed: u64, n: usize, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((n as u64) << 32) ^ trial as u64
}

/// Generates, solves and checks one instance.
pub fn sweep_instance(
    k: usize,
    n: usize,
    model: Model,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<SweepRecord> {
    let h = model.generate(k, n, seed)?;
    let isolated = !h.isolated_vertices().is_empty();
    let pm_exists = match find_perfect_matching(&h, Some(cfg.budget))? {
        Search::Found(m) => {
            debug_assert!(h.validate_matching(&m, true));
            Some(true)
        }
        Search::Exhausted => Some(false),
        Search::BudgetExceeded => None,
    };
    let (path, found, valid) = if isolated {
        ("rejected".to_string(), Some(false), false)
    } else {
        let out = solve(
            &h,
            &PipelineConfig {
                seed,
                ..cfg.clone()
            },
        )?;
        let valid = out
            .matching
            .as_ref()
            .is_some_and(|m| h.validate_matching(m, true));
        let found = if out.matching.is_some() {
            Some(true)
        } else if out.budget_exceeded() {
            None
        } else {
            Some(false)
        };
        (out.trace.path.as_str().to_string(), found, valid)
    };
    let agree = match (pm_exists, found) {
        (Some(p), Some(f)) => Some(p == f && (!f || valid)),
        _ => None,
    };
    Ok(SweepRecord {
        k,
        n,
        model: model.resolve(seed).to_string(),
        seed,
        delta_plus: h.delta_plus(),
        isolated,
        pm_exists,
        path,
        agree,
        valid,
    })
}

/// One record per `(n, trial)`, in that order. Instances run independently
/// under `exec`; each solve is sequential.
pub fn sweep(
    k: usize,
    n_list: &[usize],
    model: Model,
    trials: usize,
    seed: u64,
    cfg: &PipelineConfig,
    exec: Exec,
) -> Result<Vec<SweepRecord>> {
    if let Some(n) = n_list.iter().find(|&&n| n % k != 0) {
        return Err(invalid(format!("k = {k} does not divide n = {n}")));
    }
    let cfg = PipelineConfig {
        exec: Exec::Sequential,
        ..cfg.clone()
    };
    let jobs: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    map_range(exec, jobs.len(), |i| {
        let (n, t) = jobs[i];
        sweep_instance(k, n, model, instance_seed(seed, n, t), &cfg)
    })
    .into_iter()
    .collect()
}

fn opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "unknown",
    }
}

/// Writes records as CSV with the fixed header and LF line endings.
pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.n.to_string(),
            r.model.clone(),
            r.seed.to_string(),
            r.delta_plus.to_string(),
            r.isolated.to_string(),
            opt(r.pm_exists).to_string(),
            r.path.clone(),
            opt(r.agree).to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Every `S` with `|S| <= k - 1` lying in an edge has at least
/// `δ⁺ + k - 1 - |S|` extension candidates.
pub fn extend_bound_holds(h: &Hypergraph) -> bool {
    let dp = h.delta_plus();
    let mut seen = HashSet::new();
    for e in h.edges() {
        let k = e.len();
        for mask in 0u32..(1 << k) - 1 {
            let s: VertexSet = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| e[i])
                .collect();
            if !seen.insert(s) {
                continue;
            }
            let Ok(c) = h.extend_candidates(&s) else {
                return false;
            };
            if c.len() + s.len() < dp + k - 1 {
                return false;
            }
        }
    }
    true
}

/// Counts over all `2^C(n,k)` k-graphs on `n` vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveReport {
    pub graphs: u64,
    pub with_pm: u64,
    /// Graphs meeting the codegree threshold with no isolated vertices.
    pub above_threshold: u64,
    pub threshold_counterexamples: u64,
    /// Graphs with `δ⁺` one below the threshold, no isolated vertices and
    /// no perfect matching.
    pub tight_examples: u64,
    pub extend_violations: u64,
    pub degree_bound_violations: u64,
    /// Fractional outcomes that failed validation, or a perfect fractional
    /// matching reported for an infeasible case or vice versa.
    pub lp_violations: u64,
    /// Perfect matching existence differing from `ν = n/k`.
    pub matching_size_disagreements: u64,
    pub fractional_perfect: u64,
}

impl ExhaustiveReport {
    fn merge(mut self, o: Self) -> Self {
        self.graphs += o.graphs;
        self.with_pm += o.with_pm;
        self.above_threshold += o.above_threshold;
        self.threshold_counterexamples += o.threshold_counterexamples;
        self.tight_examples += o.tight_examples;
        self.extend_violations += o.extend_violations;
        self.degree_bound_violations += o.degree_bound_violations;
        self.lp_violations += o.lp_violations;
        self.matching_size_disagreements += o.matching_size_disagreements;
        self.fractional_perfect += o.fractional_perfect;
        self
    }
}

/// Threshold `(k-1)n/k - (k-2)`.
pub fn codegree_threshold(k: usize, n: usize) -> usize {
    (k - 1) * n / k + 2 - k
}

/// Enumerates every k-graph on `n` vertices (at most 24 possible edges) and
/// checks the threshold, the extension and degree bounds, the fractional
/// dichotomy and the two exact oracles against each other.
pub fn exhaustive_report(k: usize, n: usize, exec: Exec) -> Result<ExhaustiveReport> {
    if !n.is_multiple_of(k) || k < 2 {
        return Err(invalid(format!(
            "need k >= 2 dividing n, got k = {k}, n = {n}"
        )));
    }
    let mut all = Vec::new();
    for_each_subset(n, k, |e| all.push(e.to_vec()));
    if all.len() > 24 {
        return Err(Error::TooLarge(format!("2^{} hypergraphs", all.len())));
    }
    let threshold = codegree_threshold(k, n);
    let total = 1usize << all.len();
    let report = fold_chunks(
        exec,
        total,
        1 << 12,
        |range| {
            let mut r = ExhaustiveReport::default();
            for bits in range {
                let edges = all
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, e)| e);
                let h = Hypergraph::new(k, n, edges).expect("subsets are valid edges");
                r.graphs += 1;
                let pm = find_perfect_matching(&h, None)
                    .expect("k divides n")
                    .is_found();
                r.with_pm += pm as u64;
                let no_isolated = h.isolated_vertices().is_empty();
                let dp = h.delta_plus();
                if no_isolated && dp >= threshold {
                    r.above_threshold += 1;
                    r.threshold_counterexamples += !pm as u64;
                }
                if no_isolated && dp + 1 == threshold && !pm {
                    r.tight_examples += 1;
                }
                r.extend_violations += !extend_bound_holds(&h) as u64;
                r.degree_bound_violations += !h.degree_lower_bound_check() as u64;
                let nu = max_matching_size(&h, None).found().expect("no budget");
                r.matching_size_disagreements += (pm != (nu == n / k)) as u64;
                let frac = perfect_fractional_matching(&h);
                let perfect = matches!(frac, FractionalOutcome::Perfect { .. });
                r.fractional_perfect += perfect as u64;
                r.lp_violations += (!frac.is_valid(&h) || (pm && !perfect)) as u64;
            }
            r
        },
        ExhaustiveReport::merge,
    );
    Ok(report.unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_parsing() {
        assert_eq!(
            "binomial:0.5".parse::<Model>().unwrap(),
            Model::Binomial(0.5)
        );
        assert_eq!("planted:0.1".parse::<Model>().unwrap(), Model::Planted(0.1));
        assert_eq!("ext".parse::<Model>().unwrap(), Model::Ext);
        for bad in ["binomial", "binomial:2", "ext:1", "foo", "planted:x"] {
            assert!(bad.parse::<Model>().is_err(), "{bad}");
        }
        assert_eq!(Model::Binomial(0.25).to_string(), "binomial:0.25");
    }

    #[test]
    fn ext_rows() {
        let cfg = PipelineConfig::new(3);
        let rows = sweep(3, &[6, 12], Model::Ext, 2, 1, &cfg, Exec::Parallel).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.delta_plus, 2 * r.n / 3 - 2);
            assert_eq!(r.pm_exists, Some(false));
            assert_eq!(r.agree, Some(true));
        }
    }

    #[test]
    fn full_binomial_rows() {
        let cfg = PipelineConfig::new(3);
        let rows = sweep(
            3,
            &[9, 15],
            Model::Binomial(1.0),
            2,
            1,
            &cfg,
            Exec::Sequential,
        )
        .unwrap();
        assert!(rows
            .iter()
            .all(|r| r.pm_exists == Some(true) && r.agree == Some(true) && r.valid));
        assert!(sweep(3, &[10], Model::Ext, 1, 0, &cfg, Exec::Sequential).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = PipelineConfig::new(3);
        let rows = sweep(3, &[6], Model::Complete, 1, 0, &cfg, Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("k,n,model,seed,delta_plus,isolated,pm_exists,path,agree")
        );
        assert!(lines.next().unwrap().starts_with("3,6,complete,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn exhaustive_on_small_cases() {
        let r = exhaustive_report(2, 4, Exec::Parallel).unwrap();
        assert_eq!(r.graphs, 64);
        // Perfect matchings of K4 subgraphs: graphs containing one of the
        // three disjoint pairs of edges.
        let oracle = (0u32..64)
            .filter(|b| {
                [(0, 5), (1, 4), (2, 3)]
                    .iter()
                    .any(|&(i, j)| b >> i & 1 == 1 && b >> j & 1 == 1)
            })
            .count() as u64;
        assert_eq!(r.with_pm, oracle);
        assert_eq!(r.threshold_counterexamples, 0);
        assert_eq!(
            r.extend_violations + r.degree_bound_violations + r.lp_violations,
            0
        );
        assert_eq!(r.matching_size_disagreements, 0);
        let seq = exhaustive_report(2, 4, Exec::Sequential).unwrap();
        assert_eq!(r, seq);
    }
}
