//! Instance formats.
//!
//! Text: a header line `k n m` followed by `m` lines of `k` space-separated
//! vertex ids. JSON: `{"k": .., "n": .., "edges": [[..], ..]}`. Writers emit
//! edges in lexicographic order.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            _ => Err(invalid(format!(
                "unknown format {s:?}, expected text or json"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInstance {
    k: usize,
    n: usize,
    edges: Vec<Vec<u32>>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn numbers<T: FromStr>(line: &str, no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(no, format!("not a non-negative integer: {t:?}")))
        })
        .collect()
}

/// Checks one edge against `k`, `n` and the edges seen so far.
fn check_edge(
    e: &[u32],
    k: usize,
    n: usize,
    seen: &mut HashSet<Vec<u32>>,
    line: usize,
) -> Result<()> {
    if e.len() != k {
        return Err(parse_err(
            line,
            format!("edge has {} vertices, expected {k}", e.len()),
        ));
    }
    if let Some(v) = e.iter().find(|&&v| v as usize >= n) {
        return Err(parse_err(line, format!("vertex {v} out of range 0..{n}")));
    }
    let mut sorted = e.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(parse_err(line, "repeated vertex in edge"));
    }
    if !seen.insert(sorted) {
        return Err(parse_err(line, "duplicate edge"));
    }
    Ok(())
}

pub fn parse_text(input: &str) -> Result<Hypergraph> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header \"k n m\""))?;
    let header: Vec<usize> = numbers(header, hline)?;
    let &[k, n, m] = header.as_slice() else {
        return Err(parse_err(hline, "header must be \"k n m\""));
    };
    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::new();
    for (no, line) in lines {
        if edges.len() == m {
            return Err(parse_err(no, format!("more than {m} edges")));
        }
        let e: Vec<u32> = numbers(line, no)?;
        check_edge(&e, k, n, &mut seen, no)?;
        edges.push(e);
    }
    if edges.len() != m {
        return Err(parse_err(
            input.lines().count().max(1),
            format!("expected {m} edges, found {}", edges.len()),
        ));
    }
    Hypergraph::new(k, n, edges)
}

pub fn parse_json(input: &str) -> Result<Hypergraph> {
    let inst: JsonInstance = serde_json::from_str(input)?;
    let mut seen = HashSet::new();
    for (i, e) in inst.edges.iter().enumerate() {
        check_edge(e, inst.k, inst.n, &mut seen, i + 1).map_err(|e| match e {
            Error::Parse { msg, .. } => invalid(format!("edge {i}: {msg}")),
            other => other,
        })?;
    }
    Hypergraph::new(inst.k, inst.n, inst.edges)
}

pub fn parse(input: &str, format: Format) -> Result<Hypergraph> {
    match format {
        Format::Text => parse_text(input),
        Format::Json => parse_json(input),
    }
}

pub fn to_text(h: &Hypergraph) -> String {
    let mut out = format!("{} {} {}\n", h.k(), h.n(), h.edge_count());
    for e in h.edges() {
        let mut first = true;
        for v in e {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn to_json(h: &Hypergraph) -> String {
    let inst = JsonInstance {
        k: h.k(),
        n: h.n(),
        edges: h.edges().map(<[u32]>::to_vec).collect(),
    };
    serde_json::to_string(&inst).expect("instance serialises")
}

pub fn write(h: &Hypergraph, format: Format) -> String {
    match format {
        Format::Text => to_text(h),
        Format::Json => to_json(h) + "\n",
    }
}
