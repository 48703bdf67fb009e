//! Weighted semi-random nibble with greedy completion.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hypergraph::{Hypergraph, Matching};
use crate::lp::FractionalMatching;
use crate::par::{map_range, Exec};
use crate::vertex_set::VertexSet;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NibbleParams {
    pub rounds: usize,
    pub bite: f64,
    pub seed: u64,
}

impl Default for NibbleParams {
    fn default() -> Self {
        NibbleParams {
            rounds: 40,
            bite: 0.1,
            seed: 0,
        }
    }
}

/// Adds the lexicographically first edges disjoint from the matching until
/// it is maximal.
pub fn greedy_complete(h: &Hypergraph, m: &Matching) -> Matching {
    let mut covered = m.vertices();
    let mut out = m.clone();
    for i in 0..h.edge_count() {
        if covered.is_disjoint(h.edge_mask(i)) {
            covered |= *h.edge_mask(i);
            out.push(h.edge(i).to_vec());
        }
    }
    out
}

/// The nibble rounds alone, without completion.
///
/// Each round samples every surviving edge `e` independently with
/// probability `min(1, bite · w(e) / max_{v∈e} r_v)`, where `r_v` is the
/// weight on surviving edges at `v`. Sampled edges meeting another sampled
/// edge are all discarded; the rest join the matching and their vertices
/// leave the hypergraph. Randomness is drawn per fixed-size chunk of edges
/// from a stream keyed by round and chunk, so the result does not depend on
/// the execution mode.
pub fn nibble_rounds(
    h: &Hypergraph,
    w: &FractionalMatching,
    params: &NibbleParams,
    exec: Exec,
) -> Result<Matching> {
    w.validate(h)?;
    if !(params.bite > 0.0 && params.bite < 1.0) {
        return Err(invalid(format!("bite = {} not in (0, 1)", params.bite)));
    }
    let weight: Vec<f64> = w
        .weights()
        .iter()
        .map(|q| q.to_f64().unwrap_or(0.0))
        .collect();
    let mut alive: Vec<u32> = (0..h.edge_count() as u32)
        .filter(|&i| weight[i as usize] > 0.0)
        .collect();
    let mut covered = VertexSet::empty();
    let mut m = Matching::default();
    for round in 0..params.rounds {
        if alive.is_empty() {
            break;
        }
        let mut residual = vec![0.0f64; h.n()];
        for &i in &alive {
            for &v in h.edge(i as usize) {
                residual[v as usize] += weight[i as usize];
            }
        }
        let chunks = alive.len().div_ceil(CHUNK);
        let picked: Vec<Vec<u32>> = map_range(exec, chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(((round as u64) << 32) | c as u64);
            alive[c * CHUNK..((c + 1) * CHUNK).min(alive.len())]
                .iter()
                .copied()
                .filter(|&i| {
                    let norm = h
                        .edge(i as usize)
                        .iter()
                        .map(|&v| residual[v as usize])
                        .fold(0.0, f64::max);
                    let p = (params.bite * weight[i as usize] / norm).min(1.0);
                    rng.gen::<f64>() < p
                })
                .collect()
        });
        let sampled: Vec<u32> = picked.into_iter().flatten().collect();
        let mut hits = vec![0u32; h.n()];
        for &i in &sampled {
            for &v in h.edge(i as usize) {
                hits[v as usize] += 1;
            }
        }
        for &i in &sampled {
            let e = h.edge(i as usize);
            if e.iter().all(|&v| hits[v as usize] == 1) {
                covered |= *h.edge_mask(i as usize);
                m.push(e.to_vec());
            }
        }
        alive.retain(|&i| covered.is_disjoint(h.edge_mask(i as usize)));
    }
    Ok(m)
}

/// [`nibble_rounds`] followed by [`greedy_complete`].
pub fn nibble(
    h: &Hypergraph,
    w: &FractionalMatching,
    params: &NibbleParams,
    exec: Exec,
) -> Result<Matching> {
    let m = nibble_rounds(h, w, params, exec)?;
    Ok(greedy_complete(h, &m))
}
