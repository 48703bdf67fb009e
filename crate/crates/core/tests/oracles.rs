use std::collections::HashMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypermatch::absorbing::{build_absorbing_structure, family_target, is_absorber, AbsorbParams};
use hypermatch::constructions::{complete, random_binomial};
use hypermatch::exact::graph_max_matching;
use hypermatch::lp::{
    minmax_pair_fractional, pair_cap_feasible, FractionalMatching, MinmaxOutcome,
};
use hypermatch::nibble::{nibble_rounds, NibbleParams};
use hypermatch::par::{map_range, Exec};

#[test]
fn minmax_is_optimal_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut checked = 0;
    let mut seed = 0;
    while checked < 20 {
        seed += 1;
        let (k, n) = [(2, 4), (2, 6), (2, 8), (3, 6), (3, 9)][rng.gen_range(0..5)];
        let h = random_binomial(k, n, rng.gen_range(0.3..0.9), seed).unwrap();
        let MinmaxOutcome::Optimal {
            matching,
            max_pair_load,
        } = minmax_pair_fractional(&h)
        else {
            continue;
        };
        assert!(matching.is_perfect(&h));
        assert_eq!(matching.max_pair_load(&h), max_pair_load);
        let below = &max_pair_load - BigRational::new(1.into(), 1_000_000.into());
        assert!(
            !pair_cap_feasible(&h, &below),
            "seed {seed}: M = {max_pair_load} is not optimal"
        );
        assert!(pair_cap_feasible(&h, &max_pair_load));
        checked += 1;
    }
}

#[test]
fn nibble_leftover_shrinks_with_rounds() {
    // Uniform weights on complete(3,30) are perfect with pair load 2/29 <= 5/n.
    let h = complete(3, 30).unwrap();
    let w = FractionalMatching::constant(&h, BigRational::new(1.into(), 406.into())).unwrap();
    assert!(w.is_perfect(&h));
    assert!(
        w.max_pair_load(&h) * BigRational::from_integer(30.into())
            <= BigRational::from_integer(5.into())
    );
    let mut means = Vec::new();
    for rounds in [5, 10, 20, 40] {
        let uncovered: Vec<usize> = map_range(Exec::Parallel, 100, |seed| {
            let p = NibbleParams {
                rounds,
                bite: 0.1,
                seed: seed as u64,
            };
            30 - nibble_rounds(&h, &w, &p, Exec::Sequential)
                .unwrap()
                .vertices()
                .len()
        });
        means.push(uncovered.iter().sum::<usize>() as f64 / (100.0 * 30.0));
    }
    for pair in means.windows(2) {
        assert!(pair[1] <= pair[0] + 0.02, "{means:?}");
    }
    assert!(means[3] < means[0], "{means:?}");
}

#[test]
fn absorber_family_concentrates() {
    let h = complete(3, 60).unwrap();
    let beta = 0.3;
    let target = family_target(60, 3, beta);
    assert_eq!(target, 3);
    let sizes: Vec<usize> = map_range(Exec::Parallel, 100, |seed| {
        let params = AbsorbParams {
            beta,
            capacity_samples: 5,
            seed: seed as u64,
            ..Default::default()
        };
        let s = build_absorbing_structure(&h, &params, Exec::Sequential).unwrap();
        let mut seen = hypermatch::VertexSet::empty();
        for m in &s.family {
            assert!(m.w.is_disjoint(&seen));
            seen |= m.w;
            assert!(is_absorber(&h, &m.w, &m.t).unwrap());
        }
        assert!(s.a.len() as f64 <= beta * 60.0);
        s.family.len()
    });
    let near = sizes
        .iter()
        .filter(|&&s| 2 * s >= target && s <= 2 * target)
        .count();
    assert!(near >= 95, "{sizes:?}");
}

/// Maximum matching size by memoised recursion over vertex masks.
fn brute_matching(adj: &[u32], mask: u32, memo: &mut HashMap<u32, usize>) -> usize {
    if mask == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&mask) {
        return v;
    }
    let v = mask.trailing_zeros();
    let rest = mask & !(1 << v);
    let mut best = brute_matching(adj, rest, memo);
    let mut nb = adj[v as usize] & rest;
    while nb != 0 {
        let u = nb.trailing_zeros();
        nb &= nb - 1;
        best = best.max(1 + brute_matching(adj, rest & !(1 << u), memo));
    }
    memo.insert(mask, best);
    best
}

#[test]
fn graph_matching_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for trial in 0..300u64 {
        let n = rng.gen_range(2..=14);
        let g = random_binomial(2, n, rng.gen_range(0.05..0.8), trial).unwrap();
        let m = graph_max_matching(&g).unwrap();
        assert!(g.validate_matching(&m, false));
        let mut adj = vec![0u32; n];
        for e in g.edges() {
            adj[e[0] as usize] |= 1 << e[1];
            adj[e[1] as usize] |= 1 << e[0];
        }
        let best = brute_matching(&adj, (1u32 << n) - 1, &mut HashMap::new());
        assert_eq!(m.len(), best, "trial {trial}");
        let min_deg = (0..n as u32).map(|v| g.vertex_degree(v)).min().unwrap();
        assert!(2 * m.len() >= (2 * min_deg).min(n - n % 2), "trial {trial}");
    }
}
