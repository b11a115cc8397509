//! Independent ground truth: brute-force `Ξ`, the exact polytope volume, and
//! a seeded Monte Carlo estimate.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{volume_with_cap, HPolytope, DEFAULT_DIMENSION_CAP};
use crate::hypergraph::{Hypergraph, VertexSet};
use crate::polymer::{active_vertices, box_side, weight_graph};
use crate::rational::{integer, to_f64, Rational};

/// Largest active set [`xi_bruteforce`] accepts.
pub const MAX_BRUTEFORCE_ACTIVE: usize = 20;

const MC_CHUNK: u64 = 1 << 16;

/// `Ξ = Σ_{S ⊆ A} Π_{K ∈ K(S)} w(K)` over all subsets of the active set.
pub fn xi_bruteforce(h: &Hypergraph, delta: &Rational) -> Result<Rational> {
    xi_bruteforce_with_cap(h, delta, DEFAULT_DIMENSION_CAP)
}

pub fn xi_bruteforce_with_cap(h: &Hypergraph, delta: &Rational, dimension_cap: usize) -> Result<Rational> {
    let active: Vec<_> = active_vertices(h, delta).into_vec();
    if active.len() > MAX_BRUTEFORCE_ACTIVE {
        return Err(Error::Resource(format!(
            "{} active vertices; brute force is limited to {MAX_BRUTEFORCE_ACTIVE}",
            active.len()
        )));
    }
    let mut weights: HashMap<VertexSet, Rational> = HashMap::new();
    let mut total = Rational::ZERO;
    for mask in 0u32..1 << active.len() {
        let subset: VertexSet = (0..active.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| active[i])
            .collect();
        let mut term = Rational::ONE;
        for component in h.flat_components(&subset) {
            let w = match weights.get(&component) {
                Some(w) => w.clone(),
                None => {
                    let w = weight_graph(h, &component, delta, dimension_cap)?.value;
                    weights.insert(component, w.clone());
                    w
                }
            };
            term *= w;
            if term == Rational::ZERO {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// The full truncated polytope as an H-representation.
pub fn truncated_polytope(h: &Hypergraph, delta: &Rational) -> HPolytope {
    let b = box_side(h, delta);
    let mut p = HPolytope::new(h.num_edges());
    p.add_box(&Rational::ZERO, &b);
    for v in 0..h.num_vertices() as u32 {
        if h.degree(v) == 0 {
            continue;
        }
        let mut row = vec![Rational::ZERO; h.num_edges()];
        for &e in h.edges_at(v) {
            row[e] += integer(1);
        }
        p.add_le(row, Rational::ONE).expect("row length matches");
    }
    p
}

/// Exact `Vol(P_{H,δ})` in one kernel call.
pub fn volume_bruteforce(h: &Hypergraph, delta: &Rational) -> Result<Rational> {
    volume_bruteforce_with_cap(h, delta, DEFAULT_DIMENSION_CAP)
}

pub fn volume_bruteforce_with_cap(h: &Hypergraph, delta: &Rational, dimension_cap: usize) -> Result<Rational> {
    if h.num_edges() > dimension_cap {
        return Err(Error::Resource(format!(
            "{} edges exceed the dimension cap {dimension_cap}",
            h.num_edges()
        )));
    }
    volume_with_cap(&truncated_polytope(h, delta), dimension_cap)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub samples: u64,
    pub std_error: f64,
    pub seed: u64,
}

/// Hit-or-miss estimate over the box. Chunk `i` of `2^16` samples draws from
/// ChaCha8 stream `i` of the seed, so the result does not depend on the
/// thread count.
pub fn volume_montecarlo(h: &Hypergraph, delta: &Rational, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let b = to_f64(&box_side(h, delta));
    let active = active_vertices(h, delta);
    let rows: Vec<&[usize]> = active.iter().map(|v| h.edges_at(v)).collect();
    let dim = h.num_edges();
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut x = vec![0.0f64; dim];
            let mut hits = 0u64;
            for _ in 0..count {
                for xe in x.iter_mut() {
                    *xe = b * rng.random::<f64>();
                }
                if rows.iter().all(|row| row.iter().map(|&e| x[e]).sum::<f64>() <= 1.0) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let box_volume = b.powi(dim as i32);
    Ok(McEstimate {
        estimate: p * box_volume,
        samples,
        std_error: (p * (1.0 - p) / samples as f64).sqrt() * box_volume,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow, ratio};

    fn cycle(n: u32) -> Hypergraph {
        Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]).collect()).unwrap()
    }

    #[test]
    fn single_edge_unit_box() {
        let h = Hypergraph::from_edges(vec![vec![0, 1]]).unwrap();
        // delta = 0 is outside the plan's range but the oracle is plain geometry
        assert_eq!(volume_bruteforce(&h, &Rational::ZERO).unwrap(), integer(1));
    }

    #[test]
    fn square_minus_corner() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(volume_bruteforce(&h, &ratio(1, 10)).unwrap(), ratio(119, 400));
    }

    #[test]
    fn single_active_vertex_gives_one_plus_weight() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![0, 2]]).unwrap();
        let delta = ratio(1, 10);
        let w = weight_graph(&h, &VertexSet::singleton(0), &delta, 16).unwrap().value;
        assert_eq!(xi_bruteforce(&h, &delta).unwrap(), Rational::ONE + w);
    }

    #[test]
    fn xi_identity_on_triangle() {
        let h = cycle(3);
        let delta = ratio(1, 20);
        let b = box_side(&h, &delta);
        let vol = volume_bruteforce(&h, &delta).unwrap();
        assert_eq!(vol, xi_bruteforce(&h, &delta).unwrap() * pow(&b, 3));
        // b^3 - 3b c^2/2 + c^3 - c^3/4 with b = 21/40, c = 1/20
        assert_eq!(vol, ratio(9141, 64000));
    }

    #[test]
    fn too_many_active_vertices() {
        let h = cycle(21);
        assert!(matches!(xi_bruteforce(&h, &ratio(1, 100)), Err(Error::Resource(_))));
    }

    #[test]
    fn montecarlo_is_reproducible_and_close() {
        let h = cycle(3);
        let delta = ratio(1, 20);
        let a = volume_montecarlo(&h, &delta, 200_000, 7).unwrap();
        let b = volume_montecarlo(&h, &delta, 200_000, 7).unwrap();
        assert_eq!(a, b);
        let exact = to_f64(&volume_bruteforce(&h, &delta).unwrap());
        assert!((a.estimate - exact).abs() <= 5.0 * a.std_error);
    }

    #[test]
    fn montecarlo_without_observed_violations_reports_box_volume() {
        // violations need x > 1 on an edge box of side 1 + 10^-6
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let delta = ratio(1, 1_000_000);
        let est = volume_montecarlo(&h, &delta, 1000, 1).unwrap();
        assert_eq!(est.estimate, to_f64(&box_side(&h, &delta)).powi(2));
        assert_eq!(est.std_error, 0.0);
    }
}
