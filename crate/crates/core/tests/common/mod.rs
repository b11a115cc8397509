#![allow(dead_code)]

use std::collections::BTreeSet;

use matchvol::{Hypergraph, Vertex, VertexSet};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn path(n: u32) -> Hypergraph {
    Hypergraph::from_edges((0..n - 1).map(|i| vec![i, i + 1]).collect()).unwrap()
}

pub fn cycle(n: u32) -> Hypergraph {
    Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]).collect()).unwrap()
}

pub fn star(leaves: u32) -> Hypergraph {
    Hypergraph::from_edges((1..=leaves).map(|i| vec![0, i]).collect()).unwrap()
}

/// Random simple graph on `n` vertices with max degree at most `max_degree`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: u32, max_degree: usize) -> Hypergraph {
    loop {
        let mut degree = vec![0usize; n as usize];
        let mut edges = BTreeSet::new();
        let attempts = rng.random_range(n..=3 * n);
        for _ in 0..attempts {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v || degree[u as usize] >= max_degree || degree[v as usize] >= max_degree {
                continue;
            }
            if edges.insert((u.min(v), u.max(v))) {
                degree[u as usize] += 1;
                degree[v as usize] += 1;
            }
        }
        if !edges.is_empty() {
            return Hypergraph::new(n as usize, edges.into_iter().map(|(u, v)| vec![u, v]).collect())
                .unwrap();
        }
    }
}

/// Random hypergraph on `n >= 2` vertices with edges of size `1..=k` and
/// degrees at most `max_degree`; parallel edges allowed.
pub fn random_hypergraph(
    rng: &mut ChaCha8Rng,
    n: u32,
    edge_count: usize,
    k: usize,
    max_degree: usize,
) -> Hypergraph {
    let vertices: Vec<Vertex> = (0..n).collect();
    let mut degree = vec![0usize; n as usize];
    let mut edges = Vec::new();
    for _ in 0..edge_count * 4 {
        if edges.len() == edge_count {
            break;
        }
        let size = rng.random_range(1..=k.min(n as usize));
        let edge: Vec<Vertex> = vertices.choose_multiple(rng, size).copied().collect();
        if edge.iter().all(|&v| degree[v as usize] < max_degree) {
            for &v in &edge {
                degree[v as usize] += 1;
            }
            edges.push(edge);
        }
    }
    if edges.is_empty() {
        edges.push(vec![0, 1]);
    }
    Hypergraph::new(n as usize, edges).unwrap()
}

/// Uniform 3-regular simple graph by the pairing model with rejection.
pub fn random_cubic(rng: &mut ChaCha8Rng, n: u32) -> Hypergraph {
    assert!(n.is_multiple_of(2) && n >= 4);
    'retry: loop {
        let mut points: Vec<u32> = (0..3 * n).map(|p| p / 3).collect();
        points.shuffle(rng);
        let mut edges = BTreeSet::new();
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !edges.insert((u, v)) {
                continue 'retry;
            }
        }
        return Hypergraph::new(n as usize, edges.into_iter().map(|(u, v)| vec![u, v]).collect())
            .unwrap();
    }
}

pub fn subset(mask: u32, n: usize) -> VertexSet {
    (0..n as Vertex).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Flat-connected subsets of `within` with at most `max_size` vertices, each once.
pub fn connected_sets(h: &Hypergraph, within: &VertexSet, max_size: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    for root in within.iter() {
        let allowed: VertexSet = within.iter().filter(|&v| v >= root).collect();
        out.extend(h.connected_supersets(root, max_size, &allowed).unwrap());
    }
    out
}
