//! Polymers of the two models, their exact weights, the MCS map and broken
//! vertices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex, VertexSet};
use crate::integral::{integral, CoreCache, Problem, Route};
use crate::rational::{abs, e_upper, integer, pow, Rational};

/// Polymer model: connected active sets with `w(K)`, or minimal connected
/// subgraphs (MCS) with `u(T)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Graph,
    Mcs,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Graph => "graph",
            Mode::Mcs => "mcs",
        })
    }
}

/// Side of the truncation box, `(1+δ)/Δ`.
pub fn box_side(h: &Hypergraph, delta: &Rational) -> Rational {
    (Rational::ONE + delta) / integer(h.max_degree() as i64)
}

/// Vertices whose constraint can be violated inside the box:
/// `deg(v)·(1+δ)/Δ > 1`.
pub fn active_vertices(h: &Hypergraph, delta: &Rational) -> VertexSet {
    let b = box_side(h, delta);
    (0..h.num_vertices() as Vertex)
        .filter(|&v| integer(h.degree(v) as i64) * &b > Rational::ONE)
        .collect()
}

/// The MCS map. Scans `K` from its least vertex, repeatedly taking the least
/// unprocessed vertex adjacent to the current `T` and keeping it iff it
/// brings a new hyperedge. Empty when `Flat(H)[K]` is disconnected.
pub fn phi(h: &Hypergraph, k: &VertexSet) -> VertexSet {
    if !h.is_connected_in_flat(k) {
        return VertexSet::new();
    }
    let members = k.as_slice();
    let mut covered = vec![false; h.num_edges()];
    let mut processed = vec![false; members.len()];
    let mut t: Vec<Vertex> = Vec::with_capacity(members.len());

    let mut next = Some(0);
    while let Some(i) = next {
        let u = members[i];
        processed[i] = true;
        // the first vertex is kept even when it has no edges at all
        if t.is_empty() || h.edges_at(u).iter().any(|&e| !covered[e]) {
            t.push(u);
            for &e in h.edges_at(u) {
                covered[e] = true;
            }
        }
        next = (0..members.len()).find(|&j| {
            !processed[j] && t.iter().any(|&v| h.flat_adjacent(v, members[j]))
        });
    }
    VertexSet::from_unsorted(t)
}

/// `B(T)`: boundary vertices `v` with `φ(T ∪ {v}) = T`.
pub fn broken_set(h: &Hypergraph, t: &VertexSet) -> Result<VertexSet> {
    if t.iter().any(|v| v as usize >= h.num_vertices()) {
        return Err(Error::Argument(format!("{t} names a vertex outside H")));
    }
    if t.is_empty() || phi(h, t) != *t {
        return Err(Error::Argument(format!("{t} is not a minimal connected subgraph")));
    }
    Ok(h
        .flat_boundary(t)
        .iter()
        .filter(|&v| phi(h, &t.with(v)) == *t)
        .collect())
}

/// A polymer: a Flat-connected set of active vertices, which in MCS mode is
/// also a fixed point of `φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer {
    support: VertexSet,
    mode: Mode,
}

impl Polymer {
    pub fn new(h: &Hypergraph, support: VertexSet, mode: Mode, delta: &Rational) -> Result<Self> {
        if support.is_empty() || !h.is_connected_in_flat(&support) {
            return Err(Error::Argument(format!("{support} is not Flat-connected")));
        }
        let active = active_vertices(h, delta);
        if !support.is_subset(&active) {
            return Err(Error::Argument(format!("{support} contains an inactive vertex")));
        }
        if mode == Mode::Mcs && phi(h, &support) != support {
            return Err(Error::Argument(format!("{support} is not a minimal connected subgraph")));
        }
        Ok(Self { support, mode })
    }

    /// Skips validation; the caller vouches for the support.
    pub(crate) fn unchecked(support: VertexSet, mode: Mode) -> Self {
        Self { support, mode }
    }

    pub fn support(&self) -> &VertexSet {
        &self.support
    }

    pub fn size(&self) -> usize {
        self.support.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// Exact signed weight and the route that computed it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolymerWeight {
    pub value: Rational,
    pub route: Route,
}

fn signed_weight(
    h: &Hypergraph,
    t: &VertexSet,
    broken: &VertexSet,
    delta: &Rational,
    dimension_cap: usize,
    cache: Option<&CoreCache>,
) -> Result<PolymerWeight> {
    let b = box_side(h, delta);
    let problem = Problem {
        graph: h,
        box_side: &b,
        violated: t,
        satisfied: broken,
        dimension_cap,
        cache,
    };
    let (volume, route) = integral(&problem).map_err(|e| match e {
        Error::Resource(msg) => Error::Resource(format!("polymer {t}: {msg}")),
        other => other,
    })?;
    let edges = h.incident_edges_unchecked(t).len();
    let mut value = volume / pow(&b, edges);
    if t.len() % 2 == 1 {
        value = -value;
    }
    Ok(PolymerWeight { value, route })
}

/// `w(K) = b^{-|E(K)|} (-1)^{|K|} vol{x ∈ [0,b]^{E(K)} : Σ_{e∋v} x_e >= 1 ∀ v ∈ K}`.
pub fn weight_graph(
    h: &Hypergraph,
    gamma: &VertexSet,
    delta: &Rational,
    dimension_cap: usize,
) -> Result<PolymerWeight> {
    if gamma.is_empty() || !h.is_connected_in_flat(gamma) {
        return Err(Error::Argument(format!("{gamma} is not Flat-connected")));
    }
    signed_weight(h, gamma, &VertexSet::new(), delta, dimension_cap, None)
}

/// `u(T)`: the violation integral over `E(T)` with the broken vertices' constraints
/// imposed on the variables they share with `E(T)`.
pub fn weight_mcs(
    h: &Hypergraph,
    t: &VertexSet,
    delta: &Rational,
    dimension_cap: usize,
) -> Result<PolymerWeight> {
    let broken = broken_set(h, t)?;
    signed_weight(h, t, &broken, delta, dimension_cap, None)
}

/// Weight of a support already known to be a polymer of `mode`, sharing
/// core integrals through `cache`.
pub(crate) fn polymer_weight(
    h: &Hypergraph,
    support: &VertexSet,
    mode: Mode,
    delta: &Rational,
    dimension_cap: usize,
    cache: &CoreCache,
) -> Result<PolymerWeight> {
    let broken = match mode {
        Mode::Graph => VertexSet::new(),
        Mode::Mcs => broken_set(h, support)?,
    };
    signed_weight(h, support, &broken, delta, dimension_cap, Some(cache))
}

/// `(eδ)^ℓ` with the rational upper bound for `e`.
pub fn graph_weight_bound(delta: &Rational, size: usize) -> Rational {
    pow(&(e_upper() * delta), size)
}

/// Whether the graph-model weight bound applies (`δ < 1/(Δ-1)`).
pub fn graph_bound_applies(h: &Hypergraph, delta: &Rational) -> bool {
    let d = h.max_degree();
    d <= 1 || delta * integer(d as i64 - 1) < Rational::ONE
}

/// Whether the MCS weight bound applies (`δ < 1/Δ`).
pub fn mcs_bound_applies(h: &Hypergraph, delta: &Rational) -> bool {
    delta * integer(h.max_degree() as i64) < Rational::ONE
}

/// `k` as used in the MCS bounds; singleton-only hypergraphs count as `k = 2`.
pub fn effective_edge_size(h: &Hypergraph) -> usize {
    h.max_edge_size().max(2)
}

pub fn graph_bound_holds(weight: &Rational, delta: &Rational, size: usize) -> bool {
    abs(weight) <= graph_weight_bound(delta, size)
}

/// `|u| <= (Δδ)^ℓ (e/Δ)^{ℓ/(k-1)}`, compared after raising to the power `k-1`.
pub fn mcs_bound_holds(h: &Hypergraph, weight: &Rational, delta: &Rational, size: usize) -> bool {
    let k1 = effective_edge_size(h) - 1;
    let big_delta = integer(h.max_degree() as i64);
    let lhs = pow(&abs(weight), k1);
    let rhs = pow(&(&big_delta * delta), size * k1) * pow(&(e_upper() / &big_delta), size);
    lhs <= rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{volume, HPolytope, DEFAULT_DIMENSION_CAP};
    use crate::rational::ratio;

    const CAP: usize = DEFAULT_DIMENSION_CAP;

    fn vs(v: &[Vertex]) -> VertexSet {
        VertexSet::from_unsorted(v.to_vec())
    }

    fn cycle(n: u32) -> Hypergraph {
        Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]).collect()).unwrap()
    }

    fn path(n: u32) -> Hypergraph {
        Hypergraph::from_edges((0..n - 1).map(|i| vec![i, i + 1]).collect()).unwrap()
    }

    #[test]
    fn active_vertex_examples() {
        // C4 padded with a pendant star so Δ = 3
        let mut edges: Vec<Vec<u32>> = (0..4).map(|i| vec![i, (i + 1) % 4]).collect();
        edges.extend([vec![4, 5], vec![4, 6], vec![4, 7]]);
        let padded = Hypergraph::from_edges(edges).unwrap();
        let act = active_vertices(&padded, &ratio(1, 3));
        assert!(!(0..4).any(|v| act.contains(v)));
        assert_eq!(active_vertices(&cycle(4), &ratio(1, 10)), vs(&[0, 1, 2, 3]));
        let star = Hypergraph::from_edges(vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        assert_eq!(active_vertices(&star, &ratio(1, 100)), vs(&[0]));
    }

    #[test]
    fn single_center_of_path() {
        let w = weight_graph(&path(3), &vs(&[1]), &ratio(1, 10), CAP).unwrap();
        assert_eq!(w.value, ratio(-2, 121));
    }

    #[test]
    fn low_degree_vertex_has_zero_weight() {
        let w = weight_graph(&path(3), &vs(&[0, 1]), &ratio(1, 10), CAP).unwrap();
        assert_eq!(w.value, Rational::ZERO);
    }

    // direct polytope volume in x-coordinates, no reductions
    fn brute_weight(h: &Hypergraph, t: &VertexSet, broken: &VertexSet, delta: &Rational) -> Rational {
        let b = box_side(h, delta);
        let edges = h.incident_edges(t).unwrap();
        let mut p = HPolytope::new(edges.len());
        p.add_box(&Rational::ZERO, &b);
        let row = |v: Vertex| -> Vec<Rational> {
            edges
                .iter()
                .map(|&e| if h.edge(e).contains(&v) { integer(1) } else { integer(0) })
                .collect()
        };
        for v in t.iter() {
            p.add_ge(row(v), integer(1)).unwrap();
        }
        for v in broken.iter() {
            p.add_le(row(v), integer(1)).unwrap();
        }
        let sign = if t.len() % 2 == 1 { integer(-1) } else { integer(1) };
        sign * volume(&p).unwrap() / pow(&b, edges.len())
    }

    #[test]
    fn routes_agree_with_plain_volume() {
        let delta = ratio(1, 20);
        let c4 = cycle(4);
        for set in [vs(&[0]), vs(&[0, 1]), vs(&[0, 1, 2]), vs(&[0, 1, 2, 3])] {
            let w = weight_graph(&c4, &set, &delta, CAP).unwrap();
            assert_eq!(w.value, brute_weight(&c4, &set, &VertexSet::new(), &delta), "{set}");
        }
        let all = weight_graph(&c4, &vs(&[0, 1, 2, 3]), &delta, CAP).unwrap();
        assert_eq!(all.route, Route::Kernel);
        let k4 = Hypergraph::from_edges(vec![
            vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3],
        ])
        .unwrap();
        for set in [vs(&[0, 1]), vs(&[0, 1, 2]), vs(&[0, 1, 2, 3])] {
            let w = weight_graph(&k4, &set, &ratio(1, 30), CAP).unwrap();
            assert_eq!(w.value, brute_weight(&k4, &set, &VertexSet::new(), &ratio(1, 30)));
        }
    }

    #[test]
    fn cycle_with_hanging_trees_matches_plain_volume() {
        // prism: triangles 012 and 345 joined by a matching, cubic
        let prism = Hypergraph::from_edges(vec![
            vec![0, 1], vec![1, 2], vec![2, 0], vec![3, 4], vec![4, 5], vec![5, 3],
            vec![0, 3], vec![1, 4], vec![2, 5],
        ])
        .unwrap();
        let delta = ratio(1, 40);
        for set in [vs(&[0, 1, 2, 3]), vs(&[0, 1, 2, 3, 4]), vs(&[0, 1, 3, 4]), vs(&[0, 1, 2, 3, 5])] {
            let w = weight_graph(&prism, &set, &delta, CAP).unwrap();
            assert_eq!(w.route, Route::Kernel);
            assert_eq!(w.value, brute_weight(&prism, &set, &VertexSet::new(), &delta), "{set}");
        }
    }

    #[test]
    fn phi_examples() {
        let h = Hypergraph::from_edges(vec![vec![0, 1, 2], vec![0], vec![1]]).unwrap();
        assert_eq!(phi(&h, &vs(&[0, 1, 2])), vs(&[0, 1]));
        assert_eq!(phi(&h, &vs(&[2])), vs(&[2]));
        assert_eq!(broken_set(&h, &vs(&[0, 1])).unwrap(), vs(&[2]));
        assert_eq!(phi(&cycle(4), &vs(&[0, 2])), VertexSet::new());
        assert!(broken_set(&h, &vs(&[0, 1, 2])).is_err());
    }

    #[test]
    fn broken_set_on_path() {
        // φ({0,1}) starts from 0 and keeps both vertices, so only 2 is broken
        assert_eq!(phi(&path(3), &vs(&[0, 1])), vs(&[0, 1]));
        assert_eq!(phi(&path(3), &vs(&[1, 2])), vs(&[1]));
        assert_eq!(broken_set(&path(3), &vs(&[1])).unwrap(), vs(&[2]));
    }

    #[test]
    fn mcs_weight_matches_brute_force_with_broken_constraints() {
        let delta = ratio(1, 30);
        let c4 = cycle(4);
        for t in [vs(&[0]), vs(&[0, 1]), vs(&[0, 2]).with(1)] {
            if phi(&c4, &t) != t {
                continue;
            }
            let broken = broken_set(&c4, &t).unwrap();
            let u = weight_mcs(&c4, &t, &delta, CAP).unwrap();
            assert_eq!(u.value, brute_weight(&c4, &t, &broken, &delta), "{t}");
        }
    }

    #[test]
    fn star_construction_small_case() {
        // Δ = 2, k = 2: T = {0,1}, e1 = {0,1}, f0 = {0}, f1 = {1}
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![0], vec![1]]).unwrap();
        let t = vs(&[0, 1]);
        assert_eq!(broken_set(&h, &t).unwrap(), VertexSet::new());
        let u = weight_mcs(&h, &t, &ratio(1, 10), CAP).unwrap();
        assert_eq!(u.value, ratio(8, 3993));
    }

    #[test]
    fn singleton_mcs_equals_graph_weight() {
        let h = path(3);
        let delta = ratio(1, 10);
        let u = weight_mcs(&h, &vs(&[1]), &delta, CAP).unwrap();
        // endpoints are broken but inactive, so their constraints hold trivially
        assert_eq!(u.value, ratio(-2, 121));
    }

    #[test]
    fn full_route_when_box_is_not_implied() {
        // δ = 3 on C3: budgets exceed the box side
        let c3 = cycle(3);
        let delta = integer(3);
        let set = vs(&[0, 1]);
        let w = weight_graph(&c3, &set, &delta, CAP).unwrap();
        assert_eq!(w.route, Route::Full);
        assert_eq!(w.value, brute_weight(&c3, &set, &VertexSet::new(), &delta));
    }

    #[test]
    fn weight_bounds() {
        let delta = ratio(1, 120);
        let c4 = cycle(4);
        for set in [vs(&[0]), vs(&[0, 1]), vs(&[0, 1, 2])] {
            let w = weight_graph(&c4, &set, &delta, CAP).unwrap();
            assert!(graph_bound_holds(&w.value, &delta, set.len()));
            let u = weight_mcs(&c4, &set, &delta, CAP).unwrap();
            assert!(mcs_bound_holds(&c4, &u.value, &delta, set.len()));
        }
    }

    #[test]
    fn polymer_validation() {
        let c4 = cycle(4);
        let delta = ratio(1, 10);
        assert!(Polymer::new(&c4, vs(&[0, 1]), Mode::Graph, &delta).is_ok());
        assert!(Polymer::new(&c4, vs(&[0, 2]), Mode::Graph, &delta).is_err());
        assert!(Polymer::new(&c4, VertexSet::new(), Mode::Graph, &delta).is_err());
        assert!(Polymer::new(&path(3), vs(&[0, 1]), Mode::Graph, &delta).is_err());
    }
}
