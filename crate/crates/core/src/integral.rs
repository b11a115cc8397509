//! The signed integrals behind polymer weights.
//!
//! With `y_e = b - x_e` a violated vertex constraint becomes `Σ_{e∋v} y_e <= c_v`
//! with `c_v = deg(v)·b - 1`, and a satisfied (broken-vertex) constraint becomes
//! `Σ y_e >= d_v`. Edges with the same incidence signature are merged (their sum
//! has density `σ^{p-1}/(p-1)!`), and groups seen by a single violated vertex
//! integrate to `(c_v - s_v)^P / P!`. What is left is either a tree, handled by
//! a one-variable convolution recursion, or a small polytope handed to the
//! exact kernel.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{
    integrate_polynomials_with_cap, integrate_with_cap, volume_with_cap, AffineForm, HPolytope,
};
use crate::hypergraph::{Hypergraph, Vertex, VertexSet};
use crate::rational::{factorial_rational, integer, pow, Rational};

/// Which evaluation route produced a weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Tree,
    Kernel,
    Full,
}

pub(crate) struct Problem<'a> {
    pub graph: &'a Hypergraph,
    pub box_side: &'a Rational,
    pub violated: &'a VertexSet,
    pub satisfied: &'a VertexSet,
    pub dimension_cap: usize,
    pub cache: Option<&'a CoreCache>,
}

/// Normalized core integrals keyed by a canonical form of the core; they do
/// not depend on `δ`.
#[derive(Default)]
pub(crate) struct CoreCache {
    map: Mutex<HashMap<CoreKey, Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CoreKey {
    factors: Vec<Poly>,
    groups: Vec<(usize, Vec<usize>)>,
}

#[derive(Debug)]
struct Group {
    violated: Vec<usize>,
    satisfied: Vec<usize>,
    multiplicity: usize,
}

/// `∫_{[0,b]^{E(T)}} Π_{v∈T} 1[Σ x_e >= 1] Π_{v∈B} 1[Σ_{e∈E(T)} x_e <= 1] dx`.
pub(crate) fn integral(p: &Problem<'_>) -> Result<(Rational, Route)> {
    let h = p.graph;
    let b = p.box_side;
    let edges = h.incident_edges_unchecked(p.violated);
    let t: Vec<Vertex> = p.violated.iter().collect();

    let budgets: Vec<Rational> = t
        .iter()
        .map(|&v| integer(h.degree(v) as i64) * b - Rational::ONE)
        .collect();
    if budgets.iter().any(|c| *c <= Rational::ZERO) {
        return Ok((Rational::ZERO, Route::Tree));
    }

    // effective broken-vertex thresholds (others hold identically)
    let mut thresholds: Vec<(Vertex, Rational)> = Vec::new();
    for v in p.satisfied.iter() {
        let shared = h.edges_at(v).iter().filter(|e| edges.binary_search(e).is_ok()).count();
        let d = integer(shared as i64) * b - Rational::ONE;
        if d > Rational::ZERO {
            thresholds.push((v, d));
        }
    }

    let t_pos = |v: Vertex| t.binary_search(&v).ok();
    let box_implied = edges.iter().all(|&e| {
        h.edge(e)
            .iter()
            .filter_map(|&v| t_pos(v))
            .any(|i| budgets[i] <= *b)
    });
    if !box_implied {
        return full(p, &edges, &t, &budgets, &thresholds).map(|v| (v, Route::Full));
    }

    let mut signatures: BTreeMap<(Vec<usize>, Vec<usize>), usize> = BTreeMap::new();
    for &e in &edges {
        let members = h.edge(e);
        let vs: Vec<usize> = members.iter().filter_map(|&v| t_pos(v)).collect();
        let bs: Vec<usize> = thresholds
            .iter()
            .enumerate()
            .filter(|(_, (v, _))| members.contains(v))
            .map(|(i, _)| i)
            .collect();
        *signatures.entry((vs, bs)).or_default() += 1;
    }
    let mut pendant = vec![0usize; t.len()];
    let mut groups = Vec::new();
    for ((vs, bs), multiplicity) in signatures {
        if vs.len() == 1 && bs.is_empty() {
            pendant[vs[0]] += multiplicity;
        } else {
            groups.push(Group {
                violated: vs,
                satisfied: bs,
                multiplicity,
            });
        }
    }

    let uniform = budgets.iter().all(|c| *c == budgets[0]);
    let incidences: usize = groups.iter().map(|g| g.violated.len()).sum();
    if thresholds.is_empty() && uniform && incidences + 1 == t.len() + groups.len() {
        let tree = tree_integral(t.len(), &pendant, &groups);
        if let Some(value) = tree {
            return Ok((value * pow(&budgets[0], edges.len()), Route::Tree));
        }
    }
    if thresholds.is_empty() && uniform {
        let value = cyclic_core(t.len(), &pendant, &groups, p.dimension_cap, p.cache)?;
        return Ok((value * pow(&budgets[0], edges.len()), Route::Kernel));
    }
    kernel(p, &budgets, &thresholds, &pendant, &groups).map(|v| (v, Route::Kernel))
}

fn full(
    p: &Problem<'_>,
    edges: &[usize],
    t: &[Vertex],
    budgets: &[Rational],
    thresholds: &[(Vertex, Rational)],
) -> Result<Rational> {
    let h = p.graph;
    let dim = edges.len();
    let mut poly = HPolytope::new(dim);
    poly.add_box(&Rational::ZERO, p.box_side);
    let row = |v: Vertex| -> Vec<Rational> {
        edges
            .iter()
            .map(|e| {
                if h.edge(*e).contains(&v) {
                    Rational::ONE
                } else {
                    Rational::ZERO
                }
            })
            .collect()
    };
    for (i, &v) in t.iter().enumerate() {
        poly.add_le(row(v), budgets[i].clone())?;
    }
    for (v, d) in thresholds {
        poly.add_ge(row(*v), d.clone())?;
    }
    volume_with_cap(&poly, p.dimension_cap)
}

fn kernel(
    p: &Problem<'_>,
    budgets: &[Rational],
    thresholds: &[(Vertex, Rational)],
    pendant: &[usize],
    groups: &[Group],
) -> Result<Rational> {
    let dim = groups.len();
    let mut poly = HPolytope::new(dim);
    let unit = |i: usize| -> Vec<Rational> {
        (0..dim)
            .map(|j| if i == j { Rational::ONE } else { Rational::ZERO })
            .collect()
    };
    for g in 0..dim {
        poly.add_ge(unit(g), Rational::ZERO)?;
    }
    let vertex_row = |v: usize| -> Vec<Rational> {
        groups
            .iter()
            .map(|g| {
                if g.violated.contains(&v) {
                    Rational::ONE
                } else {
                    Rational::ZERO
                }
            })
            .collect()
    };
    for (v, c) in budgets.iter().enumerate() {
        poly.add_le(vertex_row(v), c.clone())?;
    }
    for (i, (_, d)) in thresholds.iter().enumerate() {
        let row = groups
            .iter()
            .map(|g| {
                if g.satisfied.contains(&i) {
                    Rational::ONE
                } else {
                    Rational::ZERO
                }
            })
            .collect();
        poly.add_ge(row, d.clone())?;
    }

    let mut factors = Vec::new();
    let mut denominator = Rational::ONE;
    for (v, &count) in pendant.iter().enumerate() {
        if count > 0 {
            let linear = vertex_row(v).into_iter().map(|x| -x).collect();
            factors.push((AffineForm::new(budgets[v].clone(), linear), count as u32));
            denominator *= factorial_rational(count);
        }
    }
    for (g, group) in groups.iter().enumerate() {
        if group.multiplicity > 1 {
            factors.push((
                AffineForm::new(Rational::ZERO, unit(g)),
                (group.multiplicity - 1) as u32,
            ));
            denominator *= factorial_rational(group.multiplicity - 1);
        }
    }
    Ok(integrate_with_cap(&poly, &factors, p.dimension_cap)? / denominator)
}

/// Polynomial in one variable, coefficient `i` multiplies `x^i`.
type Poly = Vec<Rational>;

fn monomial(degree: usize) -> Poly {
    let mut p = vec![Rational::ZERO; degree + 1];
    p[degree] = Rational::ONE / factorial_rational(degree);
    p
}

// (f * g)(x) = ∫_0^x f(s) g(x - s) ds; x^i * x^j = i! j!/(i+j+1)! x^{i+j+1}
fn convolve(f: &Poly, g: &Poly) -> Poly {
    let mut out = vec![Rational::ZERO; f.len() + g.len()];
    for (i, a) in f.iter().enumerate() {
        if *a == Rational::ZERO {
            continue;
        }
        for (j, c) in g.iter().enumerate() {
            if *c == Rational::ZERO {
                continue;
            }
            let scale = factorial_rational(i) * factorial_rational(j) / factorial_rational(i + j + 1);
            out[i + j + 1] += a * c * scale;
        }
    }
    out
}

fn multiply(f: &Poly, g: &Poly) -> Poly {
    let mut out = vec![Rational::ZERO; f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, c) in g.iter().enumerate() {
            out[i + j] += a * c;
        }
    }
    out
}

// p(1 - x)
fn reflect(p: &Poly) -> Poly {
    let mut out = vec![Rational::ZERO; p.len()];
    let mut binomial: Vec<Rational> = vec![Rational::ONE];
    for (i, a) in p.iter().enumerate() {
        if i > 0 {
            let mut next = vec![Rational::ZERO; i + 1];
            for (j, c) in binomial.iter().enumerate() {
                next[j] += c;
                next[j + 1] -= c;
            }
            binomial = next;
        }
        if *a != Rational::ZERO {
            for (j, c) in binomial.iter().enumerate() {
                out[j] += a * c;
            }
        }
    }
    out
}

fn tree_integral(vertices: usize, pendant: &[usize], groups: &[Group]) -> Option<Rational> {
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); vertices];
    for (g, group) in groups.iter().enumerate() {
        for &v in &group.violated {
            at_vertex[v].push(g);
        }
    }
    let mut seen = vec![false; vertices];
    let root = vertex_poly(0, None, pendant, groups, &at_vertex, &mut seen);
    if seen.iter().any(|s| !s) {
        return None;
    }
    Some(root.iter().fold(Rational::ZERO, |acc, c| acc + c))
}

fn vertex_poly(
    v: usize,
    parent: Option<usize>,
    pendant: &[usize],
    groups: &[Group],
    at_vertex: &[Vec<usize>],
    seen: &mut [bool],
) -> Poly {
    seen[v] = true;
    let mut poly = monomial(pendant[v]);
    for &g in &at_vertex[v] {
        if Some(g) == parent {
            continue;
        }
        poly = convolve(&poly, &group_density(v, g, pendant, groups, at_vertex, seen));
    }
    poly
}

// Uniform budgets normalized to 1, no thresholds, incidence graph with
// cycles: trees hanging off the 2-core are folded into polynomial factors of
// their core vertex by the tree recursion; the kernel sees only core groups.
fn cyclic_core(
    vertices: usize,
    pendant: &[usize],
    groups: &[Group],
    dimension_cap: usize,
    cache: Option<&CoreCache>,
) -> Result<Rational> {
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); vertices];
    for (g, group) in groups.iter().enumerate() {
        for &v in &group.violated {
            at_vertex[v].push(g);
        }
    }
    // peel leaves of the vertex/group incidence graph
    let mut vertex_degree: Vec<usize> = at_vertex.iter().map(Vec::len).collect();
    let mut group_degree: Vec<usize> = groups.iter().map(|g| g.violated.len()).collect();
    let mut vertex_alive = vec![true; vertices];
    let mut group_alive = vec![true; groups.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..vertices {
            if vertex_alive[v] && vertex_degree[v] <= 1 {
                vertex_alive[v] = false;
                changed = true;
                for &g in &at_vertex[v] {
                    group_degree[g] -= 1;
                }
            }
        }
        for (g, group) in groups.iter().enumerate() {
            if group_alive[g] && group_degree[g] <= 1 {
                group_alive[g] = false;
                changed = true;
                for &v in &group.violated {
                    vertex_degree[v] -= 1;
                }
            }
        }
    }

    let core_vertices: Vec<usize> = (0..vertices).filter(|&v| vertex_alive[v]).collect();
    let mut seen = vec![false; vertices];
    let factors: Vec<Poly> = core_vertices
        .iter()
        .map(|&v| {
            seen[v] = true;
            let mut q = monomial(pendant[v]);
            for &g in &at_vertex[v] {
                if !group_alive[g] {
                    q = convolve(&q, &group_density(v, g, pendant, groups, &at_vertex, &mut seen));
                }
            }
            q
        })
        .collect();
    let position = |v: usize| core_vertices.binary_search(&v).expect("core vertex");
    let core_groups: Vec<(usize, Vec<usize>)> = (0..groups.len())
        .filter(|&g| group_alive[g])
        .map(|g| {
            let members = groups[g]
                .violated
                .iter()
                .filter(|&&v| vertex_alive[v])
                .map(|&v| position(v))
                .collect();
            (groups[g].multiplicity, members)
        })
        .collect();

    let key = cache.and_then(|_| canonical_core(&factors, &core_groups));
    if let (Some(cache), Some(key)) = (cache, &key) {
        if let Some(hit) = cache.map.lock().expect("cache lock").get(key) {
            return Ok(hit.clone());
        }
    }
    let value = core_integral(&factors, &core_groups, dimension_cap)?;
    if let (Some(cache), Some(key)) = (cache, key) {
        cache.map.lock().expect("cache lock").insert(key, value.clone());
    }
    Ok(value)
}

// ∫_{σ >= 0, s_v <= 1} Π_v q_v(1 - s_v) Π_g σ_g^{p_g - 1}/(p_g - 1)!
fn core_integral(factors: &[Poly], core_groups: &[(usize, Vec<usize>)], dimension_cap: usize) -> Result<Rational> {
    let dim = core_groups.len();
    let mut poly = HPolytope::new(dim);
    let unit = |i: usize| -> Vec<Rational> {
        (0..dim)
            .map(|j| if i == j { Rational::ONE } else { Rational::ZERO })
            .collect()
    };
    for i in 0..dim {
        poly.add_ge(unit(i), Rational::ZERO)?;
    }
    let mut forms = Vec::new();
    for (v, q) in factors.iter().enumerate() {
        let row: Vec<Rational> = core_groups
            .iter()
            .map(|(_, members)| {
                if members.contains(&v) {
                    Rational::ONE
                } else {
                    Rational::ZERO
                }
            })
            .collect();
        poly.add_le(row.clone(), Rational::ONE)?;
        let linear = row.into_iter().map(|x| -x).collect();
        forms.push((AffineForm::new(Rational::ONE, linear), q.clone()));
    }
    for (i, (multiplicity, _)) in core_groups.iter().enumerate() {
        if *multiplicity > 1 {
            forms.push((AffineForm::new(Rational::ZERO, unit(i)), monomial(multiplicity - 1)));
        }
    }
    integrate_polynomials_with_cap(&poly, &forms, dimension_cap)
}

// a group as (multiplicity, member colours or indices)
type Incidence = (usize, Vec<usize>);

/// Most relabelings tried when canonicalizing a core.
const MAX_RELABELINGS: usize = 5040;

// Colour refinement, then the lexicographically least key over the
// relabelings that respect the final colour classes.
fn canonical_core(factors: &[Poly], core_groups: &[(usize, Vec<usize>)]) -> Option<CoreKey> {
    let n = factors.len();
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, (_, members)) in core_groups.iter().enumerate() {
        for &v in members {
            at[v].push(g);
        }
    }
    let mut colour: Vec<usize> = rank_by(&factors.iter().collect::<Vec<_>>());
    loop {
        let signatures: Vec<(usize, Vec<Incidence>)> = (0..n)
            .map(|v| {
                let mut around: Vec<Incidence> = at[v]
                    .iter()
                    .map(|&g| {
                        let (p, members) = &core_groups[g];
                        let mut others: Vec<usize> =
                            members.iter().filter(|&&u| u != v).map(|&u| colour[u]).collect();
                        others.sort_unstable();
                        (*p, others)
                    })
                    .collect();
                around.sort();
                (colour[v], around)
            })
            .collect();
        let next = rank_by(&signatures.iter().collect::<Vec<_>>());
        let classes = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&colour) {
            break;
        }
        colour = next;
    }

    let class_count = colour.iter().max().map_or(0, |m| m + 1);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (v, &c) in colour.iter().enumerate() {
        classes[c].push(v);
    }
    let relabelings = classes
        .iter()
        .try_fold(1usize, |acc, c| (1..=c.len()).try_fold(acc, |a, k| a.checked_mul(k)))?;
    if relabelings > MAX_RELABELINGS {
        return None;
    }

    let mut best: Option<CoreKey> = None;
    let mut orders: Vec<Vec<usize>> = classes.clone();
    loop {
        let order: Vec<usize> = orders.iter().flatten().copied().collect();
        let mut label = vec![0usize; n];
        for (i, &v) in order.iter().enumerate() {
            label[v] = i;
        }
        let mut groups: Vec<(usize, Vec<usize>)> = core_groups
            .iter()
            .map(|(p, members)| {
                let mut m: Vec<usize> = members.iter().map(|&v| label[v]).collect();
                m.sort_unstable();
                (*p, m)
            })
            .collect();
        groups.sort();
        let key = CoreKey {
            factors: order.iter().map(|&v| factors[v].clone()).collect(),
            groups,
        };
        if best.as_ref().is_none_or(|b| key.groups < b.groups) {
            best = Some(key);
        }
        if !next_orders(&mut orders) {
            break;
        }
    }
    best
}

// Dense ranks of the items under their natural order.
fn rank_by<T: Ord>(items: &[&T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = items.to_vec();
    sorted.sort();
    sorted.dedup();
    items
        .iter()
        .map(|x| sorted.binary_search(x).expect("present"))
        .collect()
}

// Advances the product of per-class permutations; false after the last one.
fn next_orders(orders: &mut [Vec<usize>]) -> bool {
    for class in orders.iter_mut() {
        if next_permutation(class) {
            return true;
        }
    }
    false
}

fn next_permutation(items: &mut [usize]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        items.sort_unstable();
        return false;
    }
    let mut j = n - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

// Density of a group's variable seen from `v`, with the subtrees behind the
// group's other vertices integrated out.
fn group_density(
    v: usize,
    g: usize,
    pendant: &[usize],
    groups: &[Group],
    at_vertex: &[Vec<usize>],
    seen: &mut [bool],
) -> Poly {
    let mut density = monomial(groups[g].multiplicity - 1);
    for &child in &groups[g].violated {
        if child != v {
            let sub = vertex_poly(child, Some(g), pendant, groups, at_vertex, seen);
            density = multiply(&density, &reflect(&sub));
        }
    }
    density
}

/// Violation volume `c^deg / deg!` of one vertex whose edges are all private.
pub fn single_vertex_integral(degree: usize, box_side: &Rational) -> Rational {
    let c = integer(degree as i64) * box_side - Rational::ONE;
    if c <= Rational::ZERO {
        return Rational::ZERO;
    }
    pow(&c, degree) / factorial_rational(degree)
}
