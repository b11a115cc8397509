//! Truncated expansion of `log Ξ` and the final volume.
//!
//! Clusters are not listed one by one. With `z` marking polymer size, the
//! clusters with `‖Γ‖ <= m` contribute exactly `[z^{<=m}] log Ξ_A(z)`, and by
//! Möbius inversion over cluster supports this equals
//! `Σ_C κ(C) log Ξ_C(z)` over Flat-connected `C ⊆ A` with `|C| <= m`, where
//! `κ(C) = Σ_{s <= m-|C|} (-1)^s binom(|N(C)|, s)`. `Ξ_C(z)` comes from the
//! recursion on the least vertex of `C`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex, VertexSet};
use crate::integral::{CoreCache, Route};
use crate::polymer::{
    active_vertices, box_side, graph_bound_applies, graph_bound_holds, mcs_bound_applies,
    mcs_bound_holds, phi, polymer_weight, Mode, PolymerWeight,
};
use crate::rational::{abs, fraction_string, integer, is_negative, ln, pow, to_f64, to_float, Float, Rational};

use super::plan::ExpansionPlan;
use super::series::Series;

/// Hard cap on the number of connected supports the engine will hold.
pub const MAX_SUPPORTS: usize = 2_000_000;

/// Active vertices, connected supports of size at most `m`, and the exact
/// weights of the polymers among them.
pub struct PolymerModel<'a> {
    graph: &'a Hypergraph,
    plan: ExpansionPlan,
    active: VertexSet,
    supports: Vec<VertexSet>,
    polymer_order: Vec<VertexSet>,
    weights: HashMap<VertexSet, PolymerWeight>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RouteCounts {
    pub tree: usize,
    pub kernel: usize,
    pub full: usize,
}

impl<'a> PolymerModel<'a> {
    pub fn build(h: &'a Hypergraph, plan: &ExpansionPlan) -> Result<Self> {
        if plan.mode == Mode::Graph && h.max_edge_size() > 2 {
            return Err(Error::Argument("graph mode needs hyperedges of size at most 2".into()));
        }
        let active = active_vertices(h, &plan.delta);
        let max_size = plan.truncation_depth.min(active.len());
        let supports = if max_size == 0 {
            Vec::new()
        } else {
            enumerate_supports(h, &active, max_size)?
        };
        let polymer_order: Vec<VertexSet> = supports
            .iter()
            .filter(|s| plan.mode == Mode::Graph || phi(h, s) == **s)
            .cloned()
            .collect();
        let cache = CoreCache::default();
        let results: Vec<Result<PolymerWeight>> = polymer_order
            .par_iter()
            .map(|s| {
                let w = polymer_weight(h, s, plan.mode, &plan.delta, plan.dimension_cap, &cache)?;
                check_weight(h, plan, s, &w.value)?;
                Ok(w)
            })
            .collect();
        let mut weights = HashMap::with_capacity(polymer_order.len());
        for (s, w) in polymer_order.iter().zip(results) {
            weights.insert(s.clone(), w?);
        }
        Ok(Self {
            graph: h,
            plan: plan.clone(),
            active,
            supports,
            polymer_order,
            weights,
        })
    }

    pub fn graph(&self) -> &'a Hypergraph {
        self.graph
    }

    pub fn plan(&self) -> &ExpansionPlan {
        &self.plan
    }

    pub fn mode(&self) -> Mode {
        self.plan.mode
    }

    /// The truncation depth `m`.
    pub fn depth(&self) -> usize {
        self.plan.truncation_depth
    }

    pub fn active(&self) -> &VertexSet {
        &self.active
    }

    /// Flat-connected subsets of the active set with at most `m` vertices,
    /// ordered by size, then lexicographically.
    pub fn supports(&self) -> &[VertexSet] {
        &self.supports
    }

    /// Polymers in the same canonical order, with their weights.
    pub fn polymers(&self) -> impl Iterator<Item = (&VertexSet, &PolymerWeight)> + '_ {
        self.polymer_order.iter().map(move |s| (s, &self.weights[s]))
    }

    pub fn polymer_count(&self) -> usize {
        self.polymer_order.len()
    }

    pub fn weight(&self, support: &VertexSet) -> Option<&Rational> {
        self.weights.get(support).map(|w| &w.value)
    }

    pub fn route_counts(&self) -> RouteCounts {
        let mut counts = RouteCounts::default();
        for w in self.weights.values() {
            match w.route {
                Route::Tree => counts.tree += 1,
                Route::Kernel => counts.kernel += 1,
                Route::Full => counts.full += 1,
            }
        }
        counts
    }

    // Ξ_S(z) for an arbitrary subset, as a product over Flat components.
    fn xi_of_set(&self, set: &VertexSet, memo: &HashMap<VertexSet, Series>) -> Series {
        let mut out = Series::one(self.depth());
        for component in self.graph.flat_components(set) {
            out = out.mul(&memo[&component]);
        }
        out
    }

    // Ξ_C = Ξ_{C∖u} + Σ_{γ∋u, γ⊆C} w(γ) z^{|γ|} Ξ_{C∖N⁺(γ)} with u = min C.
    fn local_xi(&self, c: &VertexSet, memo: &HashMap<VertexSet, Series>) -> Series {
        let h = self.graph;
        let u = c.min().expect("supports are nonempty");
        let mut out = self.xi_of_set(&c.without(u), memo);
        let sets = h
            .connected_supersets(u, c.len(), c)
            .expect("root lies in its own support");
        for gamma in sets {
            if let Some(w) = self.weights.get(&gamma) {
                let closed = gamma.union(&h.flat_boundary(&gamma));
                let rest = self.xi_of_set(&c.difference(&closed), memo);
                out.add_shifted(&w.value, gamma.len(), &rest);
            }
        }
        out
    }

    /// `Ξ_C(z)` for every support, truncated at degree `m`.
    pub fn local_partition_functions(&self) -> HashMap<VertexSet, Series> {
        let mut memo: HashMap<VertexSet, Series> = HashMap::with_capacity(self.supports.len());
        let mut start = 0;
        while start < self.supports.len() {
            let size = self.supports[start].len();
            let end = start
                + self.supports[start..]
                    .iter()
                    .take_while(|s| s.len() == size)
                    .count();
            let layer: Vec<Series> = self.supports[start..end]
                .par_iter()
                .map(|c| self.local_xi(c, &memo))
                .collect();
            for (c, s) in self.supports[start..end].iter().zip(layer) {
                memo.insert(c.clone(), s);
            }
            start = end;
        }
        memo
    }
}

fn enumerate_supports(h: &Hypergraph, active: &VertexSet, max_size: usize) -> Result<Vec<VertexSet>> {
    let count = AtomicUsize::new(0);
    let roots: Vec<Vertex> = active.iter().collect();
    let per_root: Vec<Result<Vec<VertexSet>>> = roots
        .par_iter()
        .map(|&root| {
            let allowed: VertexSet = active.iter().filter(|&v| v >= root).collect();
            let mut out = Vec::new();
            for s in h.connected_supersets(root, max_size, &allowed)? {
                if count.fetch_add(1, Ordering::Relaxed) >= MAX_SUPPORTS {
                    return Err(Error::Resource(format!(
                        "more than {MAX_SUPPORTS} connected supports of size <= {max_size}; \
                         lower the cluster size or raise rho"
                    )));
                }
                out.push(s);
            }
            Ok(out)
        })
        .collect();
    let mut supports = Vec::new();
    for r in per_root {
        supports.extend(r?);
    }
    supports.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(supports)
}

fn check_weight(h: &Hypergraph, plan: &ExpansionPlan, s: &VertexSet, w: &Rational) -> Result<()> {
    let negative_expected = s.len() % 2 == 1;
    if *w != Rational::ZERO && is_negative(w) != negative_expected {
        return Err(Error::Invariant(format!(
            "polymer {s}: weight {} has the wrong sign",
            fraction_string(w)
        )));
    }
    match plan.mode {
        Mode::Graph => {
            if graph_bound_applies(h, &plan.delta) && !graph_bound_holds(w, &plan.delta, s.len()) {
                return Err(Error::Invariant(format!(
                    "polymer {s}: |w| = {} exceeds (e delta)^{}",
                    fraction_string(&abs(w)),
                    s.len()
                )));
            }
        }
        Mode::Mcs => {
            let edges = h.incident_edges_unchecked(s).len();
            if edges < s.len() {
                return Err(Error::Invariant(format!(
                    "polymer {s}: |E(T)| = {edges} is smaller than |T|"
                )));
            }
            if mcs_bound_applies(h, &plan.delta) && !mcs_bound_holds(h, w, &plan.delta, s.len()) {
                return Err(Error::Invariant(format!(
                    "polymer {s}: |u| = {} exceeds the MCS weight bound",
                    fraction_string(&abs(w))
                )));
            }
        }
    }
    Ok(())
}

/// `Σ_{s=0}^{r} (-1)^s binom(n, s)`, which is `(-1)^r binom(n-1, r)` for `n >= 1`.
fn support_multiplicity(n: usize, r: usize) -> Rational {
    if n == 0 {
        return Rational::ONE;
    }
    if r >= n {
        return Rational::ZERO;
    }
    let mut binom = Rational::ONE;
    for i in 0..r {
        binom = binom * integer((n - 1 - i) as i64) / integer((i + 1) as i64);
    }
    if r % 2 == 1 {
        -binom
    } else {
        binom
    }
}

/// Output of [`log_xi_truncated`].
#[derive(Clone, Debug)]
pub struct TruncatedExpansion {
    /// `Σ_{‖Γ‖ <= m} Φ(Γ) Π w(γ_i)`.
    pub value: Rational,
    /// The same sum split by `‖Γ‖`; entry 0 is always zero.
    pub by_size: Series,
    pub support_count: usize,
    pub polymer_count: usize,
    /// Largest `‖Γ‖` with a nonzero total contribution.
    pub max_cluster_size: usize,
    pub tail_bound: f64,
}

pub fn log_xi_truncated(model: &PolymerModel<'_>) -> Result<TruncatedExpansion> {
    let h = model.graph();
    let m = model.depth();
    let memo = model.local_partition_functions();
    let contributions: Vec<Option<Series>> = model
        .supports()
        .par_iter()
        .map(|c| {
            let outside = h
                .flat_boundary(c)
                .iter()
                .filter(|&v| model.active().contains(v))
                .count();
            let k = support_multiplicity(outside, m - c.len());
            if k == Rational::ZERO {
                return None;
            }
            let mut scaled = Series::zero(m);
            scaled.add_shifted(&k, 0, &memo[c].log());
            Some(scaled)
        })
        .collect();
    let mut by_size = Series::zero(m);
    for s in contributions.into_iter().flatten() {
        by_size.add_assign(&s);
    }
    let max_cluster_size = (1..=m)
        .rev()
        .find(|&j| *by_size.coefficient(j) != Rational::ZERO)
        .unwrap_or(0);
    Ok(TruncatedExpansion {
        value: by_size.positive_part_at_one(),
        by_size,
        support_count: model.supports().len(),
        polymer_count: model.polymer_count(),
        max_cluster_size,
        tail_bound: model.plan().tail_bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub active_count: usize,
    pub support_count: usize,
    pub polymer_count: usize,
    pub routes: RouteCounts,
    pub max_cluster_size: usize,
    pub truncation_depth: usize,
    pub tail_bound: f64,
    pub guarantee: bool,
    pub warnings: Vec<String>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug)]
pub struct VolumeApproximation {
    /// `|E| ln b + log Ξ_m`.
    pub log_volume: Float,
    pub volume: Float,
    pub log_xi: Rational,
    /// Set when the result is exact (no active vertices, so `Ξ = 1`).
    pub exact_volume: Option<Rational>,
    pub diagnostics: Diagnostics,
}

pub fn approximate_volume(h: &Hypergraph, plan: &ExpansionPlan) -> Result<VolumeApproximation> {
    let started = Instant::now();
    let model = PolymerModel::build(h, plan)?;
    let expansion = log_xi_truncated(&model)?;
    let b = box_side(h, &plan.delta);
    let edges = h.num_edges();
    let log_volume = ln(&b) * Float::from(edges as u64) + to_float(&expansion.value);
    let volume = log_volume.exp();
    let exact_volume = model.active().is_empty().then(|| pow(&b, edges));
    let diagnostics = Diagnostics {
        active_count: model.active().len(),
        support_count: expansion.support_count,
        polymer_count: expansion.polymer_count,
        routes: model.route_counts(),
        max_cluster_size: expansion.max_cluster_size,
        truncation_depth: plan.truncation_depth,
        tail_bound: expansion.tail_bound,
        guarantee: plan.guarantee,
        warnings: plan.warnings.clone(),
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    Ok(VolumeApproximation {
        log_volume,
        volume,
        log_xi: expansion.value,
        exact_volume,
        diagnostics,
    })
}

/// Empirical KP partial sums: for each active `v`,
/// `Σ_{γ: dist(γ, v) <= 1} |w(γ)| e^{(1+ρ)|γ|}` over the model's polymers.
pub fn kp_partial_sums(model: &PolymerModel<'_>) -> Vec<(Vertex, f64)> {
    let h = model.graph();
    let rate = 1.0 + to_f64(&model.plan().rho);
    let mut sums: HashMap<Vertex, f64> = model.active().iter().map(|v| (v, 0.0)).collect();
    for (gamma, w) in model.polymers() {
        let term = to_f64(&abs(&w.value)) * (rate * gamma.len() as f64).exp();
        for v in gamma.union(&h.flat_boundary(gamma)).iter() {
            if let Some(s) = sums.get_mut(&v) {
                *s += term;
            }
        }
    }
    let mut out: Vec<(Vertex, f64)> = sums.into_iter().collect();
    out.sort_by_key(|&(v, _)| v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::cluster::cluster_sum;
    use crate::expansion::plan::{validate_plan, PlanOptions};
    use crate::polymer::Polymer;
    use crate::rational::ratio;

    fn cycle(n: u32) -> Hypergraph {
        Hypergraph::from_edges((0..n).map(|i| vec![i, (i + 1) % n]).collect()).unwrap()
    }

    fn plan(h: &Hypergraph, delta: Rational, m: Option<usize>) -> ExpansionPlan {
        let options = PlanOptions {
            max_cluster_size: m,
            ..PlanOptions::default()
        };
        validate_plan(h, &delta, 0.01, &options).unwrap()
    }

    #[test]
    fn support_multiplicity_matches_alternating_sum() {
        for n in 0..7usize {
            for r in 0..9usize {
                let mut direct = 0i64;
                let mut binom = 1i64;
                for s in 0..=r.min(n) {
                    if s > 0 {
                        binom = binom * (n - s + 1) as i64 / s as i64;
                    }
                    direct += if s % 2 == 0 { binom } else { -binom };
                }
                assert_eq!(support_multiplicity(n, r), integer(direct), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn support_route_equals_explicit_clusters() {
        for (h, m) in [(cycle(4), 4), (cycle(5), 3), (cycle(3), 5)] {
            let p = plan(&h, ratio(1, 250), Some(m));
            let model = PolymerModel::build(&h, &p).unwrap();
            let fast = log_xi_truncated(&model).unwrap();
            assert_eq!(fast.value, cluster_sum(&model));
        }
    }

    #[test]
    fn c4_cluster_count_at_depth_two() {
        let h = cycle(4);
        let p = plan(&h, ratio(1, 250), Some(2));
        let model = PolymerModel::build(&h, &p).unwrap();
        assert_eq!(super::super::cluster::enumerate_clusters(&model).len(), 16);
    }

    #[test]
    fn depth_one_keeps_single_vertex_polymers() {
        let h = cycle(4);
        let p = plan(&h, ratio(1, 250), Some(1));
        let model = PolymerModel::build(&h, &p).unwrap();
        let clusters = super::super::cluster::enumerate_clusters(&model);
        assert_eq!(clusters.len(), 4);
        assert!(clusters.iter().all(|c| c.len() == 1 && c.total_size() == 1));
        let expansion = log_xi_truncated(&model).unwrap();
        let single = model.weight(&VertexSet::singleton(0)).unwrap().clone();
        assert_eq!(expansion.value, single * integer(4));
    }

    #[test]
    fn single_active_vertex_reproduces_mercator_series() {
        // star: only the centre is active
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![0, 2]]).unwrap();
        let p = plan(&h, ratio(1, 250), Some(8));
        let model = PolymerModel::build(&h, &p).unwrap();
        assert_eq!(model.active().len(), 1);
        let w = model.weight(&VertexSet::singleton(0)).unwrap().clone();
        let expansion = log_xi_truncated(&model).unwrap();
        let mut mercator = Rational::ZERO;
        for j in 1..=8usize {
            let term = pow(&w, j) / integer(j as i64);
            mercator = if j % 2 == 1 { mercator + term } else { mercator - term };
        }
        assert_eq!(expansion.value, mercator);
        let exact = ln(&(Rational::ONE + &w));
        let err = (exact - to_float(&expansion.value)).to_f64().value().abs();
        let wf = to_f64(&w).abs();
        assert!(err <= wf.powi(9) / (1.0 - wf), "{err}");
    }

    #[test]
    fn polymers_in_model_are_valid() {
        let h = Hypergraph::from_edges(vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 0]]).unwrap();
        let options = PlanOptions {
            max_cluster_size: Some(4),
            ..PlanOptions::default()
        };
        let delta = ratio(1, 1000);
        let p = validate_plan(&h, &delta, 0.01, &options).unwrap();
        let model = PolymerModel::build(&h, &p).unwrap();
        for (s, _) in model.polymers() {
            Polymer::new(&h, s.clone(), Mode::Mcs, &delta).unwrap();
        }
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let h = cycle(7);
        let p = plan(&h, ratio(1, 250), None);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| log_xi_truncated(&PolymerModel::build(&h, &p).unwrap()).unwrap().value)
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn kp_partial_sums_are_below_one_when_admissible() {
        let h = cycle(6);
        let p = plan(&h, ratio(1, 250), None);
        let model = PolymerModel::build(&h, &p).unwrap();
        for (_, s) in kp_partial_sums(&model) {
            assert!(s <= 1.0, "{s}");
        }
    }
}
