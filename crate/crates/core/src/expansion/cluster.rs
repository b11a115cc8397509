//! Explicit clusters and Ursell functions.

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, VertexSet};
use crate::polymer::Polymer;
use crate::rational::{factorial_rational, Rational};

use super::engine::PolymerModel;

/// Polymers at Flat-distance at most one (overlap or adjacency) are
/// incompatible; every polymer is incompatible with itself.
pub fn incompatible(h: &Hypergraph, a: &VertexSet, b: &VertexSet) -> bool {
    h.within_distance_one(a, b)
}

/// A multiset of polymers with connected incompatibility graph, stored in
/// canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    polymers: Vec<Polymer>,
    adjacency: Vec<Vec<bool>>,
}

impl Cluster {
    pub fn new(h: &Hypergraph, mut polymers: Vec<Polymer>) -> Result<Self> {
        if polymers.is_empty() {
            return Err(Error::Argument("a cluster needs at least one polymer".into()));
        }
        polymers.sort();
        let t = polymers.len();
        let adjacency: Vec<Vec<bool>> = (0..t)
            .map(|i| {
                (0..t)
                    .map(|j| i != j && incompatible(h, polymers[i].support(), polymers[j].support()))
                    .collect()
            })
            .collect();
        let cluster = Self {
            polymers,
            adjacency,
        };
        if !cluster.is_connected() {
            return Err(Error::Argument("incompatibility graph is disconnected".into()));
        }
        Ok(cluster)
    }

    /// From an explicit incompatibility graph; used where the polymers are
    /// abstract.
    pub fn from_adjacency(polymers: Vec<Polymer>, adjacency: Vec<Vec<bool>>) -> Result<Self> {
        let t = adjacency.len();
        if t == 0 || polymers.len() != t || adjacency.iter().any(|row| row.len() != t) {
            return Err(Error::Argument("malformed incompatibility graph".into()));
        }
        let cluster = Self {
            polymers,
            adjacency,
        };
        if !cluster.is_connected() {
            return Err(Error::Argument("incompatibility graph is disconnected".into()));
        }
        Ok(cluster)
    }

    fn is_connected(&self) -> bool {
        let t = self.adjacency.len();
        let mut seen = vec![false; t];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, &adjacent) in self.adjacency[i].iter().enumerate() {
                if adjacent && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn polymers(&self) -> &[Polymer] {
        &self.polymers
    }

    pub fn len(&self) -> usize {
        self.polymers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polymers.is_empty()
    }

    /// `‖Γ‖ = Σ |γ_i|`.
    pub fn total_size(&self) -> usize {
        self.polymers.iter().map(Polymer::size).sum()
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    /// `Σ_{A} (-1)^{|A|}` over spanning connected edge sets of `H(Γ)`.
    pub fn connected_signed_count(&self) -> Rational {
        connected_signed_count(&self.adjacency)
    }

    /// Contribution factor of this multiset to `log Ξ` before the weight
    /// product: the Ursell value times the number of orderings,
    /// `Σ_A (-1)^{|A|} / Π m_i!`.
    pub fn multiset_coefficient(&self) -> Rational {
        let mut denominator = Rational::ONE;
        let mut run = 1;
        for i in 1..=self.polymers.len() {
            if i < self.polymers.len() && self.polymers[i] == self.polymers[i - 1] {
                run += 1;
            } else {
                denominator *= factorial_rational(run);
                run = 1;
            }
        }
        self.connected_signed_count() / denominator
    }
}

/// `Φ(Γ) = (1/t!) Σ_{A ⊆ E(H(Γ)) spanning connected} (-1)^{|A|}`.
pub fn ursell(cluster: &Cluster) -> Rational {
    cluster.connected_signed_count() / factorial_rational(cluster.len())
}

// f(S) = g(S) - Σ_{R ⊊ S, min S ∈ R} f(R) g(S \ R), where
// g(S) = Σ_{A ⊆ E(S)} (-1)^{|A|} = [E(S) = ∅].
fn connected_signed_count(adjacency: &[Vec<bool>]) -> Rational {
    let t = adjacency.len();
    assert!(t <= 20, "cluster too long for subset recursion");
    let full = (1usize << t) - 1;
    let edgeless: Vec<bool> = (0..=full)
        .map(|s| {
            (0..t).all(|i| {
                s >> i & 1 == 0 || (i + 1..t).all(|j| s >> j & 1 == 0 || !adjacency[i][j])
            })
        })
        .collect();
    let g = |s: usize| if edgeless[s] { 1i64 } else { 0 };
    let mut f = vec![0i64; full + 1];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let mut acc = g(s);
        let rest = s & !low;
        // R = low ∪ sub for every proper sub ⊊ rest
        let mut sub = rest;
        loop {
            if sub != rest {
                let r = low | sub;
                acc -= f[r] * g(s & !r);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        f[s] = acc;
    }
    Rational::from(f[full])
}

/// Every cluster with total size at most the plan's depth, one per multiset,
/// grouped by the union of supports. Intended for small instances.
pub fn enumerate_clusters(model: &PolymerModel) -> Vec<Cluster> {
    let h = model.graph();
    let m = model.depth();
    let mut out = Vec::new();
    for support in model.supports() {
        let inside: Vec<Polymer> = model
            .polymers()
            .filter(|(p, _)| p.is_subset(support))
            .map(|(p, _)| Polymer::unchecked(p.clone(), model.mode()))
            .collect();
        let mut chosen = Vec::new();
        collect_multisets(h, support, &inside, 0, m, &mut chosen, &mut out);
    }
    out
}

fn collect_multisets(
    h: &Hypergraph,
    support: &VertexSet,
    pool: &[Polymer],
    start: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Cluster>,
) {
    if !chosen.is_empty() {
        let union = chosen
            .iter()
            .fold(VertexSet::new(), |acc, &i| acc.union(pool[i].support()));
        if union == *support {
            let polymers = chosen.iter().map(|&i| pool[i].clone()).collect();
            if let Ok(cluster) = Cluster::new(h, polymers) {
                out.push(cluster);
            }
        }
    }
    for i in start..pool.len() {
        let size = pool[i].size();
        if size <= budget {
            chosen.push(i);
            collect_multisets(h, support, pool, i, budget - size, chosen, out);
            chosen.pop();
        }
    }
}

/// `Σ_Γ Φ(Γ) Π w(γ_i)` over the explicit enumeration.
pub fn cluster_sum(model: &PolymerModel) -> Rational {
    enumerate_clusters(model)
        .iter()
        .map(|c| {
            let weights = c
                .polymers()
                .iter()
                .fold(Rational::ONE, |acc, p| acc * model.weight(p.support()).expect("polymer weight"));
            c.multiset_coefficient() * weights
        })
        .fold(Rational::ZERO, |acc, x| acc + x)
}
