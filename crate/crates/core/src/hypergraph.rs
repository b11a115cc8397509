//! Hypergraphs, their flattened graph, and connected vertex-set enumeration.

use std::fmt;

use crate::error::{Error, Result};

pub type Vertex = u32;
pub type EdgeId = usize;

/// A sorted, duplicate-free set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(v: Vertex) -> Self {
        Self(vec![v])
    }

    pub fn from_unsorted(mut vertices: Vec<Vertex>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self(vertices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn min(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn with(&self, v: Vertex) -> Self {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    pub fn without(&self, v: Vertex) -> Self {
        Self(self.0.iter().copied().filter(|&u| u != v).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> Self {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Self::from_unsorted(all)
    }

    pub fn difference(&self, other: &VertexSet) -> Self {
        Self(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.0.iter().any(|&v| other.contains(v))
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Vertex/hyperedge incidence structure. Parallel hyperedges are kept as
/// distinct edge ids; `max_degree` and `max_edge_size` are always derived
/// from the data.
#[derive(Clone, Debug)]
pub struct Hypergraph {
    edges: Vec<Vec<Vertex>>,
    incidence: Vec<Vec<EdgeId>>,
    flat: Vec<Vec<Vertex>>,
    max_degree: usize,
    max_edge_size: usize,
}

impl Hypergraph {
    /// Builds a hypergraph on vertices `0..num_vertices`.
    pub fn new(num_vertices: usize, edges: Vec<Vec<Vertex>>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (id, edge) in edges.into_iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::Argument(format!("hyperedge {id} is empty")));
            }
            let mut sorted = edge.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Argument(format!(
                    "hyperedge {id} repeats a vertex: {edge:?}"
                )));
            }
            if let Some(&bad) = sorted.iter().find(|&&v| v as usize >= num_vertices) {
                return Err(Error::Argument(format!(
                    "hyperedge {id} names vertex {bad} but there are only {num_vertices} vertices"
                )));
            }
            normalized.push(sorted);
        }

        let mut incidence = vec![Vec::new(); num_vertices];
        let mut flat = vec![Vec::new(); num_vertices];
        for (id, edge) in normalized.iter().enumerate() {
            for &v in edge {
                incidence[v as usize].push(id);
                flat[v as usize].extend(edge.iter().copied().filter(|&u| u != v));
            }
        }
        for nbrs in &mut flat {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let max_degree = incidence.iter().map(Vec::len).max().unwrap_or(0);
        let max_edge_size = normalized.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            edges: normalized,
            incidence,
            flat,
            max_degree,
            max_edge_size,
        })
    }

    /// Vertex count is `1 + max id`.
    pub fn from_edges(edges: Vec<Vec<Vertex>>) -> Result<Self> {
        let n = edges
            .iter()
            .flat_map(|e| e.iter())
            .map(|&v| v as usize + 1)
            .max()
            .unwrap_or(0);
        Self::new(n, edges)
    }

    /// Parses the instance text format: one hyperedge per non-comment line,
    /// whitespace-separated vertex ids, `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut edge = Vec::new();
            for token in line.split_whitespace() {
                let v: Vertex = token.parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad vertex id `{token}`", lineno + 1))
                })?;
                if edge.contains(&v) {
                    return Err(Error::Parse(format!(
                        "line {}: vertex {v} repeated within a hyperedge",
                        lineno + 1
                    )));
                }
                edge.push(v);
            }
            edges.push(edge);
        }
        if edges.is_empty() {
            return Err(Error::Parse("instance has no hyperedges".into()));
        }
        Self::from_edges(edges).map_err(|e| match e {
            Error::Argument(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.incidence.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Maximum vertex degree (Δ).
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Maximum hyperedge size (k).
    pub fn max_edge_size(&self) -> usize {
        self.max_edge_size
    }

    pub fn edge(&self, id: EdgeId) -> &[Vertex] {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incidence[v as usize].len()
    }

    /// Edge ids containing `v`, ascending.
    pub fn edges_at(&self, v: Vertex) -> &[EdgeId] {
        &self.incidence[v as usize]
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet((0..self.num_vertices() as Vertex).collect())
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if (v as usize) < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "vertex {v} out of range (n = {})",
                self.num_vertices()
            )))
        }
    }

    fn check_set(&self, set: &VertexSet) -> Result<()> {
        set.iter().try_for_each(|v| self.check_vertex(v))
    }

    /// Neighbours of `v` in Flat(H), as a slice (no validation).
    pub fn flat_adjacency(&self, v: Vertex) -> &[Vertex] {
        &self.flat[v as usize]
    }

    pub fn flat_neighbors(&self, v: Vertex) -> Result<VertexSet> {
        self.check_vertex(v)?;
        Ok(VertexSet(self.flat[v as usize].clone()))
    }

    pub fn flat_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.flat[u as usize].binary_search(&v).is_ok()
    }

    /// E(S): ids of hyperedges meeting `set`, ascending.
    pub fn incident_edges(&self, set: &VertexSet) -> Result<Vec<EdgeId>> {
        self.check_set(set)?;
        Ok(self.incident_edges_unchecked(set))
    }

    pub(crate) fn incident_edges_unchecked(&self, set: &VertexSet) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = set
            .iter()
            .flat_map(|v| self.incidence[v as usize].iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Vertices outside `set` that are Flat-adjacent to it.
    pub fn flat_boundary(&self, set: &VertexSet) -> VertexSet {
        set.iter()
            .flat_map(|v| self.flat[v as usize].iter().copied())
            .filter(|&u| !set.contains(u))
            .collect()
    }

    /// Connected components of Flat(H)[set], each sorted, ordered by minimum.
    pub fn flat_components(&self, set: &VertexSet) -> Vec<VertexSet> {
        let mut seen = vec![false; set.len()];
        let index = |v: Vertex| set.as_slice().binary_search(&v).ok();
        let mut components = Vec::new();
        for start in 0..set.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![set.as_slice()[start]];
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for &u in &self.flat[v as usize] {
                    if let Some(i) = index(u) {
                        if !seen[i] {
                            seen[i] = true;
                            stack.push(u);
                        }
                    }
                }
            }
            components.push(VertexSet::from_unsorted(members));
        }
        components
    }

    /// True iff Flat(H)[set] is nonempty and connected.
    pub fn is_connected_in_flat(&self, set: &VertexSet) -> bool {
        !set.is_empty() && self.flat_components(set).len() == 1
    }

    /// Flat-distance between two vertex sets is at most one (overlap or
    /// adjacency).
    pub fn within_distance_one(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.iter().any(|v| {
            b.contains(v) || self.flat[v as usize].iter().any(|&u| b.contains(u))
        })
    }

    /// Streams every Flat-connected `S` with `root ∈ S ⊆ restrict_to` and
    /// `|S| <= max_size`, each exactly once.
    pub fn connected_supersets<'a>(
        &'a self,
        root: Vertex,
        max_size: usize,
        restrict_to: &'a VertexSet,
    ) -> Result<ConnectedSets<'a>> {
        self.check_vertex(root)?;
        if !restrict_to.contains(root) {
            return Err(Error::Argument(format!(
                "root {root} is not in the restriction set"
            )));
        }
        if max_size == 0 {
            return Err(Error::Argument("max_size must be at least 1".into()));
        }
        Ok(ConnectedSets::new(self, root, max_size, restrict_to))
    }

    /// Max degree of Flat(H)[set].
    pub fn flat_degree_within(&self, set: &VertexSet) -> usize {
        set.iter()
            .map(|v| {
                self.flat[v as usize]
                    .iter()
                    .filter(|&&u| set.contains(u))
                    .count()
            })
            .max()
            .unwrap_or(0)
    }
}

struct Frame {
    members: Vec<Vertex>,
    extension: Vec<Vertex>,
    next: usize,
}

/// Rooted enumeration of connected sets (the ESU scheme): a candidate joins
/// the extension list only through its first discoverer, and once branched on
/// it is dropped from later siblings, so every set appears exactly once.
pub struct ConnectedSets<'a> {
    graph: &'a Hypergraph,
    restrict_to: &'a VertexSet,
    max_size: usize,
    stack: Vec<Frame>,
    pending: Option<VertexSet>,
}

impl<'a> ConnectedSets<'a> {
    fn new(
        graph: &'a Hypergraph,
        root: Vertex,
        max_size: usize,
        restrict_to: &'a VertexSet,
    ) -> Self {
        let extension: Vec<Vertex> = graph.flat[root as usize]
            .iter()
            .copied()
            .filter(|&u| restrict_to.contains(u))
            .collect();
        Self {
            graph,
            restrict_to,
            max_size,
            stack: vec![Frame {
                members: vec![root],
                extension,
                next: 0,
            }],
            pending: Some(VertexSet::singleton(root)),
        }
    }
}

impl Iterator for ConnectedSets<'_> {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        if let Some(out) = self.pending.take() {
            return Some(out);
        }
        loop {
            let frame = self.stack.last_mut()?;
            if frame.members.len() >= self.max_size || frame.next >= frame.extension.len() {
                self.stack.pop();
                continue;
            }
            let w = frame.extension[frame.next];
            frame.next += 1;

            let members = &frame.members;
            let mut extension: Vec<Vertex> = frame.extension[frame.next..].to_vec();
            for &u in &self.graph.flat[w as usize] {
                if !self.restrict_to.contains(u) || members.contains(&u) || extension.contains(&u) {
                    continue;
                }
                // exclusive neighbourhood: u must not already touch the set
                let touches = members.iter().any(|&m| m == u || self.graph.flat_adjacent(m, u));
                if !touches {
                    extension.push(u);
                }
            }
            let mut grown = members.clone();
            grown.push(w);
            let out = VertexSet::from_unsorted(grown.clone());
            self.stack.push(Frame {
                members: grown,
                extension,
                next: 0,
            });
            return Some(out);
        }
    }
}
