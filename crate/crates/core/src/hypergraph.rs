//! Weighted hypergraphs with all-or-nothing splitting and the exact cut
//! oracles (cut, volume, conductance, edge expansion, μ) built on it.
//!
//! Nodes are dense indices `0..n` with an index ↔ label map. Every hyperedge
//! is a sorted set of at least two distinct nodes carrying a weight in
//! `(0, 1]`. Values are immutable after construction.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge<S> {
    nodes: Vec<usize>,
    weight: S,
}

impl<S: Scalar> Hyperedge<S> {
    /// Sorted member nodes.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn weight(&self) -> S {
        self.weight
    }

    /// δ(e) = |e|.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

/// Subset of the nodes of one hypergraph (or of one reduced graph).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeSubset {
    members: Vec<bool>,
    count: usize,
}

impl NodeSubset {
    pub fn empty(universe: usize) -> Self {
        Self {
            members: vec![false; universe],
            count: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            members: vec![true; universe],
            count: universe,
        }
    }

    /// Panics if an index is outside the universe.
    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// Bit `i` of `mask` selects node `i`. Only valid for `universe <= 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64, "mask subsets are limited to 64 nodes");
        Self::from_indices(universe, (0..universe).filter(|&i| mask >> i & 1 == 1))
    }

    pub fn insert(&mut self, i: usize) {
        if !self.members[i] {
            self.members[i] = true;
            self.count += 1;
        }
    }

    pub fn remove(&mut self, i: usize) {
        if self.members[i] {
            self.members[i] = false;
            self.count -= 1;
        }
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.members.get(i).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    /// Nonempty and not the whole universe.
    pub fn is_proper(&self) -> bool {
        self.count > 0 && self.count < self.members.len()
    }

    pub fn complement(&self) -> Self {
        Self {
            members: self.members.iter().map(|b| !b).collect(),
            count: self.members.len() - self.count,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// Which nodes the maximum incidence count ν ranges over when forming
/// β = (ε + 1)ν for [`Hypergraph::mu`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NuScope {
    /// ν = max over all nodes of the hypergraph.
    #[default]
    Global,
    /// ν = max over the nodes of the evaluated subset.
    Subset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph<S> {
    labels: Vec<String>,
    edges: Vec<Hyperedge<S>>,
    incidence: Vec<Vec<usize>>,
}

impl<S: Scalar> Hypergraph<S> {
    /// Build from node count and `(members, weight)` pairs. Nodes are
    /// labelled by their index.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (Vec<usize>, S)>) -> Result<Self> {
        let labels = (0..num_nodes).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges)
    }

    /// Strict constructor: rejects anything violating the invariants.
    pub fn with_labels(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = (Vec<usize>, S)>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut incidence = vec![Vec::new(); n];
        let mut stored = Vec::new();
        for (idx, (mut nodes, weight)) in edges.into_iter().enumerate() {
            if !(weight > S::zero() && weight <= S::one()) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} has weight {weight} outside (0, 1]"
                )));
            }
            if let Some(&bad) = nodes.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} references node {bad} but there are {n} nodes"
                )));
            }
            let before = nodes.len();
            nodes.sort_unstable();
            nodes.dedup();
            if nodes.len() != before {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} repeats a member node"
                )));
            }
            if nodes.len() < 2 {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} has fewer than two members"
                )));
            }
            let e = stored.len();
            for &v in &nodes {
                incidence[v].push(e);
            }
            stored.push(Hyperedge { nodes, weight });
        }
        Ok(Self {
            labels,
            edges: stored,
            incidence,
        })
    }

    /// Lenient constructor used at ingestion: singleton edges are dropped
    /// with a warning, zero or negative weights are rejected, and if any
    /// weight exceeds 1 all weights are divided by the global maximum.
    pub fn from_raw_edges(labels: Vec<String>, raw: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let mut kept = Vec::with_capacity(raw.len());
        let mut max_w = 0.0f64;
        for (idx, (nodes, w)) in raw.into_iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} has non-positive weight {w}"
                )));
            }
            let mut uniq = nodes.clone();
            uniq.sort_unstable();
            uniq.dedup();
            if uniq.len() != nodes.len() {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {idx} repeats a member node"
                )));
            }
            if uniq.len() < 2 {
                log::warn!("dropping singleton hyperedge {idx}");
                continue;
            }
            max_w = max_w.max(w);
            kept.push((uniq, w));
        }
        let scale = if max_w > 1.0 { max_w } else { 1.0 };
        Self::with_labels(
            labels,
            kept.into_iter().map(|(nodes, w)| (nodes, S::lit(w / scale))),
        )
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Hyperedge<S>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Hyperedge<S> {
        &self.edges[e]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    /// Edge indices containing `node`.
    pub fn incident_edges(&self, node: usize) -> &[usize] {
        &self.incidence[node]
    }

    /// Unweighted incidence count |{e : node ∈ e}|.
    pub fn incident_count(&self, node: usize) -> usize {
        self.incidence[node].len()
    }

    /// ε = max |e| (0 for an edgeless hypergraph).
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Hyperedge::len).max().unwrap_or(0)
    }

    /// ν = max incident-edge count over all nodes.
    pub fn max_incidence(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn full_subset(&self) -> NodeSubset {
        NodeSubset::full(self.num_nodes())
    }

    fn check_subset(&self, s: &NodeSubset) {
        assert_eq!(
            s.universe(),
            self.num_nodes(),
            "subset universe does not match hypergraph"
        );
    }

    /// All-or-nothing splitting value f_e(S) = min(|e∩S|, |e∖S|, w_e).
    pub fn splitting_value(&self, edge: usize, subset: &NodeSubset) -> S {
        self.check_subset(subset);
        let e = &self.edges[edge];
        let inside = e.nodes.iter().filter(|&&v| subset.contains(v)).count();
        let outside = e.len() - inside;
        S::from_count(inside.min(outside)).min(e.weight)
    }

    /// cut_H(S) = Σ_e f_e(e ∩ S).
    pub fn cut_value(&self, subset: &NodeSubset) -> S {
        (0..self.edges.len()).fold(S::zero(), |acc, e| acc + self.splitting_value(e, subset))
    }

    /// Weighted degree d_i = Σ_{e∋i} w_e.
    pub fn degree(&self, node: usize) -> S {
        self.incidence[node]
            .iter()
            .fold(S::zero(), |acc, &e| acc + self.edges[e].weight)
    }

    pub fn volume(&self, subset: &NodeSubset) -> S {
        self.check_subset(subset);
        subset.iter().fold(S::zero(), |acc, i| acc + self.degree(i))
    }

    fn require_proper(&self, subset: &NodeSubset) -> Result<()> {
        self.check_subset(subset);
        if subset.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperSubset("subset must be nonempty and not the whole node set"))
        }
    }

    /// φ_H(S) = cut / min(vol(S), vol(V∖S)).
    pub fn conductance(&self, subset: &NodeSubset) -> Result<S> {
        self.require_proper(subset)?;
        let cut = self.cut_value(subset);
        if cut == S::zero() {
            return Ok(S::zero());
        }
        let vol = self.volume(subset);
        let rest = self.volume(&subset.complement());
        Ok(cut / vol.min(rest))
    }

    /// ψ_H(S) = cut / min(|S|, |V∖S|).
    pub fn edge_expansion(&self, subset: &NodeSubset) -> Result<S> {
        self.require_proper(subset)?;
        let small = subset.len().min(self.num_nodes() - subset.len());
        Ok(self.cut_value(subset) / S::from_count(small))
    }

    /// β = (ε + 1)ν.
    pub fn beta(&self, subset: &NodeSubset, scope: NuScope) -> S {
        let nu = match scope {
            NuScope::Global => self.max_incidence(),
            NuScope::Subset => subset.iter().map(|v| self.incident_count(v)).max().unwrap_or(0),
        };
        S::from_count((self.max_edge_size() + 1) * nu)
    }

    /// μ_H(S) = 2·cut / (vol(S) + β|S|) with ν taken over all nodes.
    pub fn mu(&self, subset: &NodeSubset) -> Result<S> {
        self.mu_with(subset, NuScope::Global)
    }

    pub fn mu_with(&self, subset: &NodeSubset, scope: NuScope) -> Result<S> {
        self.require_proper(subset)?;
        let cut = self.cut_value(subset);
        if cut == S::zero() {
            return Ok(S::zero());
        }
        let denom = self.volume(subset) + self.beta(subset, scope) * S::from_count(subset.len());
        Ok(S::lit(2.0) * cut / denom)
    }

    /// Connected components of the bipartite node–edge incidence graph,
    /// each as a sorted node list, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut dsu = DisjointSets::new(n);
        for e in &self.edges {
            for w in e.nodes.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for v in 0..n {
            let r = dsu.find(v);
            let slot = *by_root.entry(r).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[slot].push(v);
        }
        comps
    }

    /// A hypergraph with at most one node counts as connected.
    pub fn is_connected(&self) -> bool {
        self.num_nodes() <= 1 || self.components().len() == 1
    }

    /// Largest connected component; ties go to the component with the
    /// smallest node index. Empty for an empty hypergraph.
    pub fn largest_component(&self) -> Vec<usize> {
        self.components()
            .into_iter()
            .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best })
    }

    /// Sub-hypergraph induced by `nodes` (kept in the given order), keeping
    /// only edges whose members all lie inside it.
    pub fn induced(&self, nodes: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.num_nodes()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let labels = nodes.iter().map(|&v| self.labels[v].clone()).collect();
        let mut incidence = vec![Vec::new(); nodes.len()];
        let mut edges = Vec::new();
        for e in &self.edges {
            if e.nodes.iter().all(|&v| remap[v] != usize::MAX) {
                let mut mapped: Vec<usize> = e.nodes.iter().map(|&v| remap[v]).collect();
                mapped.sort_unstable();
                for &v in &mapped {
                    incidence[v].push(edges.len());
                }
                edges.push(Hyperedge {
                    nodes: mapped,
                    weight: e.weight,
                });
            }
        }
        Self {
            labels,
            edges,
            incidence,
        }
    }

    /// Whether every weight equals one (W = I).
    pub fn is_unit_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight == S::one())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
