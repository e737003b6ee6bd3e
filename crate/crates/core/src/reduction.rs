//! Hypergraph → graph reductions.
//!
//! The adapted cardinality-based gadget replaces every hyperedge `e` by two
//! auxiliary nodes `a_e`, `b_e` wired as
//!
//! ```text
//!   v --1--> a_e --w_e--> b_e --1--> v      (for every v ∈ e)
//!            a_e --(1 - w_e)--> a_e
//! ```
//!
//! so that out-weights of auxiliary nodes are 1 and |e| respectively and a
//! random walk on the result is well defined. Node layout of the reduced
//! graph is `[V | V_a | V_b]`: originals first, then one `a` per edge, then
//! one `b` per edge, both in hyperedge order.
//!
//! Clique and star expansions are provided as undirected baselines.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, NodeSubset};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    Original(usize),
    /// Entry node `a_e` of hyperedge `e`.
    AuxA(usize),
    /// Exit node `b_e` of hyperedge `e`.
    AuxB(usize),
}

impl NodeRole {
    pub fn is_auxiliary(self) -> bool {
        !matches!(self, NodeRole::Original(_))
    }
}

#[derive(Debug, Clone)]
pub struct DirectedGraph<S> {
    num_original: usize,
    num_hyperedges: usize,
    out: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> DirectedGraph<S> {
    /// n̂ = n + 2m.
    pub fn num_nodes(&self) -> usize {
        self.out.len()
    }

    pub fn num_original(&self) -> usize {
        self.num_original
    }

    pub fn num_hyperedges(&self) -> usize {
        self.num_hyperedges
    }

    /// Number of stored directed edges, self-loops included.
    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn a_node(&self, edge: usize) -> usize {
        self.num_original + edge
    }

    pub fn b_node(&self, edge: usize) -> usize {
        self.num_original + self.num_hyperedges + edge
    }

    pub fn role(&self, node: usize) -> NodeRole {
        let (n, m) = (self.num_original, self.num_hyperedges);
        if node < n {
            NodeRole::Original(node)
        } else if node < n + m {
            NodeRole::AuxA(node - n)
        } else {
            NodeRole::AuxB(node - n - m)
        }
    }

    pub fn out_edges(&self, node: usize) -> &[(usize, S)] {
        &self.out[node]
    }

    pub fn weight(&self, from: usize, to: usize) -> S {
        self.out[from]
            .iter()
            .filter(|&&(t, _)| t == to)
            .fold(S::zero(), |acc, &(_, w)| acc + w)
    }

    /// Total out-weight of a node (its out-degree in the weighted sense).
    pub fn out_weight(&self, node: usize) -> S {
        self.out[node].iter().fold(S::zero(), |acc, &(_, w)| acc + w)
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out[from].iter().any(|&(t, _)| t == to)
    }

    /// Number of strongly connected components.
    pub fn scc_count(&self) -> usize {
        let succ: Vec<Vec<usize>> = self
            .out
            .iter()
            .map(|edges| edges.iter().map(|&(v, _)| v).collect())
            .collect();
        crate::sparse::scc_count(&succ)
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.num_nodes() > 0 && self.scc_count() == 1
    }

    /// vol_G(T) = Σ_{u∈T} out-weight(u).
    pub fn volume(&self, subset: &NodeSubset) -> S {
        self.check(subset);
        subset.iter().fold(S::zero(), |acc, u| acc + self.out_weight(u))
    }

    fn check(&self, subset: &NodeSubset) {
        assert_eq!(
            subset.universe(),
            self.num_nodes(),
            "subset universe does not match reduced graph"
        );
    }
}

/// Adapted CB-gadget reduction of a hypergraph.
pub fn adapted_cb_gadget<S: Scalar>(h: &Hypergraph<S>) -> DirectedGraph<S> {
    let (n, m) = (h.num_nodes(), h.num_edges());
    let mut out: Vec<Vec<(usize, S)>> = vec![Vec::new(); n + 2 * m];
    for (e, edge) in h.edges().iter().enumerate() {
        let (a, b) = (n + e, n + m + e);
        let w = edge.weight();
        for &v in edge.nodes() {
            out[v].push((a, S::one()));
            out[b].push((v, S::one()));
        }
        if w < S::one() {
            out[a].push((a, S::one() - w));
        }
        out[a].push((b, w));
    }
    DirectedGraph {
        num_original: n,
        num_hyperedges: m,
        out,
    }
}

/// Row-stochastic transition matrix of a random walk.
#[derive(Debug, Clone)]
pub struct RowStochasticMatrix<S>(CsrMatrix<S>);

impl<S: Scalar> RowStochasticMatrix<S> {
    /// Wrap a matrix after checking every row sums to one within `tol`.
    pub fn new(m: CsrMatrix<S>, tol: S) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        for r in 0..m.nrows() {
            let s = m.row_sum(r);
            if (s - S::one()).abs() > tol || m.row(r).any(|(_, v)| v < S::zero()) {
                return Err(Error::Structural(format!("row {r} is not stochastic (sum {s})")));
            }
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CsrMatrix<S> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Random-walk transition matrix of a directed graph: each row is the
/// node's out-weights divided by their sum. On gadget output this is the
/// block matrix `[[0, D⁻¹H, 0], [0, I−W, W], [Δ⁻¹Hᵀ, 0, 0]]` with `D` the
/// unweighted incidence counts.
pub fn transition_matrix<S: Scalar>(g: &DirectedGraph<S>) -> Result<RowStochasticMatrix<S>> {
    let n = g.num_nodes();
    let mut triplets = Vec::with_capacity(g.num_edges());
    for u in 0..n {
        let total = g.out_weight(u);
        if total <= S::zero() {
            return Err(Error::Structural(format!("node {u} has no outgoing weight")));
        }
        for &(v, w) in g.out_edges(u) {
            triplets.push((u, v, w / total));
        }
    }
    RowStochasticMatrix::new(
        CsrMatrix::from_triplets(n, n, &triplets),
        S::lit(64.0) * S::EPSILON,
    )
}

/// cut_G(T): total weight of edges leaving T.
pub fn directed_cut<S: Scalar>(g: &DirectedGraph<S>, t: &NodeSubset) -> Result<S> {
    g.check(t);
    if !t.is_proper() {
        return Err(Error::ImproperSubset("T must be a nonempty proper subset of the reduced graph"));
    }
    Ok(t.iter()
        .flat_map(|u| g.out_edges(u).iter())
        .filter(|&&(v, _)| !t.contains(v))
        .fold(S::zero(), |acc, &(_, w)| acc + w))
}

/// φ_G(T) = cut_G(T) / min(vol_G(T), vol_G(V̂∖T)).
pub fn directed_conductance<S: Scalar>(g: &DirectedGraph<S>, t: &NodeSubset) -> Result<S> {
    let cut = directed_cut(g, t)?;
    let vol = g.volume(t).min(g.volume(&t.complement()));
    Ok(cut / vol)
}

/// Membership in the admissible family: every auxiliary node of `T` has an
/// original node of `T` as in- or out-neighbour.
pub fn admissible_family_check<S: Scalar>(g: &DirectedGraph<S>, t: &NodeSubset) -> bool {
    g.check(t);
    let originals: Vec<usize> = t.iter().filter(|&u| u < g.num_original()).collect();
    t.iter().filter(|&u| g.role(u).is_auxiliary()).all(|u| {
        originals
            .iter()
            .any(|&v| g.has_edge(u, v) || g.has_edge(v, u))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StarRole {
    Original(usize),
    EdgeNode(usize),
}

/// Symmetric weighted graph. Star expansions additionally tag node roles.
#[derive(Debug, Clone)]
pub struct UndirectedGraph<S> {
    adjacency: CsrMatrix<S>,
    roles: Option<Vec<StarRole>>,
}

impl<S: Scalar> UndirectedGraph<S> {
    /// Build from undirected `(u, v, w)` pairs; each pair is stored in both
    /// directions and parallel pairs are summed.
    pub fn from_edges(n: usize, edges: &[(usize, usize, S)]) -> Self {
        let mut triplets = Vec::with_capacity(2 * edges.len());
        for &(u, v, w) in edges {
            triplets.push((u, v, w));
            if u != v {
                triplets.push((v, u, w));
            }
        }
        Self {
            adjacency: CsrMatrix::from_triplets(n, n, &triplets),
            roles: None,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &CsrMatrix<S> {
        &self.adjacency
    }

    pub fn weight(&self, u: usize, v: usize) -> S {
        self.adjacency.get(u, v)
    }

    pub fn degree(&self, u: usize) -> S {
        self.adjacency.row_sum(u)
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        self.adjacency.row(u)
    }

    pub fn roles(&self) -> Option<&[StarRole]> {
        self.roles.as_deref()
    }

    /// Unordered edge list with `u <= v`.
    pub fn edge_list(&self) -> Vec<(usize, usize, S)> {
        self.adjacency.triplets().filter(|&(u, v, _)| u <= v).collect()
    }
}

/// Clique expansion: weight(u, v) = Σ_{e ⊇ {u,v}} w_e.
pub fn clique_expansion<S: Scalar>(h: &Hypergraph<S>) -> UndirectedGraph<S> {
    let mut acc: BTreeMap<(usize, usize), S> = BTreeMap::new();
    for e in h.edges() {
        let nodes = e.nodes();
        for (i, &u) in nodes.iter().enumerate() {
            for &v in &nodes[i + 1..] {
                *acc.entry((u, v)).or_insert_with(S::zero) += e.weight();
            }
        }
    }
    let edges: Vec<_> = acc.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    UndirectedGraph::from_edges(h.num_nodes(), &edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StarWeighting {
    /// w_e / δ(e).
    #[default]
    SizeNormalized,
    /// Every leaf edge weighs 1.
    Unit,
}

/// Star expansion: one extra node per hyperedge (indices `n..n+m`) joined
/// to each member with weight w_e / δ(e).
pub fn star_expansion<S: Scalar>(h: &Hypergraph<S>) -> UndirectedGraph<S> {
    star_expansion_with(h, StarWeighting::SizeNormalized)
}

pub fn star_expansion_with<S: Scalar>(h: &Hypergraph<S>, weighting: StarWeighting) -> UndirectedGraph<S> {
    let n = h.num_nodes();
    let mut edges = Vec::new();
    for (e, edge) in h.edges().iter().enumerate() {
        let w = match weighting {
            StarWeighting::SizeNormalized => edge.weight() / S::from_count(edge.len()),
            StarWeighting::Unit => S::one(),
        };
        for &v in edge.nodes() {
            edges.push((v, n + e, w));
        }
    }
    let mut g = UndirectedGraph::from_edges(n + h.num_edges(), &edges);
    g.roles = Some(
        (0..n)
            .map(StarRole::Original)
            .chain((0..h.num_edges()).map(StarRole::EdgeNode))
            .collect(),
    );
    g
}

/// Exhaustive oracles over subsets of small reduced graphs, encoded as
/// bitmasks. Exponential; restricted to at most [`oracle::MAX_NODES`] nodes.
pub mod oracle {
    use super::*;

    pub const MAX_NODES: usize = 24;

    /// Precomputed bitmask view of a small reduced graph.
    pub struct MaskedGraph<S> {
        num_nodes: usize,
        num_original: usize,
        out: Vec<Vec<(usize, S)>>,
        out_weight: Vec<S>,
        /// For each auxiliary node, the mask of adjacent original nodes.
        anchor: Vec<u32>,
    }

    impl<S: Scalar> MaskedGraph<S> {
        pub fn new(g: &DirectedGraph<S>) -> Result<Self> {
            let n = g.num_nodes();
            if n > MAX_NODES {
                return Err(Error::Domain(format!(
                    "exhaustive enumeration limited to {MAX_NODES} nodes, graph has {n}"
                )));
            }
            let mut anchor = vec![0u32; n];
            for u in 0..n {
                for &(v, _) in g.out_edges(u) {
                    if g.role(u).is_auxiliary() && v < g.num_original() {
                        anchor[u] |= 1 << v;
                    }
                    if g.role(v).is_auxiliary() && u < g.num_original() {
                        anchor[v] |= 1 << u;
                    }
                }
            }
            Ok(Self {
                num_nodes: n,
                num_original: g.num_original(),
                out: (0..n).map(|u| g.out_edges(u).to_vec()).collect(),
                out_weight: (0..n).map(|u| g.out_weight(u)).collect(),
                anchor,
            })
        }

        pub fn num_nodes(&self) -> usize {
            self.num_nodes
        }

        pub fn original_mask(&self) -> u32 {
            ((1u64 << self.num_original) - 1) as u32
        }

        pub fn full_mask(&self) -> u32 {
            ((1u64 << self.num_nodes) - 1) as u32
        }

        pub fn cut(&self, t: u32) -> S {
            let mut total = S::zero();
            for u in (0..self.num_nodes).filter(|&u| t >> u & 1 == 1) {
                for &(v, w) in &self.out[u] {
                    if t >> v & 1 == 0 {
                        total += w;
                    }
                }
            }
            total
        }

        pub fn volume(&self, t: u32) -> S {
            (0..self.num_nodes)
                .filter(|&u| t >> u & 1 == 1)
                .fold(S::zero(), |acc, u| acc + self.out_weight[u])
        }

        /// `None` for the empty or full set.
        pub fn conductance(&self, t: u32) -> Option<S> {
            if t == 0 || t == self.full_mask() {
                return None;
            }
            let vol = self.volume(t).min(self.volume(self.full_mask() & !t));
            Some(self.cut(t) / vol)
        }

        pub fn is_admissible(&self, t: u32) -> bool {
            let originals = t & self.original_mask();
            (self.num_original..self.num_nodes)
                .filter(|&u| t >> u & 1 == 1)
                .all(|u| self.anchor[u] & originals != 0)
        }

        /// Every admissible subset of the reduced graph.
        pub fn admissible_subsets(&self) -> impl Iterator<Item = u32> + '_ {
            (0..=self.full_mask()).filter(move |&t| self.is_admissible(t))
        }

        /// min over U with U ∩ V = S of cut_G(U), by enumerating every
        /// inclusion pattern of the auxiliary nodes.
        pub fn min_extension_cut(&self, s: u32) -> S {
            let aux = self.num_nodes - self.num_original;
            let mut best: Option<S> = None;
            for pattern in 0..(1u32 << aux) {
                let u = s | (pattern << self.num_original);
                let c = self.cut(u);
                best = Some(match best {
                    Some(b) if b <= c => b,
                    _ => c,
                });
            }
            best.unwrap_or_else(S::zero)
        }
    }

    /// Original-node part of a mask as a subset of the hypergraph.
    pub fn original_subset(mask: u32, num_original: usize) -> NodeSubset {
        NodeSubset::from_mask(num_original, u64::from(mask) & ((1u64 << num_original) - 1))
    }
}
