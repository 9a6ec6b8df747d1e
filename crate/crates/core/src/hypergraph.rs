//! Hypergraphs with edge-dependent vertex weights.
//!
//! A [`Hypergraph`] holds an ordered node set and a list of hyperedges.
//! Each hyperedge `e` carries a weight `ω(e)` and, for every member `v`, a
//! vertex weight `γ_e(v)` that may differ from one hyperedge to the next.
//! Nodes and hyperedges are indexed in insertion order, and every matrix
//! derived from a hypergraph uses that order.

use indexmap::IndexSet;
use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

/// A hyperedge: at least two distinct members with positive vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperedge {
    members: Vec<NodeId>,
    gamma: Vec<f64>,
    omega: f64,
}

impl Hyperedge {
    /// Members in insertion order.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    /// Vertex weights, aligned with [`Hyperedge::members`].
    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }

    /// `γ_e(v)`, or `None` when `v ∉ e`.
    pub fn gamma(&self, v: NodeId) -> Option<f64> {
        self.members.iter().position(|&m| m == v).map(|i| self.gamma[i])
    }

    /// `δ(e) = Σ_{v∈e} γ_e(v)`.
    pub fn degree(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Members sorted ascending; the canonical set form of the hyperedge.
    pub fn sorted_members(&self) -> Vec<NodeId> {
        let mut m = self.members.clone();
        m.sort_unstable();
        m
    }
}

/// `H = (V, E, ω, γ)`.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    nodes: IndexSet<String>,
    edges: Vec<Hyperedge>,
    incident: Vec<Vec<EdgeId>>,
}

impl Hypergraph {
    pub fn builder() -> HypergraphBuilder {
        HypergraphBuilder::default()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, v: NodeId) -> &str {
        &self.nodes[v]
    }

    pub fn node_names(&self) -> impl ExactSizeIterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.nodes.get_index_of(name)
    }

    pub fn edge(&self, e: EdgeId) -> &Hyperedge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    /// `E(v)`: hyperedges containing `v`, in edge order.
    pub fn incident_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.incident[v]
    }

    /// `E(u, v)`: hyperedges containing both `u` and `v`.
    pub fn common_edges(&self, u: NodeId, v: NodeId) -> Vec<EdgeId> {
        self.incident[u]
            .iter()
            .copied()
            .filter(|&e| self.edges[e].contains(v))
            .collect()
    }

    /// `d(v) = Σ_{e∈E(v)} ω(e)`.
    pub fn degree(&self, v: NodeId) -> f64 {
        self.incident[v].iter().map(|&e| self.edges[e].omega).sum()
    }

    /// `|E(v)|`.
    pub fn unweighted_degree(&self, v: NodeId) -> usize {
        self.incident[v].len()
    }

    /// Hypergraph over the hyperedges in `keep` only.
    ///
    /// Nodes left without a hyperedge are dropped; the surviving nodes keep
    /// their relative order, so when every node survives the node indices
    /// are unchanged. Hyperedges are re-indexed in the order given.
    pub fn restrict(&self, keep: &[EdgeId]) -> Result<Hypergraph> {
        if keep.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        let mut covered = vec![false; self.num_nodes()];
        for &e in keep {
            let edge = self
                .edges
                .get(e)
                .ok_or_else(|| Error::InvalidEdge(format!("edge index {e} out of range")))?;
            for &v in &edge.members {
                covered[v] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.num_nodes()];
        let mut nodes = IndexSet::new();
        for (v, name) in self.nodes.iter().enumerate() {
            if covered[v] {
                remap[v] = nodes.len();
                nodes.insert(name.clone());
            }
        }
        let mut incident = vec![Vec::new(); nodes.len()];
        let edges: Vec<Hyperedge> = keep
            .iter()
            .enumerate()
            .map(|(new_e, &e)| {
                let edge = &self.edges[e];
                let members: Vec<NodeId> = edge.members.iter().map(|&v| remap[v]).collect();
                for &v in &members {
                    incident[v].push(new_e);
                }
                Hyperedge {
                    members,
                    gamma: edge.gamma.clone(),
                    omega: edge.omega,
                }
            })
            .collect();
        Ok(Hypergraph { nodes, edges, incident })
    }

    /// True iff the node–hyperedge incidence graph has a single component
    /// over the nodes.
    pub fn is_connected(&self) -> bool {
        let all = vec![true; self.num_edges()];
        spans_connected(self, &all)
    }
}

/// True iff the hyperedges flagged in `keep` cover every node of `h` and
/// connect them into one component.
pub fn spans_connected(h: &Hypergraph, keep: &[bool]) -> bool {
    let n = h.num_nodes();
    if n == 0 {
        return false;
    }
    let mut uf = UnionFind::new(n);
    let mut covered = vec![false; n];
    for (e, edge) in h.edges.iter().enumerate() {
        if !keep[e] {
            continue;
        }
        let first = edge.members[0];
        for &v in &edge.members {
            covered[v] = true;
            uf.union(first, v);
        }
    }
    if covered.iter().any(|c| !c) {
        return false;
    }
    let root = uf.find(0);
    (1..n).all(|v| uf.find(v) == root)
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
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

/// Incremental construction of a [`Hypergraph`].
#[derive(Debug, Default)]
pub struct HypergraphBuilder {
    nodes: IndexSet<String>,
    edges: Vec<Hyperedge>,
}

impl HypergraphBuilder {
    /// Adds a hyperedge given as `(node, γ_e(node))` pairs and its weight.
    pub fn add_edge<S: AsRef<str>>(&mut self, members: &[(S, f64)], omega: f64) -> Result<EdgeId> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidEdge(format!(
                "hyperedge weight must be positive, got {omega}"
            )));
        }
        let mut seen = IndexSet::with_capacity(members.len());
        for (name, gamma) in members {
            let name = name.as_ref();
            if !(*gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidEdge(format!(
                    "vertex weight of `{name}` must be positive, got {gamma}"
                )));
            }
            if !seen.insert(name) {
                return Err(Error::InvalidEdge(format!("node `{name}` repeated")));
            }
        }
        if seen.len() < 2 {
            return Err(Error::InvalidEdge(format!(
                "hyperedge needs at least 2 members, got {}",
                seen.len()
            )));
        }
        let ids = members
            .iter()
            .map(|(name, _)| self.nodes.insert_full(name.as_ref().to_owned()).0)
            .collect();
        self.edges.push(Hyperedge {
            members: ids,
            gamma: members.iter().map(|(_, g)| *g).collect(),
            omega,
        });
        Ok(self.edges.len() - 1)
    }

    /// Adds a hyperedge with `γ_e(v) = 1` for all members and `ω(e) = |e|`.
    pub fn add_uniform<S: AsRef<str>>(&mut self, members: &[S]) -> Result<EdgeId> {
        let weighted: Vec<(&str, f64)> = members.iter().map(|m| (m.as_ref(), 1.0)).collect();
        self.add_edge(&weighted, members.len() as f64)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn build(self) -> Result<Hypergraph> {
        if self.edges.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let mut incident = vec![Vec::new(); self.nodes.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            for &v in &edge.members {
                incident[v].push(e);
            }
        }
        Ok(Hypergraph {
            nodes: self.nodes,
            edges: self.edges,
            incident,
        })
    }
}

/// Incidence and degree matrices of a hypergraph.
///
/// * `r`: `|E|×|V|`, `R(e,v) = γ_e(v)`
/// * `w`: `|V|×|E|`, `W(v,e) = ω(e)` if `v ∈ e`
/// * `d_v`: diagonal of `D_V`, `d(v) = Σ_{e∈E(v)} ω(e)`
/// * `d_e`: diagonal of `D_E`, `δ(e) = Σ_{v∈e} γ_e(v)`
#[derive(Debug, Clone)]
pub struct WalkMatrices {
    pub r: Array2<f64>,
    pub w: Array2<f64>,
    pub d_v: Array1<f64>,
    pub d_e: Array1<f64>,
    pub nodes: Vec<String>,
}

impl WalkMatrices {
    pub fn num_nodes(&self) -> usize {
        self.d_v.len()
    }

    pub fn num_edges(&self) -> usize {
        self.d_e.len()
    }
}

pub fn incidence_matrices(h: &Hypergraph) -> WalkMatrices {
    let (nv, ne) = (h.num_nodes(), h.num_edges());
    let mut r = Array2::zeros((ne, nv));
    let mut w = Array2::zeros((nv, ne));
    let mut d_v = Array1::zeros(nv);
    let mut d_e = Array1::zeros(ne);
    for (e, edge) in h.edges().iter().enumerate() {
        for (&v, &g) in edge.members.iter().zip(&edge.gamma) {
            r[[e, v]] = g;
            w[[v, e]] = edge.omega;
            d_v[v] += edge.omega;
            d_e[e] += g;
        }
    }
    WalkMatrices {
        r,
        w,
        d_v,
        d_e,
        nodes: h.node_names().map(str::to_owned).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_edges() -> Hypergraph {
        let mut b = Hypergraph::builder();
        b.add_edge(&[("a", 2.0), ("b", 1.0), ("c", 1.0)], 3.0).unwrap();
        b.add_edge(&[("c", 1.0), ("d", 1.0)], 2.0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn rejects_malformed_edges() {
        let mut b = Hypergraph::builder();
        assert!(b.add_edge(&[("a", 1.0)], 1.0).is_err());
        assert!(b.add_edge(&[("a", 1.0), ("a", 1.0)], 1.0).is_err());
        assert!(b.add_edge(&[("a", 1.0), ("b", 0.0)], 1.0).is_err());
        assert!(b.add_edge(&[("a", 1.0), ("b", 1.0)], -1.0).is_err());
        assert!(matches!(b.build(), Err(Error::EmptyHypergraph)));
    }

    #[test]
    fn single_edge_matrices() {
        let mut b = Hypergraph::builder();
        b.add_edge(&[("a", 1.0), ("b", 1.0)], 1.0).unwrap();
        let m = incidence_matrices(&b.build().unwrap());
        assert_eq!(m.d_v.to_vec(), vec![1.0, 1.0]);
        assert_eq!(m.d_e.to_vec(), vec![2.0]);
    }

    #[test]
    fn matrix_supports_match_edges() {
        let h = two_edges();
        let m = incidence_matrices(&h);
        for (e, edge) in h.edges().iter().enumerate() {
            for v in 0..h.num_nodes() {
                assert_eq!(m.r[[e, v]] > 0.0, edge.contains(v));
                assert_eq!(m.w[[v, e]] > 0.0, edge.contains(v));
            }
            assert_eq!(m.r.row(e).sum(), m.d_e[e]);
        }
        for v in 0..h.num_nodes() {
            assert_eq!(m.d_v[v], h.degree(v));
        }
    }

    #[test]
    fn restrict_drops_uncovered_nodes_and_keeps_order() {
        let h = two_edges();
        let r = h.restrict(&[0]).unwrap();
        assert_eq!(r.node_names().collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert_eq!(r.num_edges(), 1);
        let same = h.restrict(&[0, 1]).unwrap();
        assert_eq!(same.edges(), h.edges());
        assert!(matches!(h.restrict(&[]), Err(Error::EmptyRestriction)));
    }

    #[test]
    fn connectivity() {
        assert!(two_edges().is_connected());
        let mut b = Hypergraph::builder();
        b.add_uniform(&["a", "b"]).unwrap();
        b.add_uniform(&["c", "d"]).unwrap();
        assert!(!b.build().unwrap().is_connected());
    }
}
