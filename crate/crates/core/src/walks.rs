//! Random walks on EDVW hypergraphs.
//!
//! Three dynamics are provided:
//!
//! * the Markovian EDVW walk (pick `e ∋ v` with probability `ω(e)/d(v)`,
//!   then `w ∈ e` with probability `γ_e(w)/δ(e)`), see [`markov_transition`];
//! * the random walk on the weighted clique expansion, see
//!   [`clique_transition`];
//! * the non-Markovian hyperwalk, which keeps walking inside its current
//!   hyperedge `e` with probability `(|e|−2)/|e|`. Its vertex-to-vertex
//!   transitions are only available by simulation, see
//!   [`hyperwalk_estimate`].
//!
//! [`stationary`] and [`balance_report`] check detailed balance
//! `π_i P_ij = π_j P_ji`, which separates reversible chains (reducible to a
//! walk on an undirected weighted graph) from genuinely higher-order ones.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph, NodeId, WalkMatrices};
use crate::rng;

/// Row-stochastic `|V|×|V|` matrix over the hypergraph's node order.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub p: Array2<f64>,
    pub nodes: Vec<String>,
}

impl TransitionMatrix {
    pub fn num_nodes(&self) -> usize {
        self.p.nrows()
    }

    /// Largest `|Σ_j P_ij − 1|` over rows.
    pub fn max_row_error(&self) -> f64 {
        max_row_error(&self.p)
    }
}

pub(crate) fn max_row_error(p: &Array2<f64>) -> f64 {
    p.rows().into_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            nodes: &'a [String],
            matrix: Vec<Vec<f64>>,
        }
        Repr {
            nodes: &self.nodes,
            matrix: self.p.rows().into_iter().map(|r| r.to_vec()).collect(),
        }
        .serialize(s)
    }
}

/// `P = D_V⁻¹ W D_E⁻¹ R`, i.e.
/// `P(v,w) = Σ_{e∈E(v)} (ω(e)/d(v))·(γ_e(w)/δ(e))`.
pub fn markov_transition(m: &WalkMatrices) -> Result<TransitionMatrix> {
    let (nv, ne) = (m.num_nodes(), m.num_edges());
    if let Some(v) = m.d_v.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree(format!("node `{}`", m.nodes[v])));
    }
    if let Some(e) = m.d_e.iter().position(|&d| d <= 0.0) {
        return Err(Error::ZeroDegree(format!("hyperedge #{e}")));
    }
    let mut p = Array2::zeros((nv, nv));
    for e in 0..ne {
        let support: Vec<NodeId> = (0..nv).filter(|&v| m.r[[e, v]] > 0.0).collect();
        for &v in &support {
            let leave = m.w[[v, e]] / m.d_v[v];
            if leave == 0.0 {
                continue;
            }
            for &w in &support {
                p[[v, w]] += leave * m.r[[e, w]] / m.d_e[e];
            }
        }
    }
    Ok(TransitionMatrix {
        p,
        nodes: m.nodes.clone(),
    })
}

/// Random walk on the clique expansion with pair weights
/// `w_{u,v} = Σ_{e∈E(u,v)} ω(e)·γ_e(u)·γ_e(v)/δ(e)` (self-pairs included),
/// row-normalised.
pub fn clique_transition(h: &Hypergraph) -> Result<TransitionMatrix> {
    let n = h.num_nodes();
    let mut w = Array2::<f64>::zeros((n, n));
    for edge in h.edges() {
        let scale = edge.omega() / edge.degree();
        for (&u, &gu) in edge.members().iter().zip(edge.gammas()) {
            for (&v, &gv) in edge.members().iter().zip(edge.gammas()) {
                w[[u, v]] += scale * gu * gv;
            }
        }
    }
    for (u, mut row) in w.rows_mut().into_iter().enumerate() {
        let total = row.sum();
        if total <= 0.0 {
            return Err(Error::ZeroDegree(format!(
                "node `{}` in clique projection",
                h.node_name(u)
            )));
        }
        row /= total;
    }
    Ok(TransitionMatrix {
        p: w,
        nodes: h.node_names().map(str::to_owned).collect(),
    })
}

/// Hyperwalk state: the current node and the hyperedge it was reached
/// through (`None` before the first step).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkState {
    pub node: NodeId,
    pub edge: Option<EdgeId>,
}

impl WalkState {
    pub fn at(node: NodeId) -> Self {
        Self { node, edge: None }
    }
}

/// Precomputed cumulative weight tables for drawing hyperwalk steps.
#[derive(Debug)]
pub struct HyperwalkSampler<'a> {
    h: &'a Hypergraph,
    incident_cum: Vec<Vec<f64>>,
    member_cum: Vec<Vec<f64>>,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    weights
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

fn pick<R: Rng + ?Sized>(cum: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cum[cum.len() - 1];
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

impl<'a> HyperwalkSampler<'a> {
    pub fn new(h: &'a Hypergraph) -> Self {
        let incident_cum = (0..h.num_nodes())
            .map(|v| cumulative(h.incident_edges(v).iter().map(|&e| h.edge(e).omega())))
            .collect();
        let member_cum = h
            .edges()
            .iter()
            .map(|e| cumulative(e.gammas().iter().copied()))
            .collect();
        Self {
            h,
            incident_cum,
            member_cum,
        }
    }

    /// One hyperwalk step.
    ///
    /// Without a current hyperedge, or with probability `2/|e|` given the
    /// current hyperedge `e`, a fresh `e′ ∋ v` is drawn with probability
    /// `ω(e′)/d(v)`; otherwise the walk stays in `e`. The next vertex is
    /// then drawn from the chosen hyperedge with probability `γ(w)/δ`.
    pub fn step<R: Rng + ?Sized>(&self, state: WalkState, rng: &mut R) -> WalkState {
        let edge = match state.edge {
            Some(e) if rng.random::<f64>() >= 2.0 / self.h.edge(e).len() as f64 => e,
            _ => {
                let v = state.node;
                self.h.incident_edges(v)[pick(&self.incident_cum[v], rng)]
            }
        };
        let w = self.h.edge(edge).members()[pick(&self.member_cum[edge], rng)];
        WalkState {
            node: w,
            edge: Some(edge),
        }
    }

    /// One Markovian EDVW step (fresh hyperedge every time).
    pub fn markov_step<R: Rng + ?Sized>(&self, v: NodeId, rng: &mut R) -> NodeId {
        let e = self.h.incident_edges(v)[pick(&self.incident_cum[v], rng)];
        self.h.edge(e).members()[pick(&self.member_cum[e], rng)]
    }
}

/// Single hyperwalk step; builds the sampling tables on every call, so
/// prefer [`HyperwalkSampler`] in loops.
pub fn hyperwalk_step<R: Rng + ?Sized>(h: &Hypergraph, state: WalkState, rng: &mut R) -> WalkState {
    HyperwalkSampler::new(h).step(state, rng)
}

/// Empirical per-step transition matrices `P̂_1..P̂_K` of the hyperwalk.
#[derive(Debug, Clone)]
pub struct StepTransitions {
    pub steps: Vec<Array2<f64>>,
    pub n_walks: usize,
    pub max_len: usize,
    pub nodes: Vec<String>,
}

impl StepTransitions {
    /// `P̂_k` (1-based) as a [`TransitionMatrix`].
    pub fn step(&self, k: usize) -> TransitionMatrix {
        TransitionMatrix {
            p: self.steps[k - 1].clone(),
            nodes: self.nodes.clone(),
        }
    }
}

/// Monte Carlo estimate of the hyperwalk's k-step transition matrices.
///
/// From every start vertex, `n_walks` walks of `max_len` steps are run;
/// `P̂_k(v, w)` is the fraction of walks from `v` located at `w` after `k`
/// steps. Walk `i` from `v` draws from its own stream keyed by
/// `(seed, v, i)`, so the result is independent of the thread count.
pub fn hyperwalk_estimate(h: &Hypergraph, n_walks: usize, max_len: usize, seed: u64) -> Result<StepTransitions> {
    if n_walks == 0 || max_len == 0 {
        return Err(Error::InvalidParameter {
            name: "n_walks/max_len",
            msg: "both must be at least 1".into(),
        });
    }
    let n = h.num_nodes();
    let sampler = HyperwalkSampler::new(h);
    let counts: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|start| {
            let mut counts = vec![0u32; max_len * n];
            for walk in 0..n_walks {
                let mut rng = rng::stream(seed, &[rng::TAG_WALK, start as u64, walk as u64]);
                let mut state = WalkState::at(start);
                for k in 0..max_len {
                    state = sampler.step(state, &mut rng);
                    counts[k * n + state.node] += 1;
                }
            }
            counts
        })
        .collect();

    let steps = (0..max_len)
        .map(|k| {
            let mut p = Array2::zeros((n, n));
            for (v, c) in counts.iter().enumerate() {
                let row = &c[k * n..(k + 1) * n];
                let total: u64 = row.iter().map(|&x| x as u64).sum();
                for (w, &x) in row.iter().enumerate() {
                    p[[v, w]] = x as f64 / total as f64;
                }
            }
            p
        })
        .collect();
    Ok(StepTransitions {
        steps,
        n_walks,
        max_len,
        nodes: h.node_names().map(str::to_owned).collect(),
    })
}

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_STATIONARY_MAX_ITERS: usize = 1_000_000;

/// `‖πP − π‖₁`.
pub fn stationary_residual(p: &Array2<f64>, pi: &[f64]) -> f64 {
    let pi = Array1::from(pi.to_vec());
    let next = pi.dot(p);
    next.iter().zip(pi.iter()).map(|(a, b)| (a - b).abs()).sum()
}

/// Stationary distribution by power iteration from the uniform
/// distribution. The returned `π` satisfies `‖πP − π‖₁ < tol`.
pub fn stationary(p: &TransitionMatrix, tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    let n = p.num_nodes();
    let mut pi = Array1::from_elem(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let mut next = pi.dot(&p.p);
        residual = next.iter().zip(pi.iter()).map(|(a, b)| (a - b).abs()).sum();
        if residual < tol {
            return Ok(pi.to_vec());
        }
        let total = next.sum();
        next /= total;
        pi = next;
    }
    Err(Error::NonConvergence {
        residual,
        iterations: max_iters,
    })
}

/// Thresholds used to classify detailed-balance violations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceThresholds {
    /// A flux difference at or above this is a violation.
    pub reversible: f64,
    /// Violations at or above this are severe, below it moderate.
    pub moderate_severe: f64,
    /// Largest accepted `‖πP − π‖₁` for the supplied `π`.
    pub stationarity: f64,
}

impl Default for BalanceThresholds {
    fn default() -> Self {
        Self {
            reversible: 1e-10,
            moderate_severe: 1e-4,
            stationarity: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub reversible: bool,
    /// `max_{i,j} |π_i P_ij − π_j P_ji|`.
    pub max_violation: f64,
    /// Mean over nodes `i` of `max_j |π_i P_ij − π_j P_ji|`.
    pub mean_max_violation: f64,
    /// Unordered pairs whose flux difference reaches `thresholds.reversible`.
    pub total_violations: usize,
    pub moderate_violations: usize,
    pub severe_violations: usize,
    pub stationary_residual: f64,
    pub thresholds: BalanceThresholds,
}

pub fn balance_report(p: &TransitionMatrix, pi: &[f64], thresholds: BalanceThresholds) -> Result<BalanceReport> {
    let n = p.num_nodes();
    if pi.len() != n {
        return Err(Error::InvalidParameter {
            name: "pi",
            msg: format!("length {} does not match {} nodes", pi.len(), n),
        });
    }
    let residual = stationary_residual(&p.p, pi);
    if residual.is_nan() || residual > thresholds.stationarity {
        return Err(Error::NotStationary(residual));
    }
    let mut row_max = vec![0.0f64; n];
    let (mut moderate, mut severe) = (0usize, 0usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let f = (pi[i] * p.p[[i, j]] - pi[j] * p.p[[j, i]]).abs();
            row_max[i] = row_max[i].max(f);
            row_max[j] = row_max[j].max(f);
            if f >= thresholds.reversible {
                if f >= thresholds.moderate_severe {
                    severe += 1;
                } else {
                    moderate += 1;
                }
            }
        }
    }
    let max_violation = row_max.iter().copied().fold(0.0, f64::max);
    Ok(BalanceReport {
        reversible: max_violation < thresholds.reversible,
        max_violation,
        mean_max_violation: row_max.iter().sum::<f64>() / n as f64,
        total_violations: moderate + severe,
        moderate_violations: moderate,
        severe_violations: severe,
        stationary_residual: residual,
        thresholds,
    })
}
