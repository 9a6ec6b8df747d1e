#![allow(dead_code)]

use std::collections::HashMap;

use edvw_core::ingest::CableRecord;
use edvw_core::Hypergraph;
use ndarray::Array2;
use proptest::prelude::*;
use rand::seq::index;
use rand::Rng;

pub fn cable(id: &str, from: &str, to: &[&str]) -> CableRecord {
    CableRecord {
        id: id.into(),
        sender: from.into(),
        receivers: to.iter().map(|s| s.to_string()).collect(),
        timestamp: "2010-11-28".into(),
    }
}

/// The two example cables: Tunis to three missions, Rabat to Tunis.
pub fn two_cables() -> Vec<CableRecord> {
    vec![
        cable(
            "C1",
            "Embassy Tunis",
            &["Embassy Ankara", "Consulate Istanbul", "Embassy Bruxelles"],
        ),
        cable("C2", "Embassy Rabat", &["Embassy Tunis"]),
    ]
}

pub fn mission_countries() -> HashMap<String, String> {
    [
        ("Embassy Tunis", "Tunisia"),
        ("Embassy Ankara", "Türkiye"),
        ("Consulate Istanbul", "Türkiye"),
        ("Embassy Bruxelles", "Belgium"),
        ("Embassy Rabat", "Morocco"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_owned(), b.to_owned()))
    .collect()
}

/// `(node, γ)` lists and `ω` of one hyperedge.
pub type EdgeSpec = (Vec<(usize, f64)>, f64);

pub fn build(edges: &[EdgeSpec]) -> Hypergraph {
    let mut b = Hypergraph::builder();
    for (members, omega) in edges {
        let named: Vec<(String, f64)> = members.iter().map(|(v, g)| (format!("v{v}"), *g)).collect();
        b.add_edge(&named, *omega).unwrap();
    }
    b.build().unwrap()
}

fn dedup_members(members: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut seen = Vec::new();
    members
        .into_iter()
        .filter(|(v, _)| {
            let fresh = !seen.contains(v);
            seen.push(*v);
            fresh
        })
        .collect()
}

/// Hyperedges of size 2..=`max_size` on nodes `0..n`, with random `γ` and
/// `ω` (or `γ = 1` everywhere when `edvw` is false).
pub fn edge_specs(n: usize, max_edges: usize, max_size: usize, edvw: bool) -> impl Strategy<Value = Vec<EdgeSpec>> {
    let gamma = if edvw { (0.1f64..5.0).boxed() } else { Just(1.0).boxed() };
    let edge = (proptest::collection::vec((0..n, gamma), 2..=max_size), 0.1f64..5.0)
        .prop_map(|(m, w)| (dedup_members(m), w))
        .prop_filter("at least two distinct members", |(m, _)| m.len() >= 2);
    proptest::collection::vec(edge, 1..=max_edges)
}

/// Seeded random hypergraph whose hyperedges chain through a spanning
/// path, so it is connected.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra_edges: usize, max_size: usize) -> Hypergraph {
    let mut edges: Vec<EdgeSpec> = Vec::new();
    let gamma = |rng: &mut R| rng.random_range(0.2..4.0);
    for v in 1..n {
        edges.push((vec![(v - 1, gamma(rng)), (v, gamma(rng))], rng.random_range(0.5..3.0)));
    }
    for _ in 0..extra_edges {
        let size = rng.random_range(2..=max_size.min(n));
        let members = index::sample(rng, n, size)
            .into_iter()
            .map(|v| (v, gamma(rng)))
            .collect();
        edges.push((members, rng.random_range(0.5..3.0)));
    }
    build(&edges)
}

/// `P(u, v) = Σ_e ω(e)/d(u) · γ_e(v)/δ(e)`, by direct summation.
pub fn markov_oracle(h: &Hypergraph) -> Array2<f64> {
    let n = h.num_nodes();
    let mut p = Array2::zeros((n, n));
    for u in 0..n {
        let d: f64 = h.edges().iter().filter(|e| e.contains(u)).map(|e| e.omega()).sum();
        for v in 0..n {
            p[(u, v)] = h
                .edges()
                .iter()
                .filter(|e| e.contains(u) && e.contains(v))
                .map(|e| e.omega() / d * e.gamma(v).unwrap() / e.degree())
                .sum();
        }
    }
    p
}

/// Row-normalized `w(u, v) = Σ_e ω(e)·γ_e(u)·γ_e(v)/δ(e)`.
pub fn clique_oracle(h: &Hypergraph) -> Array2<f64> {
    let n = h.num_nodes();
    let mut w = Array2::zeros((n, n));
    for e in h.edges() {
        for (&u, &gu) in e.members().iter().zip(e.gammas()) {
            for (&v, &gv) in e.members().iter().zip(e.gammas()) {
                w[(u, v)] += e.omega() * gu * gv / e.degree();
            }
        }
    }
    for mut row in w.rows_mut() {
        let s: f64 = row.sum();
        row /= s;
    }
    w
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_row_error(p: &Array2<f64>) -> f64 {
    p.rows().into_iter().fold(0.0, |m, r| m.max((r.sum() - 1.0).abs()))
}

/// `(n″ + 0.5·n′)/n` by enumerating every pair.
pub fn auc_oracle(t: &[f64], f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &x in t {
        for &y in f {
            if x > y {
                acc += 1.0;
            } else if x == y {
                acc += 0.5;
            }
        }
    }
    acc / (t.len() * f.len()) as f64
}
