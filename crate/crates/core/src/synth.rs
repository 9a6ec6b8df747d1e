//! Synthetic hypergraphs with known structure.

use rand::seq::index;
use rand::Rng;

use crate::error::Result;
use crate::hypergraph::Hypergraph;
use crate::rng;

/// Planted communities: hyperedges drawn inside communities, a fraction
/// of them leaking members into other, randomly chosen communities.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub communities: usize,
    pub community_size: usize,
    /// Random hyperedges per community, on top of the covering ones.
    pub edges_per_community: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Probability that a random hyperedge swaps one member for a node of
    /// another community.
    pub cross_prob: f64,
    /// `γ` of the first member of each hyperedge; the rest get 1.
    pub lead_gamma: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            communities: 10,
            community_size: 12,
            edges_per_community: 36,
            min_size: 3,
            max_size: 6,
            cross_prob: 0.5,
            lead_gamma: 2.0,
        }
    }
}

fn node(c: usize, i: usize) -> String {
    format!("c{c}n{i}")
}

/// Builds a connected planted-community hypergraph with `ω(e) = |e|`.
///
/// Each community is first covered by hyperedges of size `max_size` (the
/// last one shifted back if a single node is left), then gets
/// `edges_per_community` random hyperedges. The first random hyperedge of
/// each community always crosses into the next one, so the communities
/// are connected in a ring at least.
pub fn planted_communities(cfg: &PlantedConfig, seed: u64) -> Result<Hypergraph> {
    assert!(
        cfg.communities >= 1 && cfg.community_size >= 2,
        "degenerate planted config"
    );
    assert!(2 <= cfg.min_size && cfg.min_size <= cfg.max_size && cfg.max_size <= cfg.community_size);
    let mut rng = rng::stream(seed, &[0x504c_414e]);
    let mut b = Hypergraph::builder();
    let add = |b: &mut crate::hypergraph::HypergraphBuilder, members: Vec<String>| {
        let weighted: Vec<(String, f64)> = members
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, if i == 0 { cfg.lead_gamma } else { 1.0 }))
            .collect();
        let omega = weighted.len() as f64;
        b.add_edge(&weighted, omega).map(|_| ())
    };

    for c in 0..cfg.communities {
        let mut start = 0;
        while start < cfg.community_size {
            let end = (start + cfg.max_size).min(cfg.community_size);
            if end - start < 2 {
                start = end - 2;
            }
            add(&mut b, (start..end).map(|i| node(c, i)).collect())?;
            start = end;
        }
    }
    for c in 0..cfg.communities {
        for j in 0..cfg.edges_per_community {
            let size = rng.random_range(cfg.min_size..=cfg.max_size);
            let mut members: Vec<String> = index::sample(&mut rng, cfg.community_size, size)
                .into_iter()
                .map(|i| node(c, i))
                .collect();
            let cross = cfg.communities > 1 && (j == 0 || rng.random_bool(cfg.cross_prob));
            if cross {
                let other = if j == 0 {
                    (c + 1) % cfg.communities
                } else {
                    (c + rng.random_range(1..cfg.communities)) % cfg.communities
                };
                let slot = rng.random_range(1..size);
                members[slot] = node(other, rng.random_range(0..cfg.community_size));
            }
            add(&mut b, members)?;
        }
    }
    b.build()
}

/// Ground-truth community of a planted node name.
pub fn planted_community(name: &str) -> Option<usize> {
    name.strip_prefix('c')?.split_once('n')?.0.parse().ok()
}

/// Two hyperedges with asymmetric vertex weights sharing a cycle:
/// `{a:2, b:1, c:1}` with `ω = 3` and `{a:1, b:3}` with `ω = 2`.
/// Its Markov walk is not reversible.
pub fn asymmetric_fixture() -> Hypergraph {
    let mut b = Hypergraph::builder();
    b.add_edge(&[("a", 2.0), ("b", 1.0), ("c", 1.0)], 3.0)
        .expect("valid edge");
    b.add_edge(&[("a", 1.0), ("b", 3.0)], 2.0).expect("valid edge");
    b.build().expect("non-empty")
}
