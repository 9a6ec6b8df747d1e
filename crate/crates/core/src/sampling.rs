//! Train/probe splitting and fake-hyperedge generation.

use std::collections::HashSet;

use log::warn;
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{spans_connected, EdgeId, Hypergraph, NodeId};
use crate::rng::{self, StreamRng};

/// Attempts per fake before its probe is skipped.
pub const RETRY_BUDGET: usize = 100;

/// Disjoint training and probe hyperedges of one fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub seed: u64,
    /// Number of probes requested.
    pub target: usize,
    pub train: Vec<EdgeId>,
    pub probe: Vec<EdgeId>,
}

impl FoldSplit {
    pub fn probe_fraction(&self, total: usize) -> f64 {
        self.probe.len() as f64 / total as f64
    }
}

/// Draws probe hyperedges one at a time in a seeded random order.
///
/// A candidate is accepted only if the remaining training hyperedges still
/// cover and connect every node of `h`, and the candidate is not a strict
/// subset of any remaining training hyperedge. Stops at
/// `round(probe_fraction·|E|)` probes or when candidates run out.
pub fn split_train_probe(h: &Hypergraph, probe_fraction: f64, seed: u64, fold_index: usize) -> Result<FoldSplit> {
    if !(probe_fraction > 0.0 && probe_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "probe_fraction",
            msg: format!("must lie in (0, 1), got {probe_fraction}"),
        });
    }
    if !h.is_connected() {
        return Err(Error::Disconnected);
    }
    let ne = h.num_edges();
    let target = (probe_fraction * ne as f64).round() as usize;
    let mut rng = rng::stream(seed, &[rng::TAG_SPLIT, fold_index as u64]);
    let mut order: Vec<EdgeId> = (0..ne).collect();
    order.shuffle(&mut rng);

    let sets: Vec<Vec<NodeId>> = h.edges().iter().map(|e| e.sorted_members()).collect();
    let mut in_train = vec![true; ne];
    let mut probe = Vec::with_capacity(target);
    for &cand in &order {
        if probe.len() >= target {
            break;
        }
        in_train[cand] = false;
        let leaks = strict_subset_of_training(h, &sets, &in_train, cand);
        if leaks || !spans_connected(h, &in_train) {
            in_train[cand] = true;
            continue;
        }
        probe.push(cand);
    }
    if probe.len() < target {
        warn!(
            "fold {fold_index}: only {} of {target} probes satisfy the split constraints",
            probe.len()
        );
    }
    Ok(FoldSplit {
        fold_index,
        seed,
        target,
        train: (0..ne).filter(|&e| in_train[e]).collect(),
        probe,
    })
}

fn strict_subset_of_training(h: &Hypergraph, sets: &[Vec<NodeId>], in_train: &[bool], cand: EdgeId) -> bool {
    let members = &sets[cand];
    // every superset contains the first member
    h.incident_edges(members[0]).iter().any(|&e| {
        in_train[e] && sets[e].len() > members.len() && members.iter().all(|v| sets[e].binary_search(v).is_ok())
    })
}

/// Fake-hyperedge generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// Replace `clamp(⌊(1−α)|e|⌋, 1, |e|−1)` members uniformly.
    Alpha { alpha: f64 },
    /// Replace `min(k, |e|−1)` members uniformly.
    KReplace { k: usize },
    /// Replace `min(k, |e|−1)` members by nodes of nearest degree.
    DegreeMatched { k: usize },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Alpha { .. } => "alpha",
            Strategy::KReplace { .. } => "k-replace",
            Strategy::DegreeMatched { .. } => "degree-matched",
        }
    }

    /// Number of members replaced in a hyperedge of size `len`.
    pub fn replacements(&self, len: usize) -> usize {
        match *self {
            Strategy::Alpha { alpha } => alpha_count(alpha, len),
            Strategy::KReplace { k } | Strategy::DegreeMatched { k } => k.min(len - 1),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Strategy::Alpha { alpha } if !(0.0..1.0).contains(&alpha) => Err(Error::InvalidParameter {
                name: "alpha",
                msg: format!("must lie in [0, 1), got {alpha}"),
            }),
            Strategy::KReplace { k: 0 } | Strategy::DegreeMatched { k: 0 } => Err(Error::InvalidParameter {
                name: "k",
                msg: "must be at least 1".into(),
            }),
            _ => Ok(()),
        }
    }
}

/// `clamp(⌊(1−α)·len⌋, 1, len−1)`.
pub fn alpha_count(alpha: f64, len: usize) -> usize {
    (((1.0 - alpha) * len as f64).floor() as usize).clamp(1, len - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FakeEdge {
    /// Members of the fake, replacements in the positions they took over.
    pub members: Vec<NodeId>,
    /// Probe hyperedge the fake was derived from.
    pub source: EdgeId,
    pub replaced: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeSet {
    pub strategy: Strategy,
    pub fakes: Vec<FakeEdge>,
    /// Probes for which no fresh fake was found within the retry budget.
    pub skipped: Vec<EdgeId>,
}

/// Sorted member sets of every hyperedge of `h`.
pub struct EdgeSetIndex(HashSet<Vec<NodeId>>);

impl EdgeSetIndex {
    pub fn new(h: &Hypergraph) -> Self {
        Self(h.edges().iter().map(|e| e.sorted_members()).collect())
    }

    pub fn contains(&self, members: &[NodeId]) -> bool {
        let mut key = members.to_vec();
        key.sort_unstable();
        self.0.contains(&key)
    }
}

pub fn sample_alpha(h: &Hypergraph, probes: &[EdgeId], alpha: f64, seed: u64) -> Result<NegativeSet> {
    sample_negatives(h, probes, Strategy::Alpha { alpha }, seed)
}

pub fn sample_k_replace(h: &Hypergraph, probes: &[EdgeId], k: usize, seed: u64) -> Result<NegativeSet> {
    sample_negatives(h, probes, Strategy::KReplace { k }, seed)
}

pub fn sample_degree_matched(h: &Hypergraph, probes: &[EdgeId], k: usize, seed: u64) -> Result<NegativeSet> {
    sample_negatives(h, probes, Strategy::DegreeMatched { k }, seed)
}

/// One fake per probe. Replacement nodes are distinct and lie outside the
/// probe; a fake equal (as a set) to any hyperedge of `h` is redrawn, up to
/// [`RETRY_BUDGET`] attempts. Each probe draws from its own stream.
pub fn sample_negatives(h: &Hypergraph, probes: &[EdgeId], strategy: Strategy, seed: u64) -> Result<NegativeSet> {
    strategy.validate()?;
    let existing = EdgeSetIndex::new(h);
    let by_degree = DegreeIndex::new(h);
    let mut fakes = Vec::with_capacity(probes.len());
    let mut skipped = Vec::new();
    for (i, &p) in probes.iter().enumerate() {
        let mut rng = rng::stream(seed, &[rng::TAG_NEGATIVE, i as u64, p as u64]);
        let source = h.edge(p).members();
        let m = strategy.replacements(source.len());
        let fake = (0..RETRY_BUDGET).find_map(|_| {
            let candidate = match strategy {
                Strategy::DegreeMatched { .. } => replace_degree_matched(h, &by_degree, source, m, &mut rng),
                _ => replace_uniform(h.num_nodes(), source, m, &mut rng),
            }?;
            (!existing.contains(&candidate)).then_some(candidate)
        });
        match fake {
            Some(members) => fakes.push(FakeEdge {
                members,
                source: p,
                replaced: m,
            }),
            None => {
                warn!("probe {p}: no fresh fake after {RETRY_BUDGET} attempts; skipped");
                skipped.push(p);
            }
        }
    }
    Ok(NegativeSet {
        strategy,
        fakes,
        skipped,
    })
}

fn replace_uniform(n: usize, source: &[NodeId], m: usize, rng: &mut StreamRng) -> Option<Vec<NodeId>> {
    let outside: Vec<NodeId> = (0..n).filter(|v| !source.contains(v)).collect();
    if outside.len() < m {
        return None;
    }
    let positions = index::sample(rng, source.len(), m);
    let picks = index::sample(rng, outside.len(), m);
    let mut fake = source.to_vec();
    for (pos, pick) in positions.iter().zip(picks.iter()) {
        fake[pos] = outside[pick];
    }
    Some(fake)
}

/// Nodes sorted by unweighted degree `|E(v)|`, for nearest-degree lookup.
pub struct DegreeIndex {
    sorted: Vec<(usize, NodeId)>,
    degree: Vec<usize>,
}

impl DegreeIndex {
    pub fn new(h: &Hypergraph) -> Self {
        let degree: Vec<usize> = (0..h.num_nodes()).map(|v| h.unweighted_degree(v)).collect();
        let mut sorted: Vec<(usize, NodeId)> = degree.iter().copied().zip(0..).collect();
        sorted.sort_unstable();
        Self { sorted, degree }
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.degree[v]
    }

    /// A node not in `excluded` whose degree is closest to `target`; ties
    /// among equally close nodes are broken uniformly at random.
    pub fn nearest<R: Rng + ?Sized>(&self, target: usize, excluded: &[NodeId], rng: &mut R) -> Option<NodeId> {
        let pos = self.sorted.partition_point(|&(d, _)| d < target);
        let (mut lo, mut hi) = (pos, pos); // candidates are sorted[..lo] and sorted[hi..]
        loop {
            let below = lo.checked_sub(1).map(|i| target - self.sorted[i].0);
            let above = self.sorted.get(hi).map(|&(d, _)| d - target);
            let dist = match (below, above) {
                (None, None) => return None,
                (Some(b), None) => b,
                (None, Some(a)) => a,
                (Some(b), Some(a)) => b.min(a),
            };
            let mut ties = Vec::new();
            while lo > 0 && target - self.sorted[lo - 1].0 == dist {
                lo -= 1;
                ties.push(self.sorted[lo].1);
            }
            while hi < self.sorted.len() && self.sorted[hi].0 - target == dist {
                ties.push(self.sorted[hi].1);
                hi += 1;
            }
            ties.retain(|v| !excluded.contains(v));
            if !ties.is_empty() {
                ties.sort_unstable();
                return Some(ties[rng.random_range(0..ties.len())]);
            }
        }
    }
}

fn replace_degree_matched(
    h: &Hypergraph,
    by_degree: &DegreeIndex,
    source: &[NodeId],
    m: usize,
    rng: &mut StreamRng,
) -> Option<Vec<NodeId>> {
    let positions = index::sample(rng, source.len(), m);
    let mut fake = source.to_vec();
    let mut excluded = source.to_vec();
    for pos in positions.iter() {
        let replaced = source[pos];
        let pick = by_degree.nearest(h.unweighted_degree(replaced), &excluded, rng)?;
        excluded.push(pick);
        fake[pos] = pick;
    }
    Some(fake)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_counts() {
        assert_eq!(alpha_count(0.5, 3), 1);
        assert_eq!(alpha_count(0.5, 10), 5);
        assert_eq!(alpha_count(0.99, 3), 1);
        assert_eq!(alpha_count(0.0, 4), 3);
        assert_eq!(Strategy::KReplace { k: 2 }.replacements(5), 2);
        assert_eq!(Strategy::KReplace { k: 2 }.replacements(2), 1);
    }

    #[test]
    fn strict_subset_probe_is_never_drawn() {
        let mut b = Hypergraph::builder();
        b.add_uniform(&["a", "b"]).unwrap();
        b.add_uniform(&["a", "b", "c"]).unwrap();
        b.add_uniform(&["c", "d"]).unwrap();
        b.add_uniform(&["a", "d"]).unwrap();
        let h = b.build().unwrap();
        for seed in 0..50 {
            let split = split_train_probe(&h, 0.5, seed, 0).unwrap();
            assert!(!split.probe.contains(&0), "seed {seed}");
        }
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let mut b = Hypergraph::builder();
        b.add_uniform(&["a", "b"]).unwrap();
        b.add_uniform(&["c", "d"]).unwrap();
        let h = b.build().unwrap();
        assert!(matches!(split_train_probe(&h, 0.1, 0, 0), Err(Error::Disconnected)));
        assert!(split_train_probe(&h, 1.0, 0, 0).is_err());
    }

    #[test]
    fn nearest_degree_lookup() {
        // degrees: a=3, b=1, c=1, d=2, e=1
        let mut b = Hypergraph::builder();
        b.add_uniform(&["a", "b"]).unwrap();
        b.add_uniform(&["a", "c"]).unwrap();
        b.add_uniform(&["a", "d"]).unwrap();
        b.add_uniform(&["d", "e"]).unwrap();
        let h = b.build().unwrap();
        let idx = DegreeIndex::new(&h);
        let mut rng = rng::stream(0, &[]);
        let d = h.node_index("d").unwrap();
        let a = h.node_index("a").unwrap();
        assert_eq!(idx.nearest(2, &[], &mut rng), Some(d));
        // a (3) and b, c, e (1) are all one away from 2
        for _ in 0..20 {
            let v = idx.nearest(2, &[d], &mut rng).unwrap();
            assert_eq!(idx.degree(v).abs_diff(2), 1);
        }
        assert_eq!(idx.nearest(3, &[a], &mut rng), Some(d));
        let all: Vec<NodeId> = (0..5).collect();
        assert_eq!(idx.nearest(1, &all, &mut rng), None);
    }

    #[test]
    fn tiny_pool_exhausts_retries() {
        let mut b = Hypergraph::builder();
        b.add_uniform(&["a", "b"]).unwrap();
        b.add_uniform(&["b", "c"]).unwrap();
        b.add_uniform(&["a", "c"]).unwrap();
        let h = b.build().unwrap();
        // every possible pair already exists
        let neg = sample_k_replace(&h, &[0], 1, 5).unwrap();
        assert!(neg.fakes.is_empty());
        assert_eq!(neg.skipped, vec![0]);
    }
}
