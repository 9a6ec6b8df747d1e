//! Hyperedge prediction: recover deleted members of probe hyperedges by
//! greedy similarity maximization with cycle-pivot refinement.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::{bin_of, mean_std, Dynamics, Method, SizeBin};
use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph, NodeId};
use crate::rng;
use crate::sampling::{alpha_count, split_train_probe};
use crate::scoring::{hyperedge_score, similarity_steps, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RefinementConfig {
    pub n_passes: usize,
    pub early_stop: bool,
    /// Consecutive non-improving passes tolerated before stopping early.
    pub patience: usize,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            n_passes: 5,
            early_stop: true,
            patience: 2,
        }
    }
}

/// Result of [`guess_with_refinement`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guess {
    pub nodes: Vec<NodeId>,
    /// Score of the greedy fill under the last similarity matrix.
    pub greedy_score: Option<f64>,
    /// Score of the returned guess under the last similarity matrix.
    pub score: Option<f64>,
}

/// Guesses `m` nodes completing `preserved`.
///
/// Fill position `t` (1-based) uses `steps[min(t, len) − 1]` and adds the
/// unused pool node maximizing the score of `preserved ∪ chosen ∪ {j}`;
/// ties go to the earliest node in `pool`. Refinement pass `p` keeps only
/// the pivot `guessed[(p − 1) mod |guessed|]`, refills the other `m − 1`
/// slots the same way and accepts the result iff its score under the last
/// matrix strictly improves. If the pool runs dry the partial guess is
/// returned.
pub fn guess_with_refinement(
    preserved: &[NodeId],
    m: usize,
    steps: &[SimilarityMatrix],
    pool: &[NodeId],
    cfg: &RefinementConfig,
) -> Result<Guess> {
    if preserved.is_empty() {
        return Err(Error::InvalidParameter {
            name: "preserved",
            msg: "at least one preserved node is required".into(),
        });
    }
    let Some(last) = steps.last() else {
        return Err(Error::InvalidParameter {
            name: "steps",
            msg: "at least one similarity matrix is required".into(),
        });
    };
    if m == 0 {
        return Ok(Guess {
            nodes: Vec::new(),
            greedy_score: None,
            score: None,
        });
    }

    let score_of = |s: &SimilarityMatrix, chosen: &[NodeId]| -> Result<f64> {
        let mut set = Vec::with_capacity(preserved.len() + chosen.len());
        set.extend_from_slice(preserved);
        set.extend_from_slice(chosen);
        hyperedge_score(s, &set)
    };
    let fill = |chosen: &mut Vec<NodeId>| -> Result<()> {
        while chosen.len() < m {
            let t = chosen.len() + 1;
            let s = &steps[t.min(steps.len()) - 1];
            let mut best: Option<(f64, NodeId)> = None;
            let mut trial = chosen.clone();
            for &j in pool {
                if chosen.contains(&j) {
                    continue;
                }
                trial.push(j);
                let sc = score_of(s, &trial)?;
                trial.pop();
                if best.is_none_or(|(b, _)| sc > b) {
                    best = Some((sc, j));
                }
            }
            match best {
                Some((_, j)) => chosen.push(j),
                None => break,
            }
        }
        Ok(())
    };

    let mut guessed = Vec::with_capacity(m);
    fill(&mut guessed)?;
    if guessed.is_empty() {
        return Ok(Guess {
            nodes: guessed,
            greedy_score: None,
            score: None,
        });
    }
    let greedy_score = score_of(last, &guessed)?;
    let mut current = greedy_score;
    let mut stale = 0;
    for p in 1..=cfg.n_passes {
        let pivot = guessed[(p - 1) % guessed.len()];
        let mut candidate = vec![pivot];
        fill(&mut candidate)?;
        let sc = score_of(last, &candidate)?;
        if sc > current {
            guessed = candidate;
            current = sc;
            stale = 0;
        } else {
            stale += 1;
            if cfg.early_stop && stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(Guess {
        nodes: guessed,
        greedy_score: Some(greedy_score),
        score: Some(current),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionConfig {
    pub folds: usize,
    pub probe_fraction: f64,
    /// Deletes `clamp(⌊(1−α)|e|⌋, 1, |e|−1)` members per probe.
    pub alpha: f64,
    /// Walk methods; the random baseline is always added.
    pub methods: Vec<Method>,
    pub max_steps: usize,
    pub n_walks: usize,
    pub bins: Vec<SizeBin>,
    /// Independent deletion draws per probe.
    pub trials: usize,
    pub refinement: RefinementConfig,
    pub seed: u64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            probe_fraction: 0.1,
            alpha: 0.5,
            methods: Method::WALKS.to_vec(),
            max_steps: 10,
            n_walks: 10_000,
            bins: super::parse_bins(super::DEFAULT_BINS).expect("default bins"),
            trials: 1,
            refinement: RefinementConfig::default(),
            seed: 0,
        }
    }
}

impl PredictionConfig {
    fn validate(&self) -> Result<()> {
        let bad = |name, msg: &str| {
            Err(Error::InvalidParameter {
                name,
                msg: msg.to_owned(),
            })
        };
        if self.folds == 0 {
            return bad("folds", "must be at least 1");
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha", "must lie in [0, 1)");
        }
        if self.max_steps == 0 {
            return bad("K", "must be at least 1");
        }
        if self.n_walks == 0 {
            return bad("n_walks", "must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1");
        }
        if self.bins.is_empty() {
            return bad("bins", "no size bin given");
        }
        Ok(())
    }

    fn all_methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = self.methods.iter().copied().filter(|m| *m != Method::Random).collect();
        out.push(Method::Random);
        out
    }
}

/// Correct guesses and their theoretical maxima, summed over the probes
/// of one (method, bin, fold).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub overall_correct: usize,
    pub overall_max: usize,
    pub seen_correct: usize,
    pub seen_max: usize,
    pub novel_correct: usize,
    pub novel_max: usize,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.overall_correct += o.overall_correct;
        self.overall_max += o.overall_max;
        self.seen_correct += o.seen_correct;
        self.seen_max += o.seen_max;
        self.novel_correct += o.novel_correct;
        self.novel_max += o.novel_max;
    }

    fn ratio(correct: usize, max: usize) -> Option<f64> {
        (max > 0).then(|| correct as f64 / max as f64)
    }

    pub fn overall_ratio(&self) -> Option<f64> {
        Self::ratio(self.overall_correct, self.overall_max)
    }

    pub fn seen_ratio(&self) -> Option<f64> {
        Self::ratio(self.seen_correct, self.seen_max)
    }

    pub fn novel_ratio(&self) -> Option<f64> {
        Self::ratio(self.novel_correct, self.novel_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionEntry {
    pub method: Method,
    pub bin: SizeBin,
    pub fold: usize,
    /// Probe deletions evaluated (probes × trials).
    pub n_cases: usize,
    pub tally: Tally,
    pub overall: Option<f64>,
    pub seen: Option<f64>,
    pub novel: Option<f64>,
}

/// Mean ± std over folds of each ratio, over the folds where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionSummary {
    pub method: Method,
    pub bin: SizeBin,
    pub overall: Option<(f64, f64)>,
    pub seen: Option<(f64, f64)>,
    pub novel: Option<(f64, f64)>,
    /// Mean theoretical maxima per deletion case.
    pub mean_max: [f64; 3],
    pub folds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub config: PredictionConfig,
    pub entries: Vec<PredictionEntry>,
    pub summary: Vec<PredictionSummary>,
}

/// One deletion draw on one probe.
struct Case {
    bin: usize,
    preserved: Vec<NodeId>,
    deleted: Vec<NodeId>,
    pool: Vec<NodeId>,
    key: [u64; 3],
}

/// Prediction benchmark. Per fold and probe, deletes members, guesses
/// them back with each method on the training hyperedges plus a uniform
/// random baseline, and tallies correct guesses as seen (preserved ∪
/// correct lies inside a training hyperedge) or novel.
pub fn run_prediction(h: &Hypergraph, cfg: &PredictionConfig) -> Result<PredictionReport> {
    cfg.validate()?;
    let methods = cfg.all_methods();
    let per_fold: Vec<Vec<PredictionEntry>> = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| predict_fold(h, cfg, &methods, fold))
        .collect::<Result<_>>()?;
    let entries: Vec<PredictionEntry> = per_fold.into_iter().flatten().collect();

    let mut summary = Vec::new();
    for &method in &methods {
        for &bin in &cfg.bins {
            let rows: Vec<&PredictionEntry> = entries.iter().filter(|e| e.method == method && e.bin == bin).collect();
            if rows.is_empty() {
                continue;
            }
            let agg = |f: fn(&PredictionEntry) -> Option<f64>| {
                let xs: Vec<f64> = rows.iter().filter_map(|e| f(e)).collect();
                (!xs.is_empty()).then(|| mean_std(&xs))
            };
            let cases: usize = rows.iter().map(|e| e.n_cases).sum();
            let mut total = Tally::default();
            rows.iter().for_each(|e| total.add(&e.tally));
            let per_case = |x: usize| x as f64 / cases as f64;
            summary.push(PredictionSummary {
                method,
                bin,
                overall: agg(|e| e.overall),
                seen: agg(|e| e.seen),
                novel: agg(|e| e.novel),
                mean_max: [
                    per_case(total.overall_max),
                    per_case(total.seen_max),
                    per_case(total.novel_max),
                ],
                folds: rows.len(),
            });
        }
    }
    Ok(PredictionReport {
        config: cfg.clone(),
        entries,
        summary,
    })
}

fn predict_fold(
    h: &Hypergraph,
    cfg: &PredictionConfig,
    methods: &[Method],
    fold: usize,
) -> Result<Vec<PredictionEntry>> {
    let split = split_train_probe(h, cfg.probe_fraction, cfg.seed, fold)?;
    let train = h.restrict(&split.train)?;

    let mut cases = Vec::new();
    for (pi, &e) in split.probe.iter().enumerate() {
        let edge = h.edge(e);
        let Some(bin) = bin_of(&cfg.bins, edge.len()) else {
            continue;
        };
        let m = alpha_count(cfg.alpha, edge.len());
        for trial in 0..cfg.trials {
            cases.push(draw_case(
                h,
                e,
                m,
                bin,
                cfg.seed,
                [fold as u64, pi as u64, trial as u64],
            ));
        }
    }

    let per_method: Vec<Vec<PredictionEntry>> = methods
        .par_iter()
        .map(|&method| predict_method(&train, cfg, fold, method, &cases))
        .collect::<Result<_>>()?;
    Ok(per_method.into_iter().flatten().collect())
}

fn predict_method(
    train: &Hypergraph,
    cfg: &PredictionConfig,
    fold: usize,
    method: Method,
    cases: &[Case],
) -> Result<Vec<PredictionEntry>> {
    let mut entries = Vec::new();
    let steps = match method {
        Method::Random => None,
        _ => {
            let walk_seed = rng::derive_seed(cfg.seed, &[rng::TAG_WALK, fold as u64, method as u64]);
            let dynamics = Dynamics::build(train, method, cfg.max_steps, cfg.n_walks, walk_seed)?;
            Some(similarity_steps(dynamics.source(), cfg.max_steps)?)
        }
    };
    let tallies: Vec<Tally> = cases
        .par_iter()
        .map(|c| {
            let guess = match &steps {
                Some(steps) => {
                    let k = cfg.max_steps.min(c.deleted.len()).max(1);
                    guess_with_refinement(&c.preserved, c.deleted.len(), &steps[..k], &c.pool, &cfg.refinement)?.nodes
                }
                None => random_guess(c, cfg.seed),
            };
            Ok(tally(c, &guess, train))
        })
        .collect::<Result<_>>()?;
    for (b, &bin) in cfg.bins.iter().enumerate() {
        let mut total = Tally::default();
        let mut n_cases = 0;
        for (c, t) in cases.iter().zip(&tallies) {
            if c.bin == b {
                total.add(t);
                n_cases += 1;
            }
        }
        if n_cases == 0 {
            continue;
        }
        entries.push(PredictionEntry {
            method,
            bin,
            fold,
            n_cases,
            tally: total,
            overall: total.overall_ratio(),
            seen: total.seen_ratio(),
            novel: total.novel_ratio(),
        });
    }
    Ok(entries)
}

fn draw_case(h: &Hypergraph, e: EdgeId, m: usize, bin: usize, seed: u64, key: [u64; 3]) -> Case {
    let members = h.edge(e).members();
    let mut rng = rng::stream(seed, &[rng::TAG_DELETE, key[0], key[1], key[2]]);
    let mut gone = vec![false; members.len()];
    for i in index::sample(&mut rng, members.len(), m) {
        gone[i] = true;
    }
    let (mut deleted, mut preserved) = (Vec::new(), Vec::new());
    for (&v, &g) in members.iter().zip(&gone) {
        if g {
            deleted.push(v);
        } else {
            preserved.push(v);
        }
    }
    let pool = (0..h.num_nodes()).filter(|v| !preserved.contains(v)).collect();
    Case {
        bin,
        preserved,
        deleted,
        pool,
        key,
    }
}

fn random_guess(c: &Case, seed: u64) -> Vec<NodeId> {
    let mut rng = rng::stream(seed, &[rng::TAG_BASELINE, c.key[0], c.key[1], c.key[2]]);
    let m = c.deleted.len().min(c.pool.len());
    index::sample(&mut rng, c.pool.len(), m)
        .into_iter()
        .map(|i| c.pool[i])
        .collect()
}

/// Whether `nodes` lie together inside some hyperedge of `train`, i.e.
/// form a seen interaction.
pub fn seen_in(train: &Hypergraph, nodes: &[NodeId]) -> bool {
    let Some(&first) = nodes.first() else {
        return true;
    };
    train
        .incident_edges(first)
        .iter()
        .any(|&e| nodes.iter().all(|&v| train.edge(e).contains(v)))
}

fn tally(c: &Case, guess: &[NodeId], train: &Hypergraph) -> Tally {
    let m = c.deleted.len();
    let correct: Vec<NodeId> = guess.iter().copied().filter(|v| c.deleted.contains(v)).collect();
    let with = |extra: &[NodeId]| -> Vec<NodeId> { c.preserved.iter().chain(extra).copied().collect() };

    let seen = seen_in(train, &with(&correct));
    let seen_max = train
        .incident_edges(c.preserved[0])
        .iter()
        .map(|&e| train.edge(e))
        .filter(|e| c.preserved.iter().all(|&v| e.contains(v)))
        .map(|e| c.deleted.iter().filter(|&&v| e.contains(v)).count())
        .max()
        .unwrap_or(0);
    let novel_max = if seen_in(train, &with(&c.deleted)) { 0 } else { m };

    let k = correct.len();
    Tally {
        overall_correct: k,
        overall_max: m,
        seen_correct: if seen { k } else { 0 },
        seen_max,
        novel_correct: if seen { 0 } else { k },
        novel_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::SimilarityMode;
    use ndarray::arr2;

    fn sim(rows: ndarray::Array2<f64>) -> SimilarityMatrix {
        SimilarityMatrix {
            s: rows,
            mode: SimilarityMode::PerStep,
            steps: 1,
        }
    }

    #[test]
    fn nothing_to_guess() {
        let s = sim(ndarray::Array2::eye(3));
        let g = guess_with_refinement(&[0], 0, &[s], &[1, 2], &RefinementConfig::default()).unwrap();
        assert!(g.nodes.is_empty());
    }

    #[test]
    fn greedy_picks_the_most_similar_node() {
        let s = sim(arr2(&[
            [0.5, 0.5, 0.0, 0.0],
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.5],
            [0.0, 0.0, 0.5, 0.5],
        ]));
        let g = guess_with_refinement(&[0], 1, &[s], &[1, 2, 3], &RefinementConfig::default()).unwrap();
        assert_eq!(g.nodes, vec![1]);
        assert!(g.score.unwrap() >= g.greedy_score.unwrap());
    }

    #[test]
    fn exhausted_pool_returns_partial_guess() {
        let s = sim(ndarray::Array2::from_elem((3, 3), 1.0 / 3.0));
        let g = guess_with_refinement(&[0], 4, &[s], &[1, 2], &RefinementConfig::default()).unwrap();
        assert_eq!(g.nodes.len(), 2);
    }

    #[test]
    fn accounting_identity() {
        let c = Case {
            bin: 0,
            preserved: vec![0],
            deleted: vec![1, 2],
            pool: vec![1, 2, 3],
            key: [0; 3],
        };
        let mut b = Hypergraph::builder();
        b.add_uniform(&["0", "1", "4"]).unwrap();
        b.add_uniform(&["2", "3"]).unwrap();
        let train = b.build().unwrap();
        let id = |name: &str| train.node_index(name).unwrap();
        let c = Case {
            preserved: vec![id("0")],
            deleted: vec![id("1"), id("2")],
            pool: vec![id("1"), id("2"), id("3")],
            ..c
        };
        let t = tally(&c, &[id("1"), id("3")], &train);
        assert_eq!((t.overall_correct, t.seen_correct, t.novel_correct), (1, 1, 0));
        assert_eq!((t.seen_max, t.novel_max), (1, 2));
        let t = tally(&c, &[id("1"), id("2")], &train);
        assert_eq!((t.overall_correct, t.seen_correct, t.novel_correct), (2, 0, 2));
    }
}
