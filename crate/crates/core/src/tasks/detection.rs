//! Fake-hyperedge detection and score-gap curves.

use ndarray::Array2;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{bin_of, mean_std, Dynamics, Method, SizeBin};
use crate::error::{Error, Result};
use crate::hypergraph::{EdgeId, Hypergraph, NodeId};
use crate::rng;
use crate::sampling::{sample_negatives, split_train_probe, FoldSplit, NegativeSet, Strategy};
use crate::scoring::{hyperedge_score, SimilarityMatrix, SimilarityMode};

/// `(n″ + 0.5·n′)/n` over all `n = |true|·|fake|` pairs, where `n″` counts
/// pairs with the true score strictly higher and `n′` counts ties.
pub fn auc(true_scores: &[f64], fake_scores: &[f64]) -> Result<f64> {
    if true_scores.is_empty() || fake_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    check_finite(true_scores)?;
    check_finite(fake_scores)?;
    let mut fakes = fake_scores.to_vec();
    fakes.sort_by(f64::total_cmp);
    let (mut wins, mut ties) = (0u64, 0u64);
    for &t in true_scores {
        let below = fakes.partition_point(|&f| f < t);
        let not_above = fakes.partition_point(|&f| f <= t);
        wins += below as u64;
        ties += (not_above - below) as u64;
    }
    let n = true_scores.len() as u64 * fake_scores.len() as u64;
    Ok((wins as f64 + 0.5 * ties as f64) / n as f64)
}

/// AUC restricted to the given `(true index, fake index)` pairs.
pub fn auc_over_pairs(true_scores: &[f64], fake_scores: &[f64], pairs: &[(usize, usize)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyScores);
    }
    let (mut wins, mut ties) = (0u64, 0u64);
    for &(i, j) in pairs {
        let (t, f) = (true_scores[i], fake_scores[j]);
        if t > f {
            wins += 1;
        } else if t == f {
            ties += 1;
        }
    }
    Ok((wins as f64 + 0.5 * ties as f64) / pairs.len() as f64)
}

fn check_finite(xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "scores",
            msg: "scores must be finite".into(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionConfig {
    pub folds: usize,
    pub probe_fraction: f64,
    pub strategy: Strategy,
    pub methods: Vec<Method>,
    /// Largest walk horizon `K`.
    pub max_steps: usize,
    /// Hyperwalk Monte Carlo walks per start vertex.
    pub n_walks: usize,
    pub bins: Vec<SizeBin>,
    /// Cap on (true, fake) pairs per bin and fold.
    pub n_auc_samples: usize,
    pub seed: u64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            probe_fraction: 0.1,
            strategy: Strategy::Alpha { alpha: 0.5 },
            methods: Method::WALKS.to_vec(),
            max_steps: 100,
            n_walks: 10_000,
            bins: super::parse_bins(super::DEFAULT_BINS).expect("default bins"),
            n_auc_samples: 1000,
            seed: 0,
        }
    }
}

impl DetectionConfig {
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
        if self.max_steps == 0 {
            return bad("K", "must be at least 1");
        }
        if self.n_walks == 0 {
            return bad("n_walks", "must be at least 1");
        }
        if self.n_auc_samples == 0 {
            return bad("n_auc_samples", "must be at least 1");
        }
        if self.methods.is_empty() {
            return bad("methods", "no method given");
        }
        if self.bins.is_empty() {
            return bad("bins", "no size bin given");
        }
        Ok(())
    }
}

/// Best AUC of one method in one size bin and fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionEntry {
    pub method: Method,
    pub bin: SizeBin,
    pub fold: usize,
    /// Maximum AUC over horizons `K' = 1..=K`.
    pub auc: f64,
    /// Horizon attaining it (first one on ties).
    pub best_step: usize,
    pub n_true: usize,
    pub n_fake: usize,
    pub n_pairs: usize,
}

/// Mean ± std over folds of the per-fold best AUC.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub method: Method,
    pub bin: SizeBin,
    pub mean: f64,
    pub std: f64,
    pub folds: usize,
}

/// Mean over folds of `mean(true scores) − mean(fake scores)` under the
/// per-step similarity `S_k`, for `k = 1..=K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCurve {
    pub method: Method,
    /// `None` for the curve over all probes.
    pub bin: Option<SizeBin>,
    pub gaps: Vec<f64>,
}

impl GapCurve {
    /// `(k, gap)` points with `k` starting at 1.
    pub fn points(&self) -> (Vec<f64>, Vec<f64>) {
        ((1..=self.gaps.len()).map(|k| k as f64).collect(), self.gaps.clone())
    }
}

/// Split and negatives of one fold, kept for auditing.
#[derive(Debug, Clone, Serialize)]
pub struct FoldAudit {
    pub split: FoldSplit,
    pub negatives: NegativeSet,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub config: DetectionConfig,
    pub entries: Vec<DetectionEntry>,
    pub summary: Vec<DetectionSummary>,
    pub gap_curves: Vec<GapCurve>,
    #[serde(skip)]
    pub folds: Vec<FoldAudit>,
}

/// Detection benchmark: per fold, split the hyperedges, derive fakes from
/// the probes, build each method's averaged similarity on the training
/// hyperedges only, score probes and fakes, and compute per-bin AUCs.
/// For each (method, bin, fold) the best AUC over horizons is kept.
pub fn run_detection(h: &Hypergraph, cfg: &DetectionConfig) -> Result<DetectionReport> {
    evaluate(h, cfg, true, false)
}

/// Gap curves per method (overall and per bin) using `S_k = P^k`.
pub fn gap_over_steps(h: &Hypergraph, cfg: &DetectionConfig) -> Result<Vec<GapCurve>> {
    Ok(evaluate(h, cfg, false, true)?.gap_curves)
}

/// [`run_detection`] and [`gap_over_steps`] sharing folds and walks.
pub fn run_detection_and_gap(h: &Hypergraph, cfg: &DetectionConfig) -> Result<DetectionReport> {
    evaluate(h, cfg, true, true)
}

struct FoldResult {
    audit: FoldAudit,
    entries: Vec<DetectionEntry>,
    // per method (walk methods only), per curve (all, bins...), per step
    gaps: Vec<(Method, Curves)>,
}

fn evaluate(h: &Hypergraph, cfg: &DetectionConfig, detect: bool, gap: bool) -> Result<DetectionReport> {
    cfg.validate()?;
    let folds: Vec<FoldResult> = (0..cfg.folds)
        .into_par_iter()
        .map(|fold| evaluate_fold(h, cfg, fold, detect, gap))
        .collect::<Result<_>>()?;

    let mut entries: Vec<DetectionEntry> = folds.iter().flat_map(|f| f.entries.iter().cloned()).collect();
    let order = |m: &Method| cfg.methods.iter().position(|x| x == m);
    entries.sort_by_key(|e| (order(&e.method), e.bin, e.fold));

    let mut summary = Vec::new();
    for &method in &cfg.methods {
        for &bin in &cfg.bins {
            let aucs: Vec<f64> = entries
                .iter()
                .filter(|e| e.method == method && e.bin == bin)
                .map(|e| e.auc)
                .collect();
            if aucs.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&aucs);
            summary.push(DetectionSummary {
                method,
                bin,
                mean,
                std,
                folds: aucs.len(),
            });
        }
    }

    let mut gap_curves = Vec::new();
    if gap {
        for &method in cfg.methods.iter().filter(|m| **m != Method::Random) {
            let curve_labels = std::iter::once(None).chain(cfg.bins.iter().copied().map(Some));
            for (c, label) in curve_labels.enumerate() {
                let per_fold: Vec<&Vec<f64>> = folds
                    .iter()
                    .filter_map(|f| f.gaps.iter().find(|(m, _)| *m == method))
                    .filter_map(|(_, curves)| curves[c].as_ref())
                    .collect();
                if per_fold.is_empty() {
                    continue;
                }
                let gaps = (0..cfg.max_steps)
                    .map(|k| per_fold.iter().map(|g| g[k]).sum::<f64>() / per_fold.len() as f64)
                    .collect();
                gap_curves.push(GapCurve {
                    method,
                    bin: label,
                    gaps,
                });
            }
        }
    }

    Ok(DetectionReport {
        config: cfg.clone(),
        entries,
        summary,
        gap_curves,
        folds: folds.into_iter().map(|f| f.audit).collect(),
    })
}

/// Hyperedges to score in one fold: probes first, then fakes.
struct Items {
    members: Vec<Vec<NodeId>>,
    n_true: usize,
    // bin of every item (by source probe size)
    bin: Vec<Option<usize>>,
}

fn evaluate_fold(h: &Hypergraph, cfg: &DetectionConfig, fold: usize, detect: bool, gap: bool) -> Result<FoldResult> {
    let split = split_train_probe(h, cfg.probe_fraction, cfg.seed, fold)?;
    let neg_seed = rng::derive_seed(cfg.seed, &[rng::TAG_NEGATIVE, fold as u64]);
    let negatives = sample_negatives(h, &split.probe, cfg.strategy, neg_seed)?;
    let train = h.restrict(&split.train)?;
    debug_assert_eq!(train.num_nodes(), h.num_nodes());

    let size = |e: EdgeId| h.edge(e).len();
    let mut members: Vec<Vec<NodeId>> = split.probe.iter().map(|&e| h.edge(e).members().to_vec()).collect();
    let mut bin: Vec<Option<usize>> = split.probe.iter().map(|&e| bin_of(&cfg.bins, size(e))).collect();
    for f in &negatives.fakes {
        members.push(f.members.clone());
        bin.push(bin_of(&cfg.bins, size(f.source)));
    }
    let items = Items {
        members,
        n_true: split.probe.len(),
        bin,
    };

    // AUC pairs per bin are drawn once and shared by all methods and horizons.
    let bin_pairs: Vec<Option<BinPairs>> = (0..cfg.bins.len())
        .map(|b| BinPairs::draw(&items, b, cfg, fold))
        .collect();

    let per_method: Vec<MethodResult> = cfg
        .methods
        .par_iter()
        .map(|&method| evaluate_method(&train, cfg, fold, method, &items, &bin_pairs, detect, gap))
        .collect::<Result<_>>()?;
    let mut entries = Vec::new();
    let mut gaps = Vec::new();
    for (e, g) in per_method {
        entries.extend(e);
        gaps.extend(g);
    }
    Ok(FoldResult {
        audit: FoldAudit { split, negatives },
        entries,
        gaps,
    })
}

type Curves = Vec<Option<Vec<f64>>>;
type MethodResult = (Vec<DetectionEntry>, Option<(Method, Curves)>);

#[allow(clippy::too_many_arguments)]
fn evaluate_method(
    train: &Hypergraph,
    cfg: &DetectionConfig,
    fold: usize,
    method: Method,
    items: &Items,
    bin_pairs: &[Option<BinPairs>],
    detect: bool,
    gap: bool,
) -> Result<MethodResult> {
    if method == Method::Random {
        if !detect {
            return Ok((Vec::new(), None));
        }
        let mut rng = rng::stream(cfg.seed, &[rng::TAG_RANDOM_SCORE, fold as u64]);
        let scores: Vec<f64> = (0..items.members.len()).map(|_| rng.random::<f64>()).collect();
        let mut tracker = BestAuc::new(cfg.bins.len());
        tracker.update(1, &scores, bin_pairs)?;
        return Ok((tracker.entries(method, &cfg.bins, fold, bin_pairs), None));
    }
    let walk_seed = rng::derive_seed(cfg.seed, &[rng::TAG_WALK, fold as u64, method as u64]);
    let dynamics = Dynamics::build(train, method, cfg.max_steps, cfg.n_walks, walk_seed)?;
    let mut tracker = BestAuc::new(cfg.bins.len());
    let mut curves: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.max_steps); cfg.bins.len() + 1];
    let mut running: Option<Array2<f64>> = None;
    let mut failure = None;
    dynamics.source().for_each_step(cfg.max_steps, |k, m| {
        if failure.is_some() {
            return;
        }
        if detect {
            let acc = match running.as_mut() {
                Some(acc) => {
                    *acc += m;
                    acc
                }
                None => running.insert(m.clone()),
            };
            let s = SimilarityMatrix {
                s: &*acc / k as f64,
                mode: SimilarityMode::Averaged,
                steps: k,
            };
            if let Err(e) = score_all(&s, items).and_then(|sc| tracker.update(k, &sc, bin_pairs)) {
                failure = Some(e);
                return;
            }
        }
        if gap {
            let s = SimilarityMatrix {
                s: m.clone(),
                mode: SimilarityMode::PerStep,
                steps: k,
            };
            match score_all(&s, items) {
                Ok(scores) => {
                    for (c, curve) in curves.iter_mut().enumerate() {
                        let filter = if c == 0 { None } else { Some(c - 1) };
                        curve.push(gap_of(&scores, items, filter).unwrap_or(f64::NAN));
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let entries = if detect {
        tracker.entries(method, &cfg.bins, fold, bin_pairs)
    } else {
        Vec::new()
    };
    let curves = gap.then(|| {
        let curves = curves
            .into_iter()
            .map(|c| (!c.is_empty() && c.iter().all(|g| !g.is_nan())).then_some(c))
            .collect();
        (method, curves)
    });
    Ok((entries, curves))
}

fn score_all(s: &SimilarityMatrix, items: &Items) -> Result<Vec<f64>> {
    items.members.par_iter().map(|m| hyperedge_score(s, m)).collect()
}

fn gap_of(scores: &[f64], items: &Items, bin: Option<usize>) -> Option<f64> {
    let keep = |i: usize| bin.is_none() || items.bin[i] == bin;
    let mean = |range: std::ops::Range<usize>| {
        let xs: Vec<f64> = range.filter(|&i| keep(i)).map(|i| scores[i]).collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    Some(mean(0..items.n_true)? - mean(items.n_true..scores.len())?)
}

/// Item indices of one bin and the (true, fake) pairs compared.
struct BinPairs {
    trues: Vec<usize>,
    fakes: Vec<usize>,
    // None: full cross product
    sampled: Option<Vec<(usize, usize)>>,
}

impl BinPairs {
    fn draw(items: &Items, b: usize, cfg: &DetectionConfig, fold: usize) -> Option<Self> {
        let in_bin = |i: &usize| items.bin[*i] == Some(b);
        let trues: Vec<usize> = (0..items.n_true).filter(in_bin).collect();
        let fakes: Vec<usize> = (items.n_true..items.members.len()).filter(in_bin).collect();
        if trues.is_empty() || fakes.is_empty() {
            return None;
        }
        let total = trues.len() * fakes.len();
        let sampled = (total > cfg.n_auc_samples).then(|| {
            let mut rng = rng::stream(cfg.seed, &[rng::TAG_AUC, fold as u64, b as u64]);
            let mut picks = index::sample(&mut rng, total, cfg.n_auc_samples).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|p| (p / fakes.len(), p % fakes.len())).collect()
        });
        Some(Self { trues, fakes, sampled })
    }

    fn n_pairs(&self) -> usize {
        self.sampled
            .as_ref()
            .map_or(self.trues.len() * self.fakes.len(), Vec::len)
    }

    fn auc(&self, scores: &[f64]) -> Result<f64> {
        let t: Vec<f64> = self.trues.iter().map(|&i| scores[i]).collect();
        let f: Vec<f64> = self.fakes.iter().map(|&i| scores[i]).collect();
        match &self.sampled {
            Some(pairs) => auc_over_pairs(&t, &f, pairs),
            None => auc(&t, &f),
        }
    }
}

struct BestAuc {
    best: Vec<Option<(f64, usize)>>,
}

impl BestAuc {
    fn new(bins: usize) -> Self {
        Self { best: vec![None; bins] }
    }

    fn update(&mut self, step: usize, scores: &[f64], pairs: &[Option<BinPairs>]) -> Result<()> {
        for (b, p) in pairs.iter().enumerate() {
            let Some(p) = p else { continue };
            let a = p.auc(scores)?;
            if self.best[b].is_none_or(|(best, _)| a > best) {
                self.best[b] = Some((a, step));
            }
        }
        Ok(())
    }

    fn entries(
        &self,
        method: Method,
        bins: &[SizeBin],
        fold: usize,
        pairs: &[Option<BinPairs>],
    ) -> Vec<DetectionEntry> {
        self.best
            .iter()
            .zip(pairs)
            .enumerate()
            .filter_map(|(b, (best, p))| {
                let (auc, best_step) = (*best)?;
                let p = p.as_ref()?;
                Some(DetectionEntry {
                    method,
                    bin: bins[b],
                    fold,
                    auc,
                    best_step,
                    n_true: p.trues.len(),
                    n_fake: p.fakes.len(),
                    n_pairs: p.n_pairs(),
                })
            })
            .collect()
    }
}
