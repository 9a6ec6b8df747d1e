use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use edvw_core::ingest::{read_cables_csv, read_pair_csv, read_party_map, write_hyperedge_list};
use edvw_core::tasks::{self, report, DetectionConfig, Method, PredictionConfig};
use edvw_core::walks::{DEFAULT_STATIONARY_MAX_ITERS, DEFAULT_STATIONARY_TOL};
use edvw_core::{
    balance_report, build_edvw_from_cables, clique_transition, hyperwalk_estimate, incidence_matrices,
    load_hyperedge_list, markov_transition, split_train_probe, stationary, BalanceReport, BalanceThresholds,
    Hypergraph, Level, TransitionMatrix, Weighting,
};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Format, RunConfig, UsageError};

fn core_io(path: &Path) -> impl FnOnce(std::io::Error) -> edvw_core::Error + '_ {
    move |source| edvw_core::Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn open(path: &Path) -> anyhow::Result<File> {
    Ok(File::open(path).map_err(core_io(path))?)
}

fn load(cfg: &RunConfig) -> anyhow::Result<Hypergraph> {
    let path = cfg
        .dataset
        .as_deref()
        .ok_or_else(|| UsageError("--dataset is required".into()))?;
    let h = match cfg.format {
        Format::Hyperedges => {
            let parties = match (&cfg.parties, cfg.weighting) {
                (Some(p), _) => Some(read_party_map(open(p)?)?),
                (None, Weighting::PartyAware) => {
                    return Err(UsageError("party_aware weighting needs --parties".into()).into())
                }
                (None, _) => None,
            };
            let loaded = load_hyperedge_list(path, cfg.weighting, parties.as_ref())?;
            if !loaded.skipped_lines.is_empty() {
                warn!("{} lines skipped", loaded.skipped_lines.len());
            }
            loaded.hypergraph
        }
        Format::CablesCsv => {
            let records = read_cables_csv(open(path)?)?;
            let countries = match (&cfg.country_map, cfg.level) {
                (Some(p), _) => Some(read_pair_csv(open(p)?)?),
                (None, Level::Country) => return Err(UsageError("--level country needs --country-map".into()).into()),
                (None, Level::City) => None,
            };
            let built = build_edvw_from_cables(&records, cfg.level, countries.as_ref())?;
            if !built.rejected.is_empty() || !built.collapsed.is_empty() {
                warn!(
                    "{} cables without receivers, {} collapsed to one node",
                    built.rejected.len(),
                    built.collapsed.len()
                );
            }
            built.hypergraph
        }
    };
    info!("loaded {} nodes, {} hyperedges", h.num_nodes(), h.num_edges());
    Ok(h)
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<&Path> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    fs::write(cfg.out.join("run.cfg"), cfg.to_text())?;
    Ok(&cfg.out)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path: PathBuf = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn ingest(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = load(cfg)?;
    let dir = out_dir(cfg)?;
    let mut w = create(dir, "hyperedges.txt")?;
    write_hyperedge_list(&h, &mut w)?;
    w.flush()?;

    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for e in h.edges() {
        *sizes.entry(e.len()).or_default() += 1;
    }
    println!("nodes\t{}", h.num_nodes());
    println!("edges\t{}", h.num_edges());
    println!("connected\t{}", h.is_connected());
    println!("size\tcount");
    for (size, count) in sizes {
        println!("{size}\t{count}");
    }
    Ok(())
}

fn transition(train: &Hypergraph, method: Method, n_walks: usize, seed: u64) -> edvw_core::Result<TransitionMatrix> {
    match method {
        Method::Markov => markov_transition(&incidence_matrices(train)),
        Method::Clique => clique_transition(train),
        // One-step Monte Carlo estimate; the hyperwalk has no exact matrix.
        Method::Hyperwalk => Ok(hyperwalk_estimate(train, n_walks, 1, seed)?.step(1)),
        Method::Random => unreachable!("filtered out"),
    }
}

pub fn check_balance(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = load(cfg)?;
    let methods: Vec<Method> = cfg.methods.iter().copied().filter(|m| *m != Method::Random).collect();
    if methods.is_empty() {
        return Err(UsageError("check-balance needs a walk method".into()).into());
    }
    let folds: Vec<usize> = (0..cfg.folds).collect();
    let per_fold: Vec<Vec<(Method, BalanceReport)>> = folds
        .par_iter()
        .map(|&fold| -> edvw_core::Result<_> {
            let split = split_train_probe(&h, cfg.probe_fraction, cfg.seed, fold)?;
            let train = h.restrict(&split.train)?;
            methods
                .iter()
                .map(|&m| {
                    let p = transition(&train, m, cfg.n_walks, split.seed.wrapping_add(1))?;
                    let pi = stationary(&p, DEFAULT_STATIONARY_TOL, DEFAULT_STATIONARY_MAX_ITERS)?;
                    Ok((m, balance_report(&p, &pi, BalanceThresholds::default())?))
                })
                .collect()
        })
        .collect::<edvw_core::Result<_>>()?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    println!("method\treversible\tmax_violation\tmean_max_violation\ttotal\tmoderate\tsevere");
    for &m in &methods {
        let reports: Vec<&BalanceReport> = per_fold
            .iter()
            .flatten()
            .filter(|(x, _)| *x == m)
            .map(|(_, r)| r)
            .collect();
        let n = reports.len() as f64;
        let reversible = reports.iter().filter(|r| r.reversible).count();
        let max = reports.iter().map(|r| r.max_violation).fold(0.0, f64::max);
        let mean_max = reports.iter().map(|r| r.mean_max_violation).sum::<f64>() / n;
        let mean = |f: fn(&BalanceReport) -> usize| reports.iter().map(|r| f(r) as f64).sum::<f64>() / n;
        let (total, moderate, severe) = (
            mean(|r| r.total_violations),
            mean(|r| r.moderate_violations),
            mean(|r| r.severe_violations),
        );
        println!(
            "{m}\t{reversible}/{}\t{max:.3e}\t{mean_max:.3e}\t{total:.1}\t{moderate:.1}\t{severe:.1}",
            reports.len()
        );
        summary.push(json!({
            "method": m,
            "reversible_folds": reversible,
            "folds": reports.len(),
            "max_violation": max,
            "mean_max_violation": mean_max,
            "mean_total_violations": total,
            "mean_moderate_violations": moderate,
            "mean_severe_violations": severe,
        }));
    }
    for (fold, reports) in per_fold.iter().enumerate() {
        for (m, r) in reports {
            rows.push(json!({ "fold": fold, "method": m, "report": r }));
        }
    }
    let dir = out_dir(cfg)?;
    let mut w = create(dir, "balance.json")?;
    report::write_json(&json!({ "folds": rows, "summary": summary }), &mut w)?;
    w.flush()?;
    Ok(())
}

fn detection_config(cfg: &RunConfig, default_steps: usize) -> DetectionConfig {
    DetectionConfig {
        folds: cfg.folds,
        probe_fraction: cfg.probe_fraction,
        strategy: cfg.strategy(),
        methods: cfg.methods.clone(),
        max_steps: cfg.k_steps.unwrap_or(default_steps),
        n_walks: cfg.n_walks,
        bins: cfg.bins.clone(),
        n_auc_samples: cfg.n_auc_samples,
        seed: cfg.seed,
    }
}

pub fn detect(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = load(cfg)?;
    let dcfg = detection_config(cfg, 100);
    let rep = tasks::run_detection_and_gap(&h, &dcfg)?;
    let dir = out_dir(cfg)?;
    let mut w = create(dir, "detection.csv")?;
    report::write_detection_csv(&rep, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "detection.json")?;
    report::write_json(&rep, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "gap.tsv")?;
    report::write_gap_tsv(&rep.gap_curves, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "gap_bins.tsv")?;
    report::write_gap_bins_tsv(&rep.gap_curves, &mut w)?;
    w.flush()?;
    if cfg.dump_folds {
        let mut w = create(dir, "folds.json")?;
        report::write_json(&rep.folds, &mut w)?;
        w.flush()?;
    }
    println!("method\tbin\tauc_mean\tauc_std\tfolds");
    for s in &rep.summary {
        println!("{}\t{}\t{:.4}\t{:.4}\t{}", s.method, s.bin, s.mean, s.std, s.folds);
    }
    Ok(())
}

pub fn predict(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = load(cfg)?;
    let pcfg = PredictionConfig {
        folds: cfg.folds,
        probe_fraction: cfg.probe_fraction,
        alpha: cfg.alpha,
        methods: cfg.methods.iter().copied().filter(|m| *m != Method::Random).collect(),
        max_steps: cfg.k_steps.unwrap_or(10),
        n_walks: cfg.n_walks,
        bins: cfg.bins.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
        ..Default::default()
    };
    let rep = tasks::run_prediction(&h, &pcfg)?;
    let dir = out_dir(cfg)?;
    let mut w = create(dir, "prediction.csv")?;
    report::write_prediction_csv(&rep, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "prediction.json")?;
    report::write_json(&rep, &mut w)?;
    w.flush()?;
    let cell = |x: Option<(f64, f64)>| x.map_or_else(|| "-".to_owned(), |(m, s)| format!("{m:.4}±{s:.4}"));
    println!("method\tbin\toverall\tseen\tnovel\tfolds");
    for s in &rep.summary {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.method,
            s.bin,
            cell(s.overall),
            cell(s.seen),
            cell(s.novel),
            s.folds
        );
    }
    Ok(())
}

pub fn intruders(cfg: &RunConfig) -> anyhow::Result<()> {
    let h = load(cfg)?;
    let base = detection_config(cfg, 100);
    let rep = tasks::run_intruders(&h, &base, &cfg.intruders)?;
    let dir = out_dir(cfg)?;
    let mut w = create(dir, "intruders.json")?;
    report::write_json(&rep, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "intruder_gaps.tsv")?;
    writeln!(w, "step\tmethod\tintruders\tgap")?;
    for f in &rep.fits {
        for (k, g) in f.curve.gaps.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{}", k + 1, f.method, f.intruders, g)?;
        }
    }
    w.flush()?;
    println!("method\tintruders\ta\tb\tc");
    for f in &rep.fits {
        println!(
            "{}\t{}\t{:.5}\t{:.5}\t{:.5}",
            f.method, f.intruders, f.fit.a, f.fit.b, f.fit.c
        );
    }
    println!("method\tslope\tintercept\tr2");
    for (m, l) in &rep.lines {
        println!("{m}\t{:.5}\t{:.5}\t{:.4}", l.slope, l.intercept, l.r2);
    }
    Ok(())
}
