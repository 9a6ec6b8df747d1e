//! Report writers: long-format CSV, JSON and gap-curve TSV.

use std::io::{self, Write};

use serde::Serialize;

use super::{DetectionReport, GapCurve, PredictionReport};

const CSV_HEADER: [&str; 5] = ["method", "bin", "fold", "metric", "value"];

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// One row per (method, bin, fold, metric); fold `all` rows carry the
/// mean and std over folds.
pub fn write_detection_csv<W: Write>(report: &DetectionReport, w: W) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for e in &report.entries {
        let (m, b, f) = (e.method.to_string(), e.bin.to_string(), e.fold.to_string());
        for (metric, value) in [
            ("auc", e.auc.to_string()),
            ("best_step", e.best_step.to_string()),
            ("n_true", e.n_true.to_string()),
            ("n_fake", e.n_fake.to_string()),
            ("n_pairs", e.n_pairs.to_string()),
        ] {
            out.write_record([&m, &b, &f, metric, &value])?;
        }
    }
    for s in &report.summary {
        let (m, b) = (s.method.to_string(), s.bin.to_string());
        out.write_record([&m, &b, "all", "auc_mean", &s.mean.to_string()])?;
        out.write_record([&m, &b, "all", "auc_std", &s.std.to_string()])?;
    }
    out.flush()
}

pub fn write_prediction_csv<W: Write>(report: &PredictionReport, w: W) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for e in &report.entries {
        let (m, b, f) = (e.method.to_string(), e.bin.to_string(), e.fold.to_string());
        let t = &e.tally;
        for (metric, value) in [
            ("overall", opt(e.overall)),
            ("seen", opt(e.seen)),
            ("novel", opt(e.novel)),
            ("overall_correct", t.overall_correct.to_string()),
            ("overall_max", t.overall_max.to_string()),
            ("seen_correct", t.seen_correct.to_string()),
            ("seen_max", t.seen_max.to_string()),
            ("novel_correct", t.novel_correct.to_string()),
            ("novel_max", t.novel_max.to_string()),
            ("n_cases", e.n_cases.to_string()),
        ] {
            out.write_record([&m, &b, &f, metric, &value])?;
        }
    }
    for s in &report.summary {
        let (m, b) = (s.method.to_string(), s.bin.to_string());
        for (name, stat) in [("overall", s.overall), ("seen", s.seen), ("novel", s.novel)] {
            out.write_record([&m, &b, "all", &format!("{name}_mean"), &opt(stat.map(|x| x.0))])?;
            out.write_record([&m, &b, "all", &format!("{name}_std"), &opt(stat.map(|x| x.1))])?;
        }
        for (name, v) in ["overall", "seen", "novel"].iter().zip(s.mean_max) {
            out.write_record([&m, &b, "all", &format!("{name}_max_mean"), &v.to_string()])?;
        }
    }
    out.flush()
}

/// `step<TAB>method<TAB>gap` for the curves over all probes.
pub fn write_gap_tsv<W: Write>(curves: &[GapCurve], mut w: W) -> io::Result<()> {
    writeln!(w, "step\tmethod\tgap")?;
    for c in curves.iter().filter(|c| c.bin.is_none()) {
        for (k, g) in c.gaps.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}", k + 1, c.method, g)?;
        }
    }
    Ok(())
}

/// `step<TAB>method<TAB>bin<TAB>gap` for the per-bin curves.
pub fn write_gap_bins_tsv<W: Write>(curves: &[GapCurve], mut w: W) -> io::Result<()> {
    writeln!(w, "step\tmethod\tbin\tgap")?;
    for c in curves {
        let Some(bin) = c.bin else { continue };
        for (k, g) in c.gaps.iter().enumerate() {
            writeln!(w, "{}\t{}\t{}\t{}", k + 1, c.method, bin, g)?;
        }
    }
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}
