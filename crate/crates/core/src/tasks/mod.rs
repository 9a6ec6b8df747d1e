//! Self-supervised benchmarks: fake-hyperedge detection (with gap curves
//! and intruder regression) and hyperedge prediction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hypergraph::{incidence_matrices, Hypergraph};
use crate::scoring::StepSource;
use crate::walks::{clique_transition, hyperwalk_estimate, markov_transition, StepTransitions, TransitionMatrix};

mod detection;
mod fit;
mod prediction;
pub mod report;

pub use detection::{
    auc, auc_over_pairs, gap_over_steps, run_detection, run_detection_and_gap, DetectionConfig, DetectionEntry,
    DetectionReport, DetectionSummary, FoldAudit, GapCurve,
};
pub use fit::{
    fit_exponential, fit_exponential_points, intruder_line, run_intruders, ExpFit, IntruderFit, IntruderLine,
    IntruderReport,
};
pub use prediction::{
    guess_with_refinement, run_prediction, seen_in, Guess, PredictionConfig, PredictionEntry, PredictionReport,
    PredictionSummary, RefinementConfig, Tally,
};

/// Walk dynamics compared by the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Markovian EDVW hypergraph walk.
    Markov,
    /// Walk on the weighted clique expansion.
    Clique,
    /// Non-Markovian hyperwalk, Monte Carlo estimated.
    Hyperwalk,
    /// Uniformly random scores or guesses; the no-signal baseline.
    Random,
}

impl Method {
    pub const WALKS: [Method; 3] = [Method::Clique, Method::Markov, Method::Hyperwalk];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Markov => "markov",
            Method::Clique => "clique",
            Method::Hyperwalk => "hyperwalk",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markov" | "hyper" | "edvw_hyper" => Ok(Method::Markov),
            "clique" | "edvw_clique" => Ok(Method::Clique),
            "hyperwalk" => Ok(Method::Hyperwalk),
            "random" => Ok(Method::Random),
            other => Err(Error::InvalidParameter {
                name: "methods",
                msg: format!("unknown method `{other}`"),
            }),
        }
    }
}

/// Parses a comma-separated method list such as `clique,markov,hyperwalk`.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter {
            name: "methods",
            msg: "no method given".into(),
        });
    }
    Ok(out)
}

/// Inclusive hyperedge-size range; `hi = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
pub struct SizeBin {
    pub lo: usize,
    pub hi: Option<usize>,
}

impl SizeBin {
    pub fn contains(&self, size: usize) -> bool {
        size >= self.lo && self.hi.is_none_or(|hi| size <= hi)
    }
}

impl fmt::Display for SizeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(hi) => write!(f, "{}-{}", self.lo, hi),
            None => write!(f, "{}-", self.lo),
        }
    }
}

impl Serialize for SizeBin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub const DEFAULT_BINS: &str = "2-2,3-6,7-10,11-";

/// Parses bins such as `3-6,7-10,11-`. Bins must be non-empty and
/// pairwise disjoint; they are returned in ascending order.
pub fn parse_bins(spec: &str) -> Result<Vec<SizeBin>> {
    let bad = |msg: String| Error::InvalidBins {
        spec: spec.to_owned(),
        msg,
    };
    let mut bins = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(bad("empty range".into()));
        }
        let (lo, hi) = match part.split_once('-') {
            Some((lo, hi)) => (lo.trim(), Some(hi.trim())),
            None => (part, None),
        };
        let lo: usize = lo.parse().map_err(|_| bad(format!("bad lower bound in `{part}`")))?;
        let hi = match hi {
            None => Some(lo),
            Some("") => None,
            Some(h) => Some(h.parse().map_err(|_| bad(format!("bad upper bound in `{part}`")))?),
        };
        if lo < 2 || hi.is_some_and(|h| h < lo) {
            return Err(bad(format!("`{part}` is not a valid size range")));
        }
        bins.push(SizeBin { lo, hi });
    }
    bins.sort();
    for pair in bins.windows(2) {
        if pair[0].hi.is_none_or(|h| h >= pair[1].lo) {
            return Err(bad(format!("ranges {} and {} overlap", pair[0], pair[1])));
        }
    }
    Ok(bins)
}

pub(crate) fn bin_of(bins: &[SizeBin], size: usize) -> Option<usize> {
    bins.iter().position(|b| b.contains(size))
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Transition dynamics of one method on a training hypergraph.
pub(crate) enum Dynamics {
    Analytic(TransitionMatrix),
    Empirical(StepTransitions),
}

impl Dynamics {
    pub(crate) fn build(
        train: &Hypergraph,
        method: Method,
        max_steps: usize,
        n_walks: usize,
        seed: u64,
    ) -> Result<Self> {
        match method {
            Method::Markov => Ok(Dynamics::Analytic(markov_transition(&incidence_matrices(train))?)),
            Method::Clique => Ok(Dynamics::Analytic(clique_transition(train)?)),
            Method::Hyperwalk => Ok(Dynamics::Empirical(hyperwalk_estimate(
                train, n_walks, max_steps, seed,
            )?)),
            Method::Random => Err(Error::InvalidParameter {
                name: "methods",
                msg: "the random baseline has no walk dynamics".into(),
            }),
        }
    }

    pub(crate) fn source(&self) -> StepSource<'_> {
        match self {
            Dynamics::Analytic(p) => StepSource::Analytic(p),
            Dynamics::Empirical(s) => StepSource::Empirical(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_parse() {
        let bins = parse_bins("3-6,7-10,11-").unwrap();
        assert_eq!(
            bins,
            vec![
                SizeBin { lo: 3, hi: Some(6) },
                SizeBin { lo: 7, hi: Some(10) },
                SizeBin { lo: 11, hi: None }
            ]
        );
        assert!(bins[2].contains(71));
        assert_eq!(
            bins.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            ["3-6", "7-10", "11-"]
        );
        assert_eq!(parse_bins("2").unwrap(), vec![SizeBin { lo: 2, hi: Some(2) }]);
        for bad in ["", "3-6,,7-", "a-3", "6-3", "3-6,5-8", "1-3", "3-,7-9"] {
            assert!(parse_bins(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn method_lists() {
        assert_eq!(
            parse_methods("clique, markov,hyperwalk,markov").unwrap(),
            vec![Method::Clique, Method::Markov, Method::Hyperwalk]
        );
        assert!(parse_methods("pagerank").is_err());
        assert!(parse_methods("").is_err());
    }
}
