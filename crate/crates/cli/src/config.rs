//! Run configuration: built-in defaults, an optional `key=value` file and
//! command-line flags, applied in that order.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use edvw_core::tasks::{parse_bins, parse_methods, Method, SizeBin, DEFAULT_BINS};
use edvw_core::{Level, Strategy, Weighting};

/// Bad flag value, config key or config file. Maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Hyperedges,
    CablesCsv,
}

impl FromStr for Format {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s {
            "hyperedges" => Ok(Format::Hyperedges),
            "cables_csv" | "cables-csv" => Ok(Format::CablesCsv),
            _ => Err(UsageError(format!("unknown format `{s}` (hyperedges, cables_csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Hyperedges => "hyperedges",
            Format::CablesCsv => "cables_csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Alpha,
    KReplace,
    DegreeMatched,
}

impl FromStr for Sampler {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s {
            "alpha" => Ok(Sampler::Alpha),
            "k-replace" | "k_replace" => Ok(Sampler::KReplace),
            "degree-matched" | "degree_matched" => Ok(Sampler::DegreeMatched),
            _ => Err(UsageError(format!(
                "unknown sampler `{s}` (alpha, k-replace, degree-matched)"
            ))),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Alpha => "alpha",
            Sampler::KReplace => "k-replace",
            Sampler::DegreeMatched => "degree-matched",
        })
    }
}

pub fn parse_weighting(s: &str) -> Result<Weighting, UsageError> {
    match s {
        "uniform" => Ok(Weighting::Uniform),
        "sender_first" | "sender-first" => Ok(Weighting::SenderFirst),
        "party_aware" | "party-aware" => Ok(Weighting::PartyAware),
        _ => Err(UsageError(format!(
            "unknown weighting `{s}` (uniform, sender_first, party_aware)"
        ))),
    }
}

fn weighting_name(w: Weighting) -> &'static str {
    match w {
        Weighting::Uniform => "uniform",
        Weighting::SenderFirst => "sender_first",
        Weighting::PartyAware => "party_aware",
    }
}

pub fn parse_level(s: &str) -> Result<Level, UsageError> {
    match s {
        "city" => Ok(Level::City),
        "country" => Ok(Level::Country),
        _ => Err(UsageError(format!("unknown level `{s}` (city, country)"))),
    }
}

fn level_name(l: Level) -> &'static str {
    match l {
        Level::City => "city",
        Level::Country => "country",
    }
}

pub fn parse_method_list(s: &str) -> Result<Vec<Method>, UsageError> {
    parse_methods(s).map_err(|e| UsageError(e.to_string()))
}

pub fn parse_bin_list(s: &str) -> Result<Vec<SizeBin>, UsageError> {
    parse_bins(s).map_err(|e| UsageError(e.to_string()))
}

pub fn parse_count_list(s: &str) -> Result<Vec<usize>, UsageError> {
    let out: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| UsageError(format!("bad count `{p}` in `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(UsageError("empty count list".into()));
    }
    Ok(out)
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub format: Format,
    pub weighting: Weighting,
    pub level: Level,
    pub country_map: Option<PathBuf>,
    pub parties: Option<PathBuf>,
    pub folds: usize,
    pub probe_fraction: f64,
    pub sampler: Sampler,
    pub alpha: f64,
    pub k: usize,
    pub methods: Vec<Method>,
    /// `None` picks the command's own default horizon.
    pub k_steps: Option<usize>,
    pub n_walks: usize,
    pub bins: Vec<SizeBin>,
    pub n_auc_samples: usize,
    pub trials: usize,
    pub intruders: Vec<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub dump_folds: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            format: Format::Hyperedges,
            weighting: Weighting::SenderFirst,
            level: Level::City,
            country_map: None,
            parties: None,
            folds: 10,
            probe_fraction: 0.1,
            sampler: Sampler::Alpha,
            alpha: 0.5,
            k: 2,
            methods: Method::WALKS.to_vec(),
            k_steps: None,
            n_walks: 10_000,
            bins: parse_bins(DEFAULT_BINS).expect("default bins"),
            n_auc_samples: 1000,
            trials: 1,
            intruders: vec![1, 2, 3],
            seed: 0,
            threads: None,
            out: PathBuf::from("out"),
            dump_folds: false,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value
        .parse()
        .map_err(|_| UsageError(format!("`{key}`: cannot parse `{value}`")))
}

fn flag(key: &str, value: &str) -> Result<bool, UsageError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(UsageError(format!("`{key}`: expected true or false, got `{value}`"))),
    }
}

impl RunConfig {
    /// Sets one field by its flag name (without the leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let value = value.trim();
        match key {
            "dataset" => self.dataset = Some(value.into()),
            "format" => self.format = value.parse()?,
            "weighting" => self.weighting = parse_weighting(value)?,
            "level" => self.level = parse_level(value)?,
            "country-map" => self.country_map = Some(value.into()),
            "parties" => self.parties = Some(value.into()),
            "folds" => self.folds = num(key, value)?,
            "probe-fraction" => self.probe_fraction = num(key, value)?,
            "sampler" => self.sampler = value.parse()?,
            "alpha" => self.alpha = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "methods" => self.methods = parse_method_list(value)?,
            "K-steps" => self.k_steps = Some(num(key, value)?),
            "n-walks" => self.n_walks = num(key, value)?,
            "bins" => self.bins = parse_bin_list(value)?,
            "n-auc-samples" => self.n_auc_samples = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "intruders" => self.intruders = parse_count_list(value)?,
            "seed" => self.seed = num(key, value)?,
            "threads" => self.threads = Some(num(key, value)?),
            "out" => self.out = value.into(),
            "dump-folds" => self.dump_folds = flag(key, value)?,
            _ => return Err(UsageError(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a config file: `key = value` lines, `#` comments.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), UsageError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("{origin}:{}: expected key=value", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| UsageError(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// File representation; [`RunConfig::apply_text`] on the default reads it back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        if let Some(d) = &self.dataset {
            kv("dataset", d.display().to_string());
        }
        kv("format", self.format.to_string());
        kv("weighting", weighting_name(self.weighting).into());
        kv("level", level_name(self.level).into());
        if let Some(p) = &self.country_map {
            kv("country-map", p.display().to_string());
        }
        if let Some(p) = &self.parties {
            kv("parties", p.display().to_string());
        }
        kv("folds", self.folds.to_string());
        kv("probe-fraction", self.probe_fraction.to_string());
        kv("sampler", self.sampler.to_string());
        kv("alpha", self.alpha.to_string());
        kv("k", self.k.to_string());
        kv("methods", join(&self.methods));
        if let Some(k) = self.k_steps {
            kv("K-steps", k.to_string());
        }
        kv("n-walks", self.n_walks.to_string());
        kv("bins", join(&self.bins));
        kv("n-auc-samples", self.n_auc_samples.to_string());
        kv("trials", self.trials.to_string());
        kv("intruders", join(&self.intruders));
        kv("seed", self.seed.to_string());
        if let Some(t) = self.threads {
            kv("threads", t.to_string());
        }
        kv("out", self.out.display().to_string());
        kv("dump-folds", self.dump_folds.to_string());
        s
    }

    pub fn strategy(&self) -> Strategy {
        match self.sampler {
            Sampler::Alpha => Strategy::Alpha { alpha: self.alpha },
            Sampler::KReplace => Strategy::KReplace { k: self.k },
            Sampler::DegreeMatched => Strategy::DegreeMatched { k: self.k },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("dataset", "data/cables.csv").unwrap();
        cfg.set("format", "cables_csv").unwrap();
        cfg.set("level", "country").unwrap();
        cfg.set("country-map", "map.csv").unwrap();
        cfg.set("sampler", "degree-matched").unwrap();
        cfg.set("methods", "markov,random").unwrap();
        cfg.set("bins", "3-6,7-10,11-").unwrap();
        cfg.set("K-steps", "25").unwrap();
        cfg.set("probe-fraction", "0.15").unwrap();
        cfg.set("threads", "3").unwrap();
        cfg.set("dump-folds", "true").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_text(), "test").unwrap();
        assert_eq!(back, cfg);

        let mut plain = RunConfig::default();
        plain.apply_text(&RunConfig::default().to_text(), "test").unwrap();
        assert_eq!(plain, RunConfig::default());
    }

    #[test]
    fn defaults_follow_the_protocol() {
        let cfg = RunConfig::default();
        assert_eq!((cfg.folds, cfg.n_walks, cfg.alpha, cfg.k), (10, 10_000, 0.5, 2));
    }

    #[test]
    fn file_errors_carry_line_numbers() {
        let mut cfg = RunConfig::default();
        let err = cfg
            .apply_text("# comment\nfolds = 4\nbogus = 1\n", "run.cfg")
            .unwrap_err();
        assert!(err.0.starts_with("run.cfg:3:"), "{err}");
        assert_eq!(cfg.folds, 4);
        assert!(cfg.apply_text("folds 4", "x").is_err());
        assert!(cfg.set("bins", "7-3").is_err());
    }
}
