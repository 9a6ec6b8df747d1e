//! Dataset ingestion: diplomatic-cable records, plain hyperedge lists and
//! party-aware weighting.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use indexmap::IndexMap;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, HypergraphBuilder};

/// Node granularity for cable hypergraphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// One node per embassy or consulate.
    City,
    /// Missions merged by country.
    Country,
}

/// Metadata of one cable. Only sender, receivers and timestamp are used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CableRecord {
    pub id: String,
    pub sender: String,
    pub receivers: Vec<String>,
    pub timestamp: String,
}

/// Outcome of [`build_edvw_from_cables`].
#[derive(Debug)]
pub struct CableHypergraph {
    pub hypergraph: Hypergraph,
    /// Ids of records without receivers.
    pub rejected: Vec<String>,
    /// Ids of records that collapsed to a single node at the chosen level.
    pub collapsed: Vec<String>,
}

/// Builds the cable hypergraph: one hyperedge per cable, the sender node
/// weighted 2 and every receiver node 1, `ω(e)` equal to the number of
/// distinct nodes. At country level, missions are merged through
/// `countries` (mission → country) and a country has weight 2 iff it
/// contains the sender.
pub fn build_edvw_from_cables(
    records: &[CableRecord],
    level: Level,
    countries: Option<&HashMap<String, String>>,
) -> Result<CableHypergraph> {
    if records.is_empty() {
        return Err(Error::EmptyHypergraph);
    }
    if level == Level::Country && countries.is_none() {
        return Err(Error::InvalidParameter {
            name: "level",
            msg: "country level requires a mission-to-country map".into(),
        });
    }
    let node_of = |mission: &str| -> Result<String> {
        match level {
            Level::City => Ok(mission.to_owned()),
            Level::Country => countries
                .and_then(|m| m.get(mission))
                .cloned()
                .ok_or_else(|| Error::UnknownNode(format!("mission `{mission}` has no country"))),
        }
    };

    let mut builder = Hypergraph::builder();
    let mut rejected = Vec::new();
    let mut collapsed = Vec::new();
    for rec in records {
        if rec.receivers.is_empty() {
            warn!("cable {} has no receivers; rejected", rec.id);
            rejected.push(rec.id.clone());
            continue;
        }
        let mut weights: IndexMap<String, f64> = IndexMap::new();
        weights.insert(node_of(&rec.sender)?, 2.0);
        for r in &rec.receivers {
            weights.entry(node_of(r)?).or_insert(1.0);
        }
        if weights.len() < 2 {
            collapsed.push(rec.id.clone());
            continue;
        }
        let members: Vec<(String, f64)> = weights.into_iter().collect();
        builder.add_edge(&members, members.len() as f64)?;
    }
    Ok(CableHypergraph {
        hypergraph: builder.build()?,
        rejected,
        collapsed,
    })
}

/// Reads cables from CSV with header `id,sender,receivers,timestamp`;
/// receivers are `;`-separated.
pub fn read_cables_csv<R: Read>(reader: R) -> Result<Vec<CableRecord>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        sender: String,
        receivers: String,
        timestamp: String,
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        out.push(CableRecord {
            id: row.id,
            sender: row.sender,
            receivers: row
                .receivers
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect(),
            timestamp: row.timestamp,
        });
    }
    Ok(out)
}

/// Reads a two-column `key,value` CSV (party maps, mission-to-country
/// maps). A header row is optional; it is recognised when its first field
/// is `node` or `mission`.
pub fn read_pair_csv<R: Read>(reader: R) -> Result<HashMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                path: "<pair csv>".into(),
                line: i + 1,
                msg: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        if i == 0 && matches!(&rec[0], "node" | "mission") {
            continue;
        }
        out.insert(rec[0].to_owned(), rec[1].to_owned());
    }
    Ok(out)
}

/// Party affiliation used by [`Weighting::PartyAware`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Dem,
    Rep,
    Unknown,
}

impl Party {
    pub fn parse(s: &str) -> Party {
        match s.trim() {
            "D" | "d" => Party::Dem,
            "R" | "r" => Party::Rep,
            _ => Party::Unknown,
        }
    }
}

pub type PartyMap = HashMap<String, Party>;

pub fn read_party_map<R: Read>(reader: R) -> Result<PartyMap> {
    Ok(read_pair_csv(reader)?
        .into_iter()
        .map(|(k, v)| (k, Party::parse(&v)))
        .collect())
}

/// Party-aware vertex weights of one hyperedge.
///
/// Only members with a known party are kept. With `D_e`, `R_e` the party
/// counts and `r_e = (D_e − R_e)/(D_e + R_e)`, a homogeneous edge gets
/// weight 1 everywhere; a mixed edge gets `1 + s_v·sgn(r_e)·(1 − |r_e|)`
/// with `s_v = +1` for D and `−1` for R.
pub fn party_weights<'a, S: AsRef<str>>(edge: &'a [S], parties: &PartyMap) -> Result<Vec<(&'a str, f64)>> {
    if edge.is_empty() {
        return Err(Error::InvalidEdge("empty edge".into()));
    }
    let known: Vec<(&str, Party)> = edge
        .iter()
        .map(|v| v.as_ref())
        .filter_map(|v| match parties.get(v).copied().unwrap_or(Party::Unknown) {
            Party::Unknown => None,
            p => Some((v, p)),
        })
        .collect();
    if known.is_empty() {
        return Err(Error::InvalidEdge("no member has a known party".into()));
    }
    let dems = known.iter().filter(|(_, p)| *p == Party::Dem).count() as f64;
    let reps = known.len() as f64 - dems;
    let r_e = (dems - reps) / (dems + reps);
    let mixed = dems > 0.0 && reps > 0.0;
    Ok(known
        .into_iter()
        .map(|(v, p)| {
            let w = if mixed {
                let s_v = if p == Party::Dem { 1.0 } else { -1.0 };
                1.0 + s_v * sign(r_e) * (1.0 - r_e.abs())
            } else {
                1.0
            };
            (v, w)
        })
        .collect())
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Vertex-weight convention for hyperedge-list files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `γ_e(v) = 1`, `ω(e) = |e|`.
    Uniform,
    /// First token is the sender: `γ = 2` for it, 1 for the rest; `ω(e) = |e|`.
    SenderFirst,
    /// [`party_weights`] on the known-party members, `ω(e)` = their count.
    PartyAware,
}

/// Result of [`load_hyperedge_list`].
#[derive(Debug)]
pub struct LoadedHypergraph {
    pub hypergraph: Hypergraph,
    /// 1-based line numbers that were skipped.
    pub skipped_lines: Vec<usize>,
}

pub fn load_hyperedge_list(
    path: impl AsRef<Path>,
    weighting: Weighting,
    parties: Option<&PartyMap>,
) -> Result<LoadedHypergraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_hyperedge_list(&text, weighting, parties)
}

/// Parses the hyperedge-list format: one hyperedge per line, node tokens
/// separated by ASCII whitespace, `#` lines are comments. Repeated tokens
/// within a line are merged; lines with fewer than two distinct tokens are
/// skipped. Identical lines produce distinct (parallel) hyperedges.
pub fn parse_hyperedge_list(text: &str, weighting: Weighting, parties: Option<&PartyMap>) -> Result<LoadedHypergraph> {
    if weighting == Weighting::PartyAware && parties.is_none() {
        return Err(Error::InvalidParameter {
            name: "weighting",
            msg: "party_aware weighting requires a party map".into(),
        });
    }
    let mut builder = Hypergraph::builder();
    let mut skipped_lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens: Vec<&str> = Vec::new();
        for tok in line.split_ascii_whitespace() {
            if !tokens.contains(&tok) {
                tokens.push(tok);
            }
        }
        if add_line(&mut builder, &tokens, weighting, parties).is_none() {
            warn!("line {line_no}: skipped ({} usable tokens)", tokens.len());
            skipped_lines.push(line_no);
        }
    }
    Ok(LoadedHypergraph {
        hypergraph: builder.build()?,
        skipped_lines,
    })
}

fn add_line(
    builder: &mut HypergraphBuilder,
    tokens: &[&str],
    weighting: Weighting,
    parties: Option<&PartyMap>,
) -> Option<()> {
    let members: Vec<(&str, f64)> = match weighting {
        Weighting::Uniform => tokens.iter().map(|&t| (t, 1.0)).collect(),
        Weighting::SenderFirst => tokens
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, if i == 0 { 2.0 } else { 1.0 }))
            .collect(),
        Weighting::PartyAware => party_weights(tokens, parties?).ok()?,
    };
    if members.len() < 2 {
        return None;
    }
    let omega = members.len() as f64;
    builder.add_edge(&members, omega).ok().map(|_| ())
}

/// Writes `h` in hyperedge-list format, members in insertion order.
/// Whitespace inside node names is replaced by `_`.
pub fn write_hyperedge_list<W: Write>(h: &Hypergraph, mut out: W) -> io::Result<()> {
    for edge in h.edges() {
        let line: Vec<String> = edge
            .members()
            .iter()
            .map(|&v| h.node_name(v).split_whitespace().collect::<Vec<_>>().join("_"))
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}
