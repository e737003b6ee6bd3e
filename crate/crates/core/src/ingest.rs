//! Temporal hyperedge records: JSONL parsing, frequency filtering and
//! windowing into per-time-unit snapshots.
//!
//! One record per line, `{"t": <int>, "nodes": [<label>...], "w": <number>}`
//! with `w` optional (default 1). Input may be gzip-compressed; that is
//! detected from the magic bytes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::scalar::Scalar;

fn default_weight() -> f64 {
    1.0
}

fn is_unit(w: &f64) -> bool {
    *w == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalHyperedgeRecord {
    pub t: i64,
    pub nodes: Vec<String>,
    #[serde(default = "default_weight", skip_serializing_if = "is_unit")]
    pub w: f64,
}

impl TemporalHyperedgeRecord {
    pub fn new(t: i64, nodes: Vec<String>, w: f64) -> Self {
        Self { t, nodes, w }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.nodes.len() < 2 {
            return Err(format!("hyperedge needs at least 2 members, got {}", self.nodes.len()));
        }
        let distinct: BTreeSet<&str> = self.nodes.iter().map(String::as_str).collect();
        if distinct.len() != self.nodes.len() {
            return Err("hyperedge repeats a member".into());
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(format!("weight must be positive and finite, got {}", self.w));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Any malformed line fails the whole parse.
    #[default]
    Strict,
    /// Malformed lines are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub records: Vec<TemporalHyperedgeRecord>,
    pub errors: Vec<LineError>,
}

/// Parse JSONL from any reader. Blank lines are ignored; line numbers are
/// 1-based.
pub fn parse_jsonl<R: BufRead>(reader: R, strictness: Strictness) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<TemporalHyperedgeRecord>(text)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|()| r));
        match parsed {
            Ok(r) => out.records.push(r),
            Err(message) => out.errors.push(LineError { line: idx + 1, message }),
        }
    }
    if strictness == Strictness::Strict {
        if let Some(first) = out.errors.first() {
            return Err(Error::ParseReport {
                count: out.errors.len(),
                first_line: first.line,
                first_message: first.message.clone(),
            });
        }
    }
    Ok(out)
}

/// Open a file for line reading, transparently decompressing gzip.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let got = file.read(&mut magic)?;
    let file = File::open(path)?;
    if got == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

pub fn read_jsonl_file(path: &Path, strictness: Strictness) -> Result<ParseOutcome> {
    parse_jsonl(open_input(path)?, strictness)
}

/// One compact JSON object per line, LF-terminated.
pub fn write_jsonl<W: Write>(records: &[TemporalHyperedgeRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Keep the `n` most frequent entities of every window of `window_len`
/// time units (windows anchored at the earliest timestamp), then restrict
/// every record to the union of those sets. Frequency counts one per record
/// occurrence; ties go to the lexicographically smaller label.
pub fn filter_top_entities(
    records: &[TemporalHyperedgeRecord],
    n: usize,
    window_len: u32,
) -> Vec<TemporalHyperedgeRecord> {
    assert!(n >= 1 && window_len >= 1, "n and window_len must be positive");
    let Some(t0) = records.iter().map(|r| r.t).min() else {
        return Vec::new();
    };
    let mut counts: BTreeMap<i64, HashMap<&str, usize>> = BTreeMap::new();
    for r in records {
        let window = (r.t - t0).div_euclid(i64::from(window_len));
        let c = counts.entry(window).or_default();
        for v in &r.nodes {
            *c.entry(v.as_str()).or_default() += 1;
        }
    }
    let mut keep: BTreeSet<&str> = BTreeSet::new();
    for c in counts.values() {
        let mut ranked: Vec<(&str, usize)> = c.iter().map(|(&k, &v)| (k, v)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        keep.extend(ranked.into_iter().take(n).map(|(k, _)| k));
    }
    records
        .iter()
        .filter_map(|r| {
            let nodes: Vec<String> = r.nodes.iter().filter(|v| keep.contains(v.as_str())).cloned().collect();
            (nodes.len() >= 2).then(|| TemporalHyperedgeRecord::new(r.t, nodes, r.w))
        })
        .collect()
}

/// Number of records per time unit.
pub fn counts_by_time(records: &[TemporalHyperedgeRecord]) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for r in records {
        *out.entry(r.t).or_default() += 1;
    }
    out
}

/// The latest maximal run of consecutive time units whose record count
/// exceeds `min_count`.
pub fn active_span(records: &[TemporalHyperedgeRecord], min_count: usize) -> Option<(i64, i64)> {
    let counts = counts_by_time(records);
    let mut best = None;
    let mut run: Option<(i64, i64)> = None;
    for (&t, &c) in &counts {
        if c <= min_count {
            run = None;
            continue;
        }
        run = match run {
            Some((s, e)) if e + 1 == t => Some((s, t)),
            _ => Some((t, t)),
        };
        best = run;
    }
    best
}

/// One hypergraph per time unit over a shared node universe.
#[derive(Debug, Clone)]
pub struct SnapshotSequence<S> {
    labels: Vec<String>,
    times: Vec<i64>,
    snapshots: Vec<Hypergraph<S>>,
}

impl<S: Scalar> SnapshotSequence<S> {
    pub fn new(labels: Vec<String>, times: Vec<i64>, snapshots: Vec<Hypergraph<S>>) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: snapshots.len(),
            });
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("snapshot times must be strictly increasing".into()));
        }
        if let Some(h) = snapshots.iter().find(|h| h.labels() != labels.as_slice()) {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: h.num_nodes(),
            });
        }
        Ok(Self {
            labels,
            times,
            snapshots,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn universe(&self) -> usize {
        self.labels.len()
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Hypergraph<S>] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &Hypergraph<S> {
        &self.snapshots[i]
    }

    /// Snapshots without hyperedges.
    pub fn is_empty_snapshot(&self, i: usize) -> bool {
        self.snapshots[i].num_edges() == 0
    }

    pub fn empty_flags(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_empty_snapshot(i)).collect()
    }

    pub fn to_records(&self) -> Vec<TemporalHyperedgeRecord> {
        let mut out = Vec::new();
        for (&t, h) in self.times.iter().zip(&self.snapshots) {
            for e in h.edges() {
                out.push(TemporalHyperedgeRecord::new(
                    t,
                    e.nodes().iter().map(|&v| self.labels[v].clone()).collect(),
                    e.weight().as_f64(),
                ));
            }
        }
        out
    }
}

/// Materialize one snapshot per time unit in `[start, end]`. The universe is
/// every label in `records`, sorted, so an entity has the same index in all
/// snapshots. Weights are divided by the global maximum when it exceeds 1.
pub fn window_snapshots<S: Scalar>(
    records: &[TemporalHyperedgeRecord],
    start: i64,
    end: i64,
) -> Result<SnapshotSequence<S>> {
    if start > end {
        return Err(Error::Domain(format!("window start {start} after end {end}")));
    }
    let labels: Vec<String> = records
        .iter()
        .flat_map(|r| r.nodes.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let max_w = records.iter().map(|r| r.w).fold(0.0, f64::max);
    let scale = if max_w > 1.0 { max_w } else { 1.0 };
    let mut by_time: BTreeMap<i64, Vec<(Vec<usize>, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| (start..=end).contains(&r.t)) {
        by_time
            .entry(r.t)
            .or_default()
            .push((r.nodes.iter().map(|v| index[v.as_str()]).collect(), r.w / scale));
    }
    let times: Vec<i64> = (start..=end).collect();
    let snapshots = times
        .par_iter()
        .map(|t| {
            let raw = by_time.get(t).cloned().unwrap_or_default();
            Hypergraph::from_raw_edges(labels.clone(), raw)
        })
        .collect::<Result<Vec<_>>>()?;
    SnapshotSequence::new(labels, times, snapshots)
}
