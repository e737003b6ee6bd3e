use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hgcpd::evalharness::{evaluate_dataset, summarize, DatasetScores, MethodSummary};
use hgcpd::ingest::{
    active_span, filter_top_entities, read_jsonl_file, window_snapshots, write_jsonl, SnapshotSequence, Strictness,
};
use hgcpd::pipeline::{detect, sequence_spectra, Detection, ReductionMethod};
use hgcpd::synthgen::{generate_sequence, GroundTruth};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub fn dataset_stem(index: usize) -> String {
    format!("dataset_{index:03}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthFile {
    changes: Vec<i64>,
    n_by_t: Vec<usize>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    master_seed: u64,
    /// Dataset i is drawn from ChaCha stream i under the master seed.
    datasets: Vec<ManifestEntry>,
    scenario: &'a hgcpd::synthgen::ScenarioConfig,
}

#[derive(Serialize)]
struct ManifestEntry {
    name: String,
    stream: u64,
}

/// Writes `dataset_XXX.jsonl` and `dataset_XXX.truth.json` for every
/// dataset plus a `manifest.json` recording the seeds.
pub fn cmd_generate(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let scenario = cfg.scenario()?;
    let written: Vec<PathBuf> = (0..cfg.datasets)
        .into_par_iter()
        .map(|i| -> Result<PathBuf> {
            let (seq, truth) = generate_sequence::<f64>(&scenario, i as u64)?;
            let stem = dataset_stem(i);
            let data = out_dir.join(format!("{stem}.jsonl"));
            let mut w = create(&data)?;
            write_jsonl(&seq.to_records(), &mut w)?;
            write_truth(&out_dir.join(format!("{stem}.truth.json")), &truth)?;
            Ok(data)
        })
        .collect::<Result<_>>()?;
    write_json(
        &out_dir.join("manifest.json"),
        &Manifest {
            master_seed: scenario.seed,
            datasets: (0..cfg.datasets)
                .map(|i| ManifestEntry {
                    name: dataset_stem(i),
                    stream: i as u64,
                })
                .collect(),
            scenario: &scenario,
        },
    )?;
    Ok(written)
}

fn write_truth(path: &Path, truth: &GroundTruth) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, truth)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Parse, optionally filter and window a JSONL dataset.
pub fn load_sequence(cfg: &RunConfig, input: &Path) -> Result<SnapshotSequence<f64>> {
    let strictness = if cfg.lenient { Strictness::Lenient } else { Strictness::Strict };
    let parsed = read_jsonl_file(input, strictness).with_context(|| format!("reading {}", input.display()))?;
    for e in &parsed.errors {
        log::warn!("{}:{}: {}", input.display(), e.line, e.message);
    }
    let mut records = parsed.records;
    if let Some(n) = cfg.top_entities {
        records = filter_top_entities(&records, n, cfg.window_len);
    }
    if records.is_empty() {
        bail!("{} contains no usable hyperedges", input.display());
    }
    let (mut start, mut end) = match cfg.min_count {
        Some(c) => active_span(&records, c)
            .with_context(|| format!("no time unit has more than {c} hyperedges"))?,
        None => (
            records.iter().map(|r| r.t).min().unwrap_or(0),
            records.iter().map(|r| r.t).max().unwrap_or(0),
        ),
    };
    start = cfg.start.unwrap_or(start);
    end = cfg.end.unwrap_or(end);
    Ok(window_snapshots(&records, start, end)?)
}

#[derive(Serialize)]
struct DetectMeta<'a> {
    input: String,
    method: ReductionMethod,
    k: usize,
    embedding_dim: usize,
    window: usize,
    convention: &'a str,
    prediction: String,
    largest_component: bool,
    gadget_laplacian: String,
    star_weighting: &'a str,
    eigen_seed: u64,
    snapshots: usize,
    empty_snapshots: Vec<i64>,
}

pub fn write_scores(path: &Path, d: &Detection<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["t", "Z", "Z_hat", "is_predicted_change"])?;
    for i in 0..d.times.len() {
        w.write_record([
            d.times[i].to_string(),
            d.z[i].to_string(),
            d.z_hat[i].to_string(),
            u8::from(d.predicted[i]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Run detection for one input and method; writes the score CSV and a
/// `.meta.json` sidecar next to it.
pub fn detect_one(cfg: &RunConfig, method: ReductionMethod, input: &Path, output: &Path) -> Result<Detection<f64>> {
    let seq = load_sequence(cfg, input)?;
    let det_cfg = cfg.detection(method)?;
    let d = detect(&seq, &det_cfg).with_context(|| format!("{method} on {}", input.display()))?;
    write_scores(output, &d)?;
    write_json(
        &output.with_extension("meta.json"),
        &DetectMeta {
            input: input.display().to_string(),
            method,
            k: det_cfg.k,
            embedding_dim: det_cfg.embedding_dim(seq.universe()),
            window: det_cfg.window,
            convention: &cfg.convention,
            prediction: format!("{:?}", det_cfg.prediction),
            largest_component: det_cfg.largest_component,
            gadget_laplacian: det_cfg.gadget_laplacian.to_string(),
            star_weighting: &cfg.star_weighting,
            eigen_seed: det_cfg.eigen.seed,
            snapshots: seq.len(),
            empty_snapshots: d
                .times
                .iter()
                .zip(&d.empty)
                .filter_map(|(&t, &e)| e.then_some(t))
                .collect(),
        },
    )?;
    Ok(d)
}

/// `dataset_*.jsonl` files of a directory, sorted by name.
pub fn dataset_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("dataset_") && (name.ends_with(".jsonl") || name.ends_with(".jsonl.gz")) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no dataset_*.jsonl files in {}", dir.display());
    }
    Ok(out)
}

fn stem_of(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("dataset");
    name.trim_end_matches(".gz").trim_end_matches(".jsonl").to_string()
}

/// Detection over every dataset of `data_dir` for every configured method,
/// written to `runs_dir/<method>/<dataset>.csv`.
pub fn cmd_detect_all(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let files = dataset_files(&cfg.data_dir)?;
    let mut written = Vec::new();
    for &method in &cfg.methods {
        let outs: Vec<PathBuf> = files
            .par_iter()
            .map(|f| {
                let out = cfg.runs_dir.join(method.name()).join(format!("{}.csv", stem_of(f)));
                detect_one(cfg, method, f, &out).map(|_| out)
            })
            .collect::<Result<_>>()?;
        written.extend(outs);
    }
    Ok(written)
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    t: i64,
    #[serde(rename = "Z_hat")]
    z_hat: f64,
}

pub fn read_scores(path: &Path) -> Result<(Vec<i64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut times = Vec::new();
    let mut z_hat = Vec::new();
    for row in r.deserialize() {
        let row: ScoreRow = row.with_context(|| format!("parsing {}", path.display()))?;
        times.push(row.t);
        z_hat.push(row.z_hat);
    }
    Ok((times, z_hat))
}

pub fn read_truth(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let truth: TruthFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(truth.changes)
}

#[derive(Debug, Clone)]
pub struct DatasetResult {
    pub method: ReductionMethod,
    pub dataset: String,
    pub scores: DatasetScores,
}

/// Score every `runs_dir/<method>/*.csv` against `data_dir/*.truth.json`.
pub fn cmd_eval(cfg: &RunConfig) -> Result<(Vec<MethodSummary>, Vec<DatasetResult>)> {
    let eval = cfg.eval();
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let dir = cfg.runs_dir.join(method.name());
        let mut csvs: Vec<PathBuf> = fs::read_dir(&dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        csvs.sort();
        if csvs.is_empty() {
            bail!("no score files in {}", dir.display());
        }
        let mut scores = Vec::new();
        for path in csvs {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let truth = read_truth(&cfg.data_dir.join(format!("{stem}.truth.json")))?;
            let (times, z_hat) = read_scores(&path)?;
            let s = evaluate_dataset(&z_hat, &times, &truth, &eval).with_context(|| format!("scoring {}", path.display()))?;
            scores.push(s);
            rows.push(DatasetResult {
                method,
                dataset: stem,
                scores: s,
            });
        }
        summaries.push(summarize(method.name(), &scores)?);
    }
    Ok((summaries, rows))
}

pub fn write_table(path: &Path, summaries: &[MethodSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "method",
        "f1_at_3pct",
        "avg_f1",
        "timing_error",
        "f1_at_count",
        "timing_error_at_count",
        "datasets",
    ])?;
    for s in summaries {
        w.write_record([
            s.method.clone(),
            format!("{:.6}", s.mean.f1_at_fraction),
            format!("{:.6}", s.mean.avg_f1),
            format!("{:.6}", s.mean.timing_error),
            format!("{:.6}", s.mean.f1_at_count),
            format!("{:.6}", s.mean.timing_error_at_count),
            s.datasets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_per_dataset(path: &Path, rows: &[DatasetResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "method",
        "dataset",
        "f1_at_3pct",
        "avg_f1",
        "timing_error",
        "f1_at_count",
        "timing_error_at_count",
    ])?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.dataset.clone(),
            r.scores.f1_at_fraction.to_string(),
            r.scores.avg_f1.to_string(),
            r.scores.timing_error.to_string(),
            r.scores.f1_at_count.to_string(),
            r.scores.timing_error_at_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per snapshot: t, λ₁..λ_K, zero-padded to the embedding size.
pub fn cmd_spectrum(cfg: &RunConfig, method: ReductionMethod, input: &Path, output: &Path) -> Result<()> {
    let seq = load_sequence(cfg, input)?;
    let det_cfg = cfg.detection(method)?;
    let dim = det_cfg.embedding_dim(seq.universe());
    let spectra = sequence_spectra(&seq, &det_cfg)?;
    let mut w = csv::Writer::from_writer(create(output)?);
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("lambda_{i}")));
    w.write_record(&header)?;
    for (t, s) in seq.times().iter().zip(&spectra) {
        let mut row = vec![t.to_string()];
        row.extend((0..dim).map(|i| s.get(i).copied().unwrap_or(0.0).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
