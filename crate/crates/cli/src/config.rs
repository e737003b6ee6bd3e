//! Run configuration: a flat `key = value` text file whose keys mirror the
//! fields below. Command-line flags override file values.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hgcpd::evalharness::EvalConfig;
use hgcpd::lad::{ChangeScoreConvention, PredictionCount};
use hgcpd::pipeline::{DetectionConfig, GadgetLaplacian, ReductionMethod};
use hgcpd::reduction::StarWeighting;
use hgcpd::synthgen::{default_scenario, ScenarioConfig};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub methods: Vec<ReductionMethod>,
    pub k: usize,
    pub window: usize,
    pub fraction: f64,
    /// Overrides `fraction` for the flagged predictions when set.
    pub count: Option<usize>,
    pub convention: String,
    pub largest_component: bool,
    pub gadget_laplacian: GadgetLaplacian,
    pub star_weighting: String,
    pub eigen_seed: u64,

    pub tolerance: u32,
    pub eval_count: usize,
    pub grid_from_pct: u32,
    pub grid_to_pct: u32,

    pub seed: u64,
    pub datasets: usize,
    pub snapshots: usize,
    pub initial_nodes: usize,
    pub initial_clusters: usize,
    pub edges_per_snapshot: usize,
    pub min_edge_size: usize,
    pub max_edge_size: usize,
    pub p_in: f64,
    pub p_out: f64,

    pub top_entities: Option<usize>,
    pub window_len: u32,
    pub start: Option<i64>,
    pub end: Option<i64>,
    pub min_count: Option<usize>,
    pub lenient: bool,

    pub data_dir: PathBuf,
    pub runs_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scenario = default_scenario();
        let detection = DetectionConfig::<f64>::default();
        let eval = EvalConfig::default();
        Self {
            methods: vec![ReductionMethod::CbGadget],
            k: detection.k,
            window: detection.window,
            fraction: 0.03,
            count: None,
            convention: ChangeScoreConvention::Max.to_string(),
            largest_component: true,
            gadget_laplacian: detection.gadget_laplacian,
            star_weighting: "size-normalized".into(),
            eigen_seed: detection.eigen.seed,
            tolerance: eval.tol,
            eval_count: eval.count,
            grid_from_pct: 3,
            grid_to_pct: 15,
            seed: scenario.seed,
            datasets: 50,
            snapshots: scenario.num_snapshots,
            initial_nodes: scenario.initial_nodes,
            initial_clusters: scenario.initial_clusters,
            edges_per_snapshot: scenario.edges_per_snapshot,
            min_edge_size: scenario.min_edge_size,
            max_edge_size: scenario.max_edge_size,
            p_in: scenario.p_in,
            p_out: scenario.p_out,
            top_entities: None,
            window_len: 10,
            start: None,
            end: None,
            min_count: None,
            lenient: false,
            data_dir: PathBuf::from("data"),
            runs_dir: PathBuf::from("runs"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value '{value}' for '{key}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("invalid boolean '{value}' for '{key}'"),
    }
}

pub fn parse_methods(value: &str) -> Result<Vec<ReductionMethod>> {
    let methods = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| if s == "all" { Ok(None) } else { s.parse().map(Some) })
        .collect::<hgcpd::Result<Vec<_>>>()?;
    if methods.iter().any(Option::is_none) {
        return Ok(ReductionMethod::ALL.to_vec());
    }
    let mut out: Vec<ReductionMethod> = methods.into_iter().flatten().collect();
    out.dedup();
    if out.is_empty() {
        bail!("no reduction method given");
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let opt = |v: &str| v.is_empty() || v == "none";
        match key.trim() {
            "method" | "methods" => self.methods = parse_methods(v)?,
            "k" => self.k = parse(key, v)?,
            "window" => self.window = parse(key, v)?,
            "fraction" => self.fraction = parse(key, v)?,
            "count" => self.count = if opt(v) { None } else { Some(parse(key, v)?) },
            "convention" => {
                v.parse::<ChangeScoreConvention>()?;
                self.convention = v.to_string();
            }
            "largest_component" => self.largest_component = parse_bool(key, v)?,
            "gadget_laplacian" => self.gadget_laplacian = v.parse()?,
            "star_weighting" => {
                parse_star_weighting(v)?;
                self.star_weighting = v.to_string();
            }
            "eigen_seed" => self.eigen_seed = parse(key, v)?,
            "tolerance" => self.tolerance = parse(key, v)?,
            "eval_count" => self.eval_count = parse(key, v)?,
            "grid_from_pct" => self.grid_from_pct = parse(key, v)?,
            "grid_to_pct" => self.grid_to_pct = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "datasets" => self.datasets = parse(key, v)?,
            "snapshots" => self.snapshots = parse(key, v)?,
            "initial_nodes" => self.initial_nodes = parse(key, v)?,
            "initial_clusters" => self.initial_clusters = parse(key, v)?,
            "edges_per_snapshot" => self.edges_per_snapshot = parse(key, v)?,
            "min_edge_size" => self.min_edge_size = parse(key, v)?,
            "max_edge_size" => self.max_edge_size = parse(key, v)?,
            "p_in" => self.p_in = parse(key, v)?,
            "p_out" => self.p_out = parse(key, v)?,
            "top_entities" => self.top_entities = if opt(v) { None } else { Some(parse(key, v)?) },
            "window_len" => self.window_len = parse(key, v)?,
            "start" => self.start = if opt(v) { None } else { Some(parse(key, v)?) },
            "end" => self.end = if opt(v) { None } else { Some(parse(key, v)?) },
            "min_count" => self.min_count = if opt(v) { None } else { Some(parse(key, v)?) },
            "lenient" => self.lenient = parse_bool(key, v)?,
            "data_dir" => self.data_dir = PathBuf::from(v),
            "runs_dir" => self.runs_dir = PathBuf::from(v),
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// `key = value` per line; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected 'key = value'", i + 1))?;
            self.set(key, value).with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        if self.window == 0 {
            bail!("window must be at least 1");
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            bail!("fraction must lie in (0, 1]");
        }
        if self.grid_from_pct == 0 || self.grid_from_pct > self.grid_to_pct || self.grid_to_pct > 100 {
            bail!("fraction grid must satisfy 1 ≤ from ≤ to ≤ 100");
        }
        if self.window_len == 0 {
            bail!("window_len must be at least 1");
        }
        Ok(())
    }

    pub fn detection(&self, method: ReductionMethod) -> Result<DetectionConfig<f64>> {
        let mut d = DetectionConfig::<f64> {
            method,
            k: self.k,
            window: self.window,
            convention: self.convention.parse()?,
            prediction: match self.count {
                Some(c) => PredictionCount::Count(c),
                None => PredictionCount::Fraction(self.fraction),
            },
            largest_component: self.largest_component,
            gadget_laplacian: self.gadget_laplacian,
            star_weighting: parse_star_weighting(&self.star_weighting)?,
            ..DetectionConfig::default()
        };
        d.eigen.seed = self.eigen_seed;
        d.validate()?;
        Ok(d)
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            fraction: self.fraction,
            count: self.eval_count,
            grid: (self.grid_from_pct..=self.grid_to_pct)
                .map(|p| f64::from(p) / 100.0)
                .collect(),
            tol: self.tolerance,
        }
    }

    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let s = ScenarioConfig {
            initial_nodes: self.initial_nodes,
            initial_clusters: self.initial_clusters,
            num_snapshots: self.snapshots,
            edges_per_snapshot: self.edges_per_snapshot,
            min_edge_size: self.min_edge_size,
            max_edge_size: self.max_edge_size,
            p_in: self.p_in,
            p_out: self.p_out,
            seed: self.seed,
            ..default_scenario()
        };
        s.validate()?;
        Ok(s)
    }
}

pub fn parse_star_weighting(v: &str) -> Result<StarWeighting> {
    match v {
        "size-normalized" => Ok(StarWeighting::SizeNormalized),
        "unit" => Ok(StarWeighting::Unit),
        other => bail!("unknown star weighting '{other}' (expected size-normalized or unit)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_comments() {
        let mut c = RunConfig::default();
        c.apply_text("# detection\nmethod = star, clique\nk = 50 # fewer\n\nlargest_component = off\ncount = 4\n")
            .unwrap();
        assert_eq!(c.methods, vec![ReductionMethod::Star, ReductionMethod::Clique]);
        assert_eq!(c.k, 50);
        assert!(!c.largest_component);
        assert_eq!(c.detection(ReductionMethod::Star).unwrap().prediction, PredictionCount::Count(4));
    }

    #[test]
    fn bad_lines_are_reported() {
        let mut c = RunConfig::default();
        let err = c.apply_text("k = 5\nbogus = 1\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
        assert!(c.apply_text("k 5").is_err());
        assert!(c.set("k", "-1").is_err());
        assert!(c.set("convention", "median").is_err());
        assert!(c.set("method", "hyper").is_err());
    }

    #[test]
    fn all_methods_shortcut() {
        assert_eq!(parse_methods("all").unwrap(), ReductionMethod::ALL.to_vec());
    }

    #[test]
    fn custom_length_is_validated() {
        let mut c = RunConfig::default();
        c.snapshots = 100;
        assert!(c.scenario().is_err());
        c.snapshots = 200;
        assert_eq!(c.scenario().unwrap().num_snapshots, 200);
    }

    #[test]
    fn eval_grid() {
        let e = RunConfig::default().eval();
        assert_eq!(e.grid.len(), 13);
        assert_eq!(e.count, 4);
        assert_eq!(e.tol, 2);
    }
}
