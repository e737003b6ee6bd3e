use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use hgcpd_cli::commands::{
    cmd_detect_all, cmd_eval, cmd_generate, cmd_spectrum, detect_one, write_per_dataset, write_table,
};
use hgcpd_cli::config::{parse_methods, RunConfig};

#[derive(Parser)]
#[command(name = "hgcpd", version, about = "Change-point detection on dynamic hypergraphs")]
struct Cli {
    /// Plain `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DetectionFlags {
    /// cb-gadget, star, clique, a comma-separated list, or `all`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    fraction: Option<f64>,
    /// Flag exactly this many change points instead of a fraction.
    #[arg(long)]
    count: Option<usize>,
    /// max, min or raw.
    #[arg(long)]
    convention: Option<String>,
    /// Disable the per-snapshot largest-component restriction.
    #[arg(long)]
    no_largest_component: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic benchmark datasets and their ground truth.
    Generate {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        datasets: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        snapshots: Option<usize>,
    },
    /// Score snapshots of one dataset (`--input`) or of every dataset in
    /// the data directory.
    Detect {
        #[command(flatten)]
        flags: DetectionFlags,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Score CSV for `--input`; defaults to `<runs_dir>/<method>/<name>.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        runs_dir: Option<PathBuf>,
    },
    /// Aggregate detection runs against ground truth.
    Eval {
        /// Methods to evaluate (default: all three).
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        runs_dir: Option<PathBuf>,
        /// Table CSV; defaults to `<runs_dir>/table.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write per-dataset scores here.
        #[arg(long)]
        per_dataset: Option<PathBuf>,
    },
    /// Dump per-snapshot top eigenvalues.
    Spectrum {
        #[command(flatten)]
        flags: DetectionFlags,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn apply_detection(cfg: &mut RunConfig, f: &DetectionFlags) -> Result<()> {
    if let Some(m) = &f.method {
        cfg.methods = parse_methods(m)?;
    }
    if let Some(k) = f.k {
        cfg.k = k;
    }
    if let Some(w) = f.window {
        cfg.window = w;
    }
    if let Some(x) = f.fraction {
        cfg.fraction = x;
    }
    if f.count.is_some() {
        cfg.count = f.count;
    }
    if let Some(c) = &f.convention {
        cfg.set("convention", c)?;
    }
    if f.no_largest_component {
        cfg.largest_component = false;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got '{kv}'");
        };
        cfg.set(k, v)?;
    }
    match cli.command {
        Command::Generate {
            out_dir,
            datasets,
            seed,
            snapshots,
        } => {
            if let Some(d) = datasets {
                cfg.datasets = d;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = snapshots {
                cfg.snapshots = t;
            }
            let dir = out_dir.unwrap_or_else(|| cfg.data_dir.clone());
            let files = cmd_generate(&cfg, &dir)?;
            println!("wrote {} datasets to {}", files.len(), dir.display());
        }
        Command::Detect {
            flags,
            input,
            output,
            data_dir,
            runs_dir,
        } => {
            apply_detection(&mut cfg, &flags)?;
            cfg.validate()?;
            if let Some(d) = data_dir {
                cfg.data_dir = d;
            }
            if let Some(r) = runs_dir {
                cfg.runs_dir = r;
            }
            match input {
                Some(input) => {
                    if output.is_some() && cfg.methods.len() > 1 {
                        bail!("--output takes a single --method");
                    }
                    for &method in &cfg.methods {
                        let out = output.clone().unwrap_or_else(|| {
                            let name = input.file_name().and_then(|n| n.to_str()).unwrap_or("input");
                            let stem = name.trim_end_matches(".gz").trim_end_matches(".jsonl");
                            cfg.runs_dir.join(method.name()).join(format!("{stem}.csv"))
                        });
                        let d = detect_one(&cfg, method, &input, &out)?;
                        println!("{method}: predicted {:?} -> {}", d.predicted_times(), out.display());
                    }
                }
                None => {
                    let written = cmd_detect_all(&cfg)?;
                    println!("wrote {} score files under {}", written.len(), cfg.runs_dir.display());
                }
            }
        }
        Command::Eval {
            method,
            data_dir,
            runs_dir,
            output,
            per_dataset,
        } => {
            cfg.methods = parse_methods(method.as_deref().unwrap_or("all"))?;
            if let Some(d) = data_dir {
                cfg.data_dir = d;
            }
            if let Some(r) = runs_dir {
                cfg.runs_dir = r;
            }
            cfg.validate()?;
            let (summaries, rows) = cmd_eval(&cfg)?;
            let out = output.unwrap_or_else(|| cfg.runs_dir.join("table.csv"));
            write_table(&out, &summaries)?;
            if let Some(p) = per_dataset {
                write_per_dataset(&p, &rows)?;
            }
            for s in &summaries {
                println!(
                    "{:<10} f1@{:.0}%={:.3} avg_f1={:.3} timing_error={:.2} (count mode: f1={:.3} timing_error={:.2}; {} datasets)",
                    s.method,
                    cfg.fraction * 100.0,
                    s.mean.f1_at_fraction,
                    s.mean.avg_f1,
                    s.mean.timing_error,
                    s.mean.f1_at_count,
                    s.mean.timing_error_at_count,
                    s.datasets
                );
            }
        }
        Command::Spectrum { flags, input, output } => {
            apply_detection(&mut cfg, &flags)?;
            cfg.validate()?;
            let [method] = cfg.methods[..] else {
                bail!("spectrum takes a single --method");
            };
            cmd_spectrum(&cfg, method, &input, &output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(ToString::to_string).collect();
            let payload = serde_json::json!({ "error": format!("{e:#}"), "causes": chain });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
