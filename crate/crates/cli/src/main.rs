use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use log::info;
use richards_cem::harness::acceptance::{AcceptanceSuite, CRITERIA};
use richards_cem::harness::{emit_report, paper_cases, read_csv, run_experiment, sweep, ReportRow, RunOptions};
use richards_cem::model::{default_data_dir, ExperimentId, RunConfig};

#[derive(Parser)]
#[command(version, about = "Multiscale solver for single and dual continuum Richards equations")]
struct Cli {
    /// Worker threads for the offline stage (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Accepted for compatibility; every stage is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for cached multiscale bases.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Directory holding the reference coefficient rasters.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Write per-time-level errors next to each report.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in experiment over the full (H, L) grid.
    Sweep {
        #[arg(long)]
        experiment: ExperimentId,
        #[arg(long)]
        out: PathBuf,
        /// Fine cells per side.
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        hdiv: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
        n_basis: Vec<usize>,
    },
    /// Run the acceptance criteria and check existing reports.
    Verify {
        #[arg(long)]
        out: PathBuf,
        /// Only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// `report.csv` files to validate instead of running the criteria.
        #[arg(long)]
        report: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns `false` when an acceptance check failed.
fn run(cli: Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if cli.seed.is_some() {
        info!("--seed ignored: the pipeline is deterministic");
    }
    let data_dir = cli.data_dir.unwrap_or_else(default_data_dir);
    let options = RunOptions {
        cache_dir: cli.cache_dir,
        trace: cli.trace,
        ..RunOptions::default()
    };
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let report = run_experiment(&cfg, base, &data_dir, &options)?;
            emit_report(&report, &out)?;
            info!("wrote {}", out.join("report.csv").display());
            Ok(true)
        }
        Command::Sweep {
            experiment,
            out,
            n,
            hdiv,
            n_basis,
        } => {
            let cases = paper_cases(&hdiv, &n_basis)?;
            let report = sweep(experiment, &data_dir, n, &cases, &options)?;
            emit_report(&report, &out)?;
            info!("wrote {} rows to {}", report.rows.len(), out.join("report.csv").display());
            Ok(true)
        }
        Command::Verify { out, criteria, report } => {
            fs::create_dir_all(&out)?;
            if !report.is_empty() {
                return verify_reports(&report, &out);
            }
            let ids: Vec<u8> = if criteria.is_empty() {
                CRITERIA.iter().map(|c| c.0).collect()
            } else {
                criteria
            };
            let suite = AcceptanceSuite::new(&data_dir);
            let mut file = fs::File::create(out.join("acceptance.txt"))?;
            let mut all = true;
            for id in ids {
                if !CRITERIA.iter().any(|c| c.0 == id) {
                    bail!("no criterion {id}");
                }
                let r = suite.run(id);
                println!("{r}");
                writeln!(file, "{r}")?;
                all &= r.passed;
            }
            Ok(all)
        }
    }
}

/// Checks the bookkeeping invariants of every row.
fn row_problems(r: &ReportRow) -> Vec<String> {
    let mut out = Vec::new();
    let hd = r.hdiv();
    if r.dim_vms != hd * hd * r.l {
        out.push(format!("dim_Vms {} != Hdiv^2 L = {}", r.dim_vms, hd * hd * r.l));
    }
    if !(r.err_h1 >= 0.0 && r.err_l2 >= 0.0) {
        out.push(format!("negative or missing errors ({}, {})", r.err_h1, r.err_l2));
    }
    if r.dim_vh == 0 || r.dim_vms > r.dim_vh {
        out.push(format!("implausible dimensions ({} coarse, {} fine)", r.dim_vms, r.dim_vh));
    }
    out
}

fn verify_reports(paths: &[PathBuf], out: &Path) -> Result<bool> {
    let mut file = fs::File::create(out.join("report_check.txt"))?;
    let mut all = true;
    for p in paths {
        let rows = read_csv(p).with_context(|| format!("reading {}", p.display()))?;
        let mut bad = 0;
        for (i, r) in rows.iter().enumerate() {
            for msg in row_problems(r) {
                writeln!(file, "{}: row {}: {msg}", p.display(), i + 1)?;
                bad += 1;
            }
        }
        let line = format!(
            "{} {}: {} rows, {bad} problems",
            if bad == 0 { "PASS" } else { "FAIL" },
            p.display(),
            rows.len()
        );
        println!("{line}");
        writeln!(file, "{line}")?;
        all &= bad == 0;
    }
    Ok(all)
}
