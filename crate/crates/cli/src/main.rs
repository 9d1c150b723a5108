use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use semsim::experiment::{parse_config, run_experiment, CheckStatus, ExperimentReport, CONFIG_KEYS};

/// Run seeded social-semantic network simulations across ranking
/// algorithms, effort levels and seeds.
///
/// Settings come from built-in defaults, then `--config`, then `--set`,
/// then the dedicated flags.
#[derive(Debug, Parser)]
#[command(name = "semsim", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Ranking algorithms: comma list of random, indegree, hits, pagerank, or `all`.
    #[arg(long)]
    algo: Option<String>,
    /// Semantic-annotation effort levels, comma separated.
    #[arg(long = "ue-sa")]
    ue_sa: Option<String>,
    /// Seeds: `7`, `1-20`, `1,4,9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Successful annotations that end a run.
    #[arg(long)]
    stop: Option<String>,
    /// Iteration cap.
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    actors: Option<String>,
    #[arg(long)]
    concepts: Option<String>,
    #[arg(long)]
    instances: Option<String>,
    /// Concept-size exponent in the publish-concept cost.
    #[arg(long)]
    alpha: Option<String>,
    /// Concept-quality exponent in the publish-concept reward.
    #[arg(long)]
    beta: Option<String>,
    /// PageRank damping factor.
    #[arg(long)]
    damping: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Also write per-cell event logs.
    #[arg(long)]
    events: bool,
    /// Also write per-cell candidate pool dumps.
    #[arg(long)]
    dump_pools: bool,
    /// Dump ranking snapshots every N iterations.
    #[arg(long, value_name = "N")]
    dump_rankings: Option<String>,
    /// Sensitivity scan: auto, always or never.
    #[arg(long)]
    scan: Option<String>,
    /// Print the accepted configuration keys and exit.
    #[arg(long)]
    list_keys: bool,
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
            out.push((k.to_string(), v.to_string()));
        }
        let flags = [
            ("algo", &self.algo),
            ("ue_sa", &self.ue_sa),
            ("seeds", &self.seeds),
            ("stop", &self.stop),
            ("cap", &self.cap),
            ("actors", &self.actors),
            ("concepts", &self.concepts),
            ("instances", &self.instances),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("damping", &self.damping),
            ("out", &self.out),
            ("dump_rankings", &self.dump_rankings),
            ("scan", &self.scan),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        if self.events {
            out.push(("events".into(), "true".into()));
        }
        if self.dump_pools {
            out.push(("dump_pools".into(), "true".into()));
        }
        Ok(out)
    }
}

fn print_report(report: &ExperimentReport) {
    println!(
        "{:<9} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9}",
        "algorithm", "ue_sa", "runs", "stop", "entropy", "top1_q", "top10_q", "sa_rate"
    );
    let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    for r in &report.aggregate {
        println!(
            "{:<9} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9}",
            r.algorithm.as_str(),
            format!("{:?}", r.ue_sa),
            r.runs,
            r.stop_reached,
            f(r.median_final_entropy),
            f(r.median_top1_quality),
            f(r.median_top10_quality),
            f(r.median_sa_rate),
        );
    }
    for c in &report.checks {
        if c.status != CheckStatus::NotApplicable {
            println!("check {}: {} ({})", c.name, c.status.as_str(), c.detail);
        }
    }
    if let Some(scan) = &report.scan {
        for s in scan {
            let status: Vec<String> = s
                .checks
                .iter()
                .map(|c| format!("{}={}", c.name, c.status.as_str()))
                .collect();
            println!("scan alpha={} beta={}: {}", s.alpha, s.beta, status.join(" "));
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.list_keys {
        for k in CONFIG_KEYS {
            println!("{k}");
        }
        return Ok(());
    }
    let text = match &cli.config {
        Some(path) => Some(
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        ),
        None => None,
    };
    let spec = parse_config(text.as_deref(), &cli.overrides()?)?;
    let report = run_experiment(&spec)?;
    print_report(&report);
    println!(
        "wrote {} cells to {}",
        report.cells.len(),
        spec.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
