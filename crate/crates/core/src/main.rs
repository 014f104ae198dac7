use clap::{Parser, Subcommand};
use coulomb_lab::error::{Error, Result};
use coulomb_lab::flow::{self, Flow};
use coulomb_lab::green::GreenKernel;
use coulomb_lab::reference;
use coulomb_lab::sampling;
use coulomb_lab::sweep::{self, SweepConfig};
use serde::Deserialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "coulomb-lab", about = "Periodic Coulomb particle laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single (N, seed) cell and stream observation records as JSONL
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full convergence sweep defined by a config file
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Estimate the initial pair-energy scaling in N
    InitStats {
        #[arg(long)]
        config: PathBuf,
    },
    /// Self-check the periodic kernel against an independent spectral oracle
    KernelCheck {
        #[arg(short)]
        d: usize,
    },
    /// Verify a named reference flow is a steady Euler solution
    FlowCheck {
        #[arg(long)]
        flow: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Sweep { config, workers } => run_sweep(&config, workers),
        Command::InitStats { config } => init_stats(&config),
        Command::KernelCheck { d } => kernel_check(d),
        Command::FlowCheck { flow } => flow_check(&flow),
    }
}

fn simulate(path: &Path) -> Result<()> {
    let config = SweepConfig::load(path)?;
    if config.n_list.len() != 1 || config.seeds.len() != 1 {
        return Err(Error::Config(
            "simulate runs a single cell: exactly one entry in n_list and seeds".into(),
        ));
    }
    let records = sweep::run_sweep(&config, 1)?;
    let stdout = std::io::stdout();
    sweep::write_jsonl(&records, &mut stdout.lock())?;
    fail_on_invalid(&records)
}

fn run_sweep(path: &Path, workers: usize) -> Result<()> {
    let config = SweepConfig::load(path)?;
    let start = Instant::now();
    let records = sweep::run_sweep(&config, workers)?;
    let wall_time = start.elapsed().as_secs_f64();
    fs::create_dir_all(&config.output)?;
    let mut jsonl = fs::File::create(config.output.join("records.jsonl"))?;
    sweep::write_jsonl(&records, &mut jsonl)?;
    let mut csv = fs::File::create(config.output.join("summary.csv"))?;
    sweep::write_csv(&records, &mut csv)?;
    let fit = sweep::fit_rate(&records, |r| r.total).ok();
    let meta = serde_json::json!({
        "wall_time_seconds": wall_time,
        "cells": config.n_list.len() * config.seeds.len(),
        "records": records.len(),
        "invalid_records": records.iter().filter(|r| !r.valid).count(),
        "in_regime": config.in_regime(),
        "modulated_total_rate": fit,
    });
    let mut meta_file = fs::File::create(config.output.join("meta.json"))?;
    writeln!(meta_file, "{}", serde_json::to_string_pretty(&meta).unwrap())?;
    eprintln!(
        "sweep: {} records, {:.1}s, output in {:?}",
        records.len(),
        wall_time,
        config.output
    );
    fail_on_invalid(&records)
}

fn fail_on_invalid(records: &[sweep::SweepRecord]) -> Result<()> {
    match records.iter().find(|r| !r.valid) {
        Some(r) => Err(Error::NonFinite(format!(
            "cell n={} seed={} invalid: {}",
            r.n,
            r.seed,
            r.error.as_deref().unwrap_or("energy gate")
        ))),
        None => Ok(()),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitStatsConfig {
    dimension: usize,
    n_list: Vec<usize>,
    trials: usize,
    seed: u64,
    output: Option<PathBuf>,
}

fn init_stats(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let config: InitStatsConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
    let report = sampling::estimate_initial_h2_scaling(
        config.dimension,
        &config.n_list,
        config.trials,
        config.seed,
    )?;
    if let Some(out) = &config.output {
        if let Some(parent) = out.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let mut csv = fs::File::create(out)?;
        writeln!(csv, "d,n,trials,mean_stat,stderr,slope")?;
        for p in &report.points {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                report.dimension, p.n, p.trials, p.mean_stat, p.stderr, report.slope
            )?;
        }
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn kernel_check(d: usize) -> Result<()> {
    let kernel = GreenKernel::new(d)?;
    let report = reference::kernel_check(&kernel, 1000, 1);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.pass {
        Ok(())
    } else {
        Err(Error::NonFinite("kernel check failed".into()))
    }
}

fn flow_check(name: &str) -> Result<()> {
    let parsed = Flow::parse(name)?;
    let report = flow::flow_check(&parsed, 64);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if report.pass {
        Ok(())
    } else {
        Err(Error::NonFinite("flow check failed".into()))
    }
}
