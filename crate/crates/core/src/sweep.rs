//! Convergence-study orchestration: run (N, eps_N, seed) cells, stream
//! per-observation records, fit decay rates, and check Gronwall envelopes.
//!
//! Determinism contract: each cell is fully determined by the config; cells
//! are computed by a worker pool but emitted in a fixed (N, seed) order, so
//! re-running a config reproduces the record stream byte for byte.

use crate::dynamics::{self, Regime};
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::green::GreenKernel;
use crate::modulated::{self, TestFunction};
use crate::sampling::{self, SamplingConfig};
use crate::stats;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonRule {
    /// eps_N = c * N^{-gamma}
    pub c: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// "quasineutral" or "gyrokinetic"
    pub regime: String,
    pub dimension: usize,
    /// e.g. "taylor_green(1.0)"
    pub flow: String,
    pub n_list: Vec<usize>,
    pub epsilon_rule: EpsilonRule,
    pub t_end: f64,
    pub observation_interval: f64,
    pub seeds: Vec<u64>,
    pub sampling: SamplingConfig,
    pub output: PathBuf,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<SweepConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: SweepConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.regime != "quasineutral" && self.regime != "gyrokinetic" {
            return Err(Error::Config(format!("unknown regime '{}'", self.regime)));
        }
        if self.regime == "gyrokinetic" && self.dimension != 2 {
            return Err(Error::Config("gyrokinetic regime requires dimension 2".into()));
        }
        if !(self.dimension == 2 || self.dimension == 3) {
            return Err(Error::Config(format!(
                "unsupported dimension {}",
                self.dimension
            )));
        }
        let flow = Flow::parse(&self.flow)?;
        if flow.dimension() != self.dimension {
            return Err(Error::Config(format!(
                "flow '{}' is {}-dimensional, config says {}",
                self.flow,
                flow.dimension(),
                self.dimension
            )));
        }
        if self.n_list.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("n_list and seeds must be non-empty".into()));
        }
        if self.epsilon_rule.c <= 0.0 || self.epsilon_rule.gamma < 0.0 {
            return Err(Error::Config("epsilon rule requires c > 0, gamma >= 0".into()));
        }
        if self.t_end < 0.0 || self.observation_interval <= 0.0 {
            return Err(Error::Config(
                "t_end must be >= 0 and observation_interval > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn eps_for(&self, n: usize) -> f64 {
        self.epsilon_rule.c * (n as f64).powf(-self.epsilon_rule.gamma)
    }

    /// Theorem-compatibility flag: gamma < 1/(d(d+1)).
    pub fn in_regime(&self) -> bool {
        self.epsilon_rule.gamma < 1.0 / (self.dimension * (self.dimension + 1)) as f64
    }

    pub fn time_step(&self, eps: f64, n: usize) -> f64 {
        if self.regime == "gyrokinetic" {
            // finer than the bare gyration resolution so that the cell-level
            // energy gate (1e-4) holds with margin even for small-N cells,
            // where the per-pair energy share (and hence the truncation
            // error from close encounters) is largest
            2.0 * std::f64::consts::PI * eps * eps / 1024.0
        } else {
            // i.i.d. initial data puts some pairs close together and the
            // resulting encounter error dominates the energy drift; the
            // per-pair energy share grows as N shrinks, so small-N cells
            // (which are also the cheap ones) get a much finer step
            let divisor = 600.0 * (2048.0 / n as f64).powi(2).clamp(1.0, 16.0);
            eps / divisor
        }
    }
}

/// Relative energy drift above which a cell is excluded from fits.
pub const ENERGY_GATE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub regime: String,
    pub d: usize,
    pub n: usize,
    pub eps: f64,
    pub gamma: f64,
    pub seed: u64,
    pub t: f64,
    pub h1: f64,
    pub h2: f64,
    pub total: f64,
    pub e_total: f64,
    pub min_dist: f64,
    pub gaps: BTreeMap<String, f64>,
    pub in_regime: bool,
    pub valid: bool,
    pub error: Option<String>,
}

fn cell_seed(config_seed: u64, cell: u64) -> u64 {
    // decorrelate cells; the sampling module mixes again per particle
    config_seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(cell.wrapping_mul(0xd134_2543_de82_ef95))
}

fn run_cell(
    config: &SweepConfig,
    flow: &Flow,
    kernel: &GreenKernel,
    test_functions: &[TestFunction],
    n: usize,
    seed: u64,
) -> Vec<SweepRecord> {
    let eps = config.eps_for(n);
    let gamma = config.epsilon_rule.gamma;
    let in_regime = config.in_regime();
    let regime = if config.regime == "gyrokinetic" {
        Regime::Gyrokinetic { eps }
    } else {
        Regime::Quasineutral { eps }
    };
    let base = SweepRecord {
        regime: config.regime.clone(),
        d: config.dimension,
        n,
        eps,
        gamma,
        seed,
        t: 0.0,
        h1: 0.0,
        h2: 0.0,
        total: 0.0,
        e_total: 0.0,
        min_dist: 0.0,
        gaps: BTreeMap::new(),
        in_regime,
        valid: true,
        error: None,
    };
    let result: Result<Vec<SweepRecord>> = (|| {
        let sampling_config = SamplingConfig {
            seed: cell_seed(config.sampling.seed ^ seed, n as u64),
            ..config.sampling
        };
        let mut state = sampling::sample_initial(&sampling_config, flow, n, eps, regime)?;
        let dt = config.time_step(eps, n);
        let observe_every = (config.observation_interval / dt).round().max(1.0) as usize;
        let mut records = Vec::new();
        let mut e0: Option<f64> = None;
        dynamics::integrate(&mut state, kernel, dt, config.t_end, observe_every, |s| {
            let energy = dynamics::energy_diagnostics(s, kernel)?;
            let report = modulated::modulated_energy(s, kernel, flow)?;
            let gaps = modulated::weakstar_gap(s, flow, test_functions)?;
            e0.get_or_insert(energy.total);
            records.push(SweepRecord {
                t: s.time,
                h1: report.h1,
                h2: report.h2,
                total: report.total,
                e_total: energy.total,
                min_dist: energy.min_pair_distance,
                gaps: gaps.into_iter().collect(),
                ..base.clone()
            });
            Ok(())
        })?;
        // energy-conservation gate over the whole cell
        if let Some(e0) = e0 {
            let scale = e0.abs().max(1e-30);
            let drift = records
                .iter()
                .map(|r| ((r.e_total - e0) / scale).abs())
                .fold(0.0f64, f64::max);
            if drift > ENERGY_GATE {
                for r in &mut records {
                    r.valid = false;
                    r.error = Some(format!("energy drift {drift:.3e} exceeds gate"));
                }
            }
        }
        Ok(records)
    })();
    match result {
        Ok(records) => records,
        Err(e) => {
            let mut r = base;
            r.valid = false;
            r.error = Some(e.to_string());
            vec![r]
        }
    }
}

/// Run every (N, seed) cell and return records in deterministic cell order.
/// Cells execute on `workers` threads; a failed cell contributes an error
/// record instead of aborting the sweep.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let flow = Flow::parse(&config.flow)?;
    let kernel = GreenKernel::new(config.dimension)?;
    let test_functions = modulated::default_test_functions(config.dimension);
    let mut cells = Vec::new();
    for &n in &config.n_list {
        for &seed in &config.seeds {
            cells.push((n, seed));
        }
    }
    let n_cells = cells.len();
    let results: Vec<Mutex<Option<Vec<SweepRecord>>>> =
        (0..n_cells).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = workers.max(1).min(n_cells);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n_cells {
                    break;
                }
                let (n, seed) = cells[idx];
                let records = run_cell(config, &flow, &kernel, &test_functions, n, seed);
                *results[idx].lock().unwrap() = Some(records);
            });
        }
    });
    let mut out = Vec::new();
    for slot in results {
        out.extend(slot.into_inner().unwrap().unwrap());
    }
    Ok(out)
}

pub fn write_jsonl(records: &[SweepRecord], w: &mut impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, r).map_err(|e| Error::Config(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(records: &[SweepRecord], w: &mut impl Write) -> Result<()> {
    let gap_keys: Vec<String> = records
        .first()
        .map(|r| r.gaps.keys().cloned().collect())
        .unwrap_or_default();
    write!(
        w,
        "regime,d,n,eps,gamma,seed,t,h1,h2,total,e_total,min_dist,in_regime,valid,error"
    )?;
    for k in &gap_keys {
        write!(w, ",gap:{k}")?;
    }
    writeln!(w)?;
    for r in records {
        write!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.regime,
            r.d,
            r.n,
            r.eps,
            r.gamma,
            r.seed,
            r.t,
            r.h1,
            r.h2,
            r.total,
            r.e_total,
            r.min_dist,
            r.in_regime,
            r.valid,
            r.error.as_deref().unwrap_or("")
        )?;
        for k in &gap_keys {
            match r.gaps.get(k) {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    /// seed-averaged sup_t of the fitted quantity, per N
    pub per_n: Vec<(usize, f64)>,
}

/// Log-log fit of the seed-averaged sup_t |quantity| against N. Invalid
/// cells are excluded.
pub fn fit_rate(records: &[SweepRecord], quantity: impl Fn(&SweepRecord) -> f64) -> Result<RateFit> {
    // sup over t within each (n, seed) cell
    let mut sup: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.valid) {
        let e = sup.entry((r.n, r.seed)).or_insert(0.0);
        *e = e.max(quantity(r).abs());
    }
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for ((n, _), v) in sup {
        by_n.entry(n).or_default().push(v);
    }
    if by_n.len() < 3 {
        return Err(Error::FitUnderdetermined(by_n.len()));
    }
    let per_n: Vec<(usize, f64)> = by_n
        .into_iter()
        .map(|(n, vs)| (n, vs.iter().sum::<f64>() / vs.len() as f64))
        .collect();
    let xs: Vec<f64> = per_n.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = per_n.iter().map(|(_, v)| *v).collect();
    let (slope, stderr) = stats::loglog_slope(&xs, &ys)?;
    Ok(RateFit {
        slope,
        stderr,
        per_n,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Envelope {
    pub c: f64,
    pub b: f64,
}

/// Fit the smallest Gronwall envelope total(t) <= e^{Ct} (total(0) + t B)
/// consistent with the given records: C is the observed exponential growth
/// rate of total (0 if non-increasing) and B absorbs the remaining forcing.
pub fn calibrate_envelope(records: &[SweepRecord], margin: f64) -> Result<Envelope> {
    let cells = group_cells(records);
    if cells.is_empty() {
        return Err(Error::FitUnderdetermined(0));
    }
    let mut c_max = 0.0f64;
    for cell in &cells {
        let t0 = &cell[0];
        for r in &cell[1..] {
            if r.t > 0.0 && r.total > 0.0 && t0.total > 0.0 {
                c_max = c_max.max((r.total / t0.total).ln() / r.t);
            }
        }
    }
    let c = c_max.max(0.0);
    let mut b = 0.0f64;
    for cell in &cells {
        let t0 = &cell[0];
        for r in &cell[1..] {
            if r.t > 0.0 {
                b = b.max((r.total * (-c * r.t).exp() - t0.total) / r.t);
            }
        }
    }
    Ok(Envelope {
        c: c * margin,
        b: (b * margin).max(0.0),
    })
}

fn group_cells(records: &[SweepRecord]) -> Vec<Vec<&SweepRecord>> {
    let mut map: BTreeMap<(usize, u64), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.valid) {
        map.entry((r.n, r.seed)).or_default().push(r);
    }
    map.into_values()
        .map(|mut v| {
            v.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
            v
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub n: usize,
    pub seed: u64,
    pub violations: usize,
    pub worst_ratio: f64,
}

/// Per-cell check of total(t) <= e^{Ct} (total(0) + t B).
pub fn gronwall_envelope_check(records: &[SweepRecord], env: Envelope) -> Vec<EnvelopeCheck> {
    let mut out = Vec::new();
    for cell in group_cells(records) {
        let t0 = cell[0];
        let mut violations = 0;
        let mut worst = 0.0f64;
        for r in &cell {
            let bound = (env.c * r.t).exp() * (t0.total + r.t * env.b);
            if r.total > bound + 1e-14 {
                violations += 1;
            }
            if bound != 0.0 {
                worst = worst.max(r.total / bound);
            }
        }
        out.push(EnvelopeCheck {
            n: t0.n,
            seed: t0.seed,
            violations,
            worst_ratio: worst,
        });
    }
    out
}
