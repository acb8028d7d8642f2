//! Trial fan-out, deterministic aggregation and CSV persistence.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::trial::{run_trial, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum XKind {
    Snapshot,
    SnrDb,
}

impl fmt::Display for XKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XKind::Snapshot => "snapshot",
            XKind::SnrDb => "snr_db",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub x_kind: XKind,
    pub x_value: f64,
    pub mean_sinr_db: f64,
    pub mean_steering_mse: f64,
    /// Trials that contributed (failed trials are excluded).
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateResult {
    /// Sorted by algorithm name, then `x_value`.
    pub rows: Vec<AggregateRow>,
    /// Failed trials per algorithm.
    pub failures: BTreeMap<String, usize>,
    /// Mean optimum SINR per x point.
    pub optimum_db: Vec<(f64, f64)>,
}

impl AggregateResult {
    pub fn series(&self, algorithm: &str) -> Vec<&AggregateRow> {
        self.rows.iter().filter(|r| r.algorithm == algorithm).collect()
    }

    pub fn total_failures(&self) -> usize {
        self.failures.values().sum()
    }
}

/// Runs all trials (and SNR points) of `cfg`. `threads = None` uses rayon's
/// global pool and `Some(1)` runs on the calling thread without a pool (the
/// only option on targets without threads). Results do not depend on the
/// thread count.
pub fn run_experiment(cfg: &ScenarioConfig, threads: Option<usize>) -> Result<AggregateResult> {
    cfg.validate()?;
    let points = cfg.snr_db.points();
    let jobs: Vec<(f64, u64)> = points
        .iter()
        .flat_map(|&snr| (0..cfg.trials as u64).map(move |t| (snr, t)))
        .collect();
    let work = || jobs.par_iter().map(|&(snr, t)| run_trial(cfg, snr, t)).collect::<Vec<_>>();
    let records = match threads {
        Some(1) => jobs.iter().map(|&(snr, t)| run_trial(cfg, snr, t)).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    if cfg.snr_db.is_sweep() {
        aggregate_sweep(cfg, &points, &records)
    } else {
        aggregate_snapshots(cfg, &records)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = values.fold((0.0, 0), |(s, n), v| (s + v, n + 1));
    (if n == 0 { f64::NAN } else { sum / n as f64 }, n)
}

fn count_failures(cfg: &ScenarioConfig, records: &[TrialRecord]) -> BTreeMap<String, usize> {
    cfg.algorithms
        .iter()
        .map(|a| {
            let n = records
                .iter()
                .filter(|r| r.trace(a.name()).is_some_and(|t| t.failure.is_some()))
                .count();
            (a.name().to_string(), n)
        })
        .collect()
}

fn finish(cfg: &ScenarioConfig, mut result: AggregateResult) -> Result<AggregateResult> {
    if !cfg.algorithms.is_empty() && result.rows.is_empty() {
        return Err(Error::Numeric("every trial of every algorithm failed".into()));
    }
    result.rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.x_value.total_cmp(&b.x_value)));
    Ok(result)
}

fn aggregate_snapshots(cfg: &ScenarioConfig, records: &[TrialRecord]) -> Result<AggregateResult> {
    let mut result = AggregateResult { failures: count_failures(cfg, records), ..Default::default() };
    for alg in &cfg.algorithms {
        let ok: Vec<_> = records
            .iter()
            .filter_map(|r| r.trace(alg.name()))
            .filter(|t| t.failure.is_none())
            .collect();
        if ok.is_empty() {
            continue;
        }
        for i in 0..cfg.snapshots {
            let (sinr, n) = mean(ok.iter().map(|t| t.sinr_db[i]));
            let (mse, _) = mean(ok.iter().map(|t| t.steering_mse[i]));
            result.rows.push(AggregateRow {
                algorithm: alg.name().to_string(),
                x_kind: XKind::Snapshot,
                x_value: (i + 1) as f64,
                mean_sinr_db: sinr,
                mean_steering_mse: mse,
                trials: n,
            });
        }
    }
    result.optimum_db = (0..cfg.snapshots)
        .map(|i| ((i + 1) as f64, mean(records.iter().map(|r| r.optimum_db[i])).0))
        .collect();
    finish(cfg, result)
}

fn tail_mean(v: &[f64], tail: usize) -> f64 {
    mean(v[v.len().saturating_sub(tail)..].iter().copied()).0
}

fn aggregate_sweep(cfg: &ScenarioConfig, points: &[f64], records: &[TrialRecord]) -> Result<AggregateResult> {
    let mut result = AggregateResult { failures: count_failures(cfg, records), ..Default::default() };
    let tail = cfg.sweep_tail;
    for &snr in points {
        let at: Vec<_> = records.iter().filter(|r| r.snr_db == snr).collect();
        for alg in &cfg.algorithms {
            let ok: Vec<_> = at
                .iter()
                .filter_map(|r| r.trace(alg.name()))
                .filter(|t| t.failure.is_none())
                .collect();
            if ok.is_empty() {
                continue;
            }
            let (sinr, n) = mean(ok.iter().map(|t| tail_mean(&t.sinr_db, tail)));
            let (mse, _) = mean(ok.iter().map(|t| tail_mean(&t.steering_mse, tail)));
            result.rows.push(AggregateRow {
                algorithm: alg.name().to_string(),
                x_kind: XKind::SnrDb,
                x_value: snr,
                mean_sinr_db: sinr,
                mean_steering_mse: mse,
                trials: n,
            });
        }
        result.optimum_db.push((snr, mean(at.iter().map(|r| tail_mean(&r.optimum_db, tail))).0));
    }
    finish(cfg, result)
}

pub const CSV_HEADER: &str = "algorithm,x_kind,x_value,mean_sinr_db,mean_steering_mse,trials";

/// Renders the aggregate as CSV text; floats use the shortest representation
/// that parses back to the same value.
pub fn to_csv(result: &AggregateResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.algorithm, r.x_kind, r.x_value, r.mean_sinr_db, r.mean_steering_mse, r.trials
        ));
    }
    out
}

pub fn write_csv(result: &AggregateResult, path: &Path) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(to_csv(result).as_bytes()).map_err(io)?;
    file.flush().map_err(io)
}
