use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{mix_seed, nmi};
use crate::algorithm::{AlgorithmConfig, Engine};
use crate::error::{Error, Result};
use crate::io::{format_matrix, load_matrix, LoadOptions};
use crate::linalg::DataMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchDataset {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub format: LoadOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    /// Row name in the report; defaults to the algorithm name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub config: AlgorithmConfig,
}

impl BenchEntry {
    fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.config.algorithm.clone())
    }
}

/// External clustering program, run as `<command...> <csv path> <k>`; it
/// prints one integer label per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub name: String,
    pub command: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub datasets: Vec<BenchDataset>,
    #[serde(default)]
    pub algorithms: Vec<BenchEntry>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Run each cell once untimed before measuring.
    #[serde(default = "yes")]
    pub warmup: bool,
    #[serde(default)]
    pub baseline: Option<BaselineSpec>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub algorithm: String,
    pub dataset: String,
    pub repetitions: usize,
    /// Wall-clock seconds of each timed repetition.
    pub times: Vec<f64>,
    pub mean_time: f64,
    /// Per-repetition NMI against the ground truth, when the dataset has labels.
    pub nmis: Option<Vec<f64>>,
    pub mean_nmi: Option<f64>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<BenchCell>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn distinct(labels: &[usize]) -> usize {
    let mut l = labels.to_vec();
    l.sort_unstable();
    l.dedup();
    l.len()
}

fn cell(
    algorithm: String,
    dataset: &str,
    times: Vec<f64>,
    nmis: Option<Vec<f64>>,
    config: serde_json::Value,
) -> BenchCell {
    BenchCell {
        algorithm,
        dataset: dataset.to_string(),
        repetitions: times.len(),
        mean_time: mean(&times),
        mean_nmi: nmis.as_deref().map(mean),
        nmis,
        times,
        config,
    }
}

fn run_entry(entry: &BenchEntry, name: &str, data: &DataMatrix, reps: usize, warmup: bool) -> Result<BenchCell> {
    let truth = data.labels();
    let mut config = entry.config.clone();
    if config.max_clusters.is_none() && config.algorithm != "depddp" {
        config.max_clusters = truth.map(distinct);
    }
    let base_seed = config.seed;
    let engine_for = |rep: usize| {
        let mut c = config.clone();
        c.seed = mix_seed(base_seed, rep as u64);
        Engine::new(c)
    };
    if warmup {
        engine_for(0)?.fit(data)?;
    }
    let mut times = Vec::with_capacity(reps);
    let mut nmis = Vec::with_capacity(reps);
    for rep in 0..reps {
        let engine = engine_for(rep)?;
        let start = Instant::now();
        let out = engine.fit(data)?;
        times.push(start.elapsed().as_secs_f64());
        if let Some(t) = truth {
            nmis.push(nmi(t, &out.labels)?);
        }
    }
    Ok(cell(
        entry.label(),
        name,
        times,
        truth.map(|_| nmis),
        serde_json::to_value(&config)?,
    ))
}

fn run_baseline(spec: &BaselineSpec, name: &str, data: &DataMatrix, reps: usize, warmup: bool) -> Result<BenchCell> {
    let (program, args) = spec
        .command
        .split_first()
        .ok_or_else(|| Error::Config("baseline command is empty".into()))?;
    let k = data.labels().map(distinct).unwrap_or(2);
    let dir = tempfile::tempdir().map_err(|e| Error::io("baseline temp dir", e))?;
    let csv = dir.path().join("data.csv");
    std::fs::write(&csv, format_matrix(data, b',', false)).map_err(|e| Error::io(&csv, e))?;
    let run = || -> Result<(f64, Vec<usize>)> {
        let start = Instant::now();
        let out = Command::new(program)
            .args(args)
            .arg(&csv)
            .arg(k.to_string())
            .output()
            .map_err(|e| Error::io(program, e))?;
        let elapsed = start.elapsed().as_secs_f64();
        if !out.status.success() {
            return Err(Error::Data(format!(
                "baseline '{}' failed with {}: {}",
                spec.name,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let labels = String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<usize>()
                    .map_err(|_| Error::Data(format!("baseline printed a non-label line '{l}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != data.rows() {
            return Err(Error::Data(format!(
                "baseline printed {} labels for {} rows",
                labels.len(),
                data.rows()
            )));
        }
        Ok((elapsed, labels))
    };
    if warmup {
        run()?;
    }
    let mut times = Vec::with_capacity(reps);
    let mut nmis = Vec::with_capacity(reps);
    for _ in 0..reps {
        let (t, labels) = run()?;
        times.push(t);
        if let Some(truth) = data.labels() {
            nmis.push(nmi(truth, &labels)?);
        }
    }
    Ok(cell(
        spec.name.clone(),
        name,
        times,
        data.labels().map(|_| nmis),
        serde_json::to_value(spec)?,
    ))
}

/// Times every algorithm on every dataset. The ground-truth cluster count is
/// passed as `max_clusters` to algorithms that need one and were not given
/// one, and repetition `r` runs with seed `mix_seed(seed, r)`. Only the fit
/// itself is timed.
pub fn bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let mut report = BenchReport::default();
    if config.algorithms.is_empty() && config.baseline.is_none() {
        return Ok(report);
    }
    for ds in &config.datasets {
        let data = load_matrix(&ds.path, &ds.format)?;
        for entry in &config.algorithms {
            report
                .cells
                .push(run_entry(entry, &ds.name, &data, config.repetitions, config.warmup)?);
        }
        if let Some(b) = &config.baseline {
            report
                .cells
                .push(run_baseline(b, &ds.name, &data, config.repetitions, config.warmup)?);
        }
    }
    Ok(report)
}

/// Aligned text table: one block per dataset with `algorithm`, `time` and
/// `nmi` columns.
pub fn render_table(report: &BenchReport) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    for c in &report.cells {
        if !datasets.contains(&c.dataset.as_str()) {
            datasets.push(&c.dataset);
        }
    }
    let width = report
        .cells
        .iter()
        .map(|c| c.algorithm.len())
        .max()
        .unwrap_or(0)
        .max("algorithm".len());
    let mut out = String::new();
    for (i, ds) in datasets.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "dataset: {ds}");
        let _ = writeln!(out, "{:<width$}  {:>10}  {:>6}", "algorithm", "time", "nmi");
        for c in report.cells.iter().filter(|c| c.dataset == *ds) {
            let nmi = c.mean_nmi.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(out, "{:<width$}  {:>10.4}  {:>6}", c.algorithm, c.mean_time, nmi);
        }
    }
    out
}
