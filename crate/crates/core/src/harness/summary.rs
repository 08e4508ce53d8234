//! Run CSV files and the experiment summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stats::{holm_bonferroni, mann_whitney_u, Alternative, TestResult};
use crate::engine::{Algorithm, RunRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "iteration,evaluations,best_so_far,target_precision,reduced_dim,elapsed_seconds";
/// z-quantile of the two-sided 95% interval.
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_so_far: f64,
    pub target_precision: f64,
    pub reduced_dim: usize,
    pub elapsed_seconds: f64,
}

/// Identifies one run; also its file stem.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub algorithm: String,
    pub problem: String,
    pub instance: u64,
    pub dimension: usize,
    pub repetition: usize,
}

impl RunKey {
    pub fn file_stem(&self) -> String {
        format!(
            "{}__{}__i{}__d{}__r{}",
            self.algorithm, self.problem, self.instance, self.dimension, self.repetition
        )
    }

    pub fn parse(stem: &str) -> Option<Self> {
        let parts: Vec<&str> = stem.split("__").collect();
        let [alg, problem, inst, dim, rep] = parts.as_slice() else {
            return None;
        };
        Some(Self {
            algorithm: alg.to_string(),
            problem: problem.to_string(),
            instance: inst.strip_prefix('i')?.parse().ok()?,
            dimension: dim.strip_prefix('d')?.parse().ok()?,
            repetition: rep.strip_prefix('r')?.parse().ok()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub key: RunKey,
    pub rows: Vec<CsvRow>,
}

impl RunSeries {
    pub fn from_record(key: RunKey, record: &RunRecord, f_opt: f64) -> Self {
        let rows = record
            .entries
            .iter()
            .map(|e| CsvRow {
                iteration: e.iteration,
                evaluations: e.evaluations,
                best_so_far: e.best_so_far,
                target_precision: e.best_so_far - f_opt,
                reduced_dim: e.reduced_dim,
                elapsed_seconds: e.elapsed_seconds,
            })
            .collect();
        Self { key, rows }
    }

    pub fn final_precision(&self) -> Option<f64> {
        self.rows.last().map(|r| r.target_precision)
    }

    pub fn final_elapsed(&self) -> Option<f64> {
        self.rows.last().map(|r| r.elapsed_seconds)
    }
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.iteration, r.evaluations, r.best_so_far, r.target_precision, r.reduced_dim, r.elapsed_seconds
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let bad = |what: String| Error::Argument(format!("{}: {what}", path.display()));
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(bad(format!("line {} has {} fields", ln + 2, f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", ln + 2)));
        let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("line {}: {e}", ln + 2)));
        rows.push(CsvRow {
            iteration: int(f[0])?,
            evaluations: int(f[1])?,
            best_so_far: num(f[2])?,
            target_precision: num(f[3])?,
            reduced_dim: int(f[4])?,
            elapsed_seconds: num(f[5])?,
        });
    }
    Ok(rows)
}

/// Reads every run CSV in `dir`, plus the stems of runs marked failed.
pub fn load_runs(dir: &Path) -> Result<(Vec<RunSeries>, Vec<String>)> {
    let mut series = Vec::new();
    let mut failed = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                if let Some(key) = RunKey::parse(stem) {
                    series.push(RunSeries {
                        key,
                        rows: read_csv(&path)?,
                    });
                }
            }
            Some("failed") => failed.push(stem.to_string()),
            _ => {}
        }
    }
    Ok((series, failed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub runs: usize,
    pub mean_precision: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub final_precision: Vec<f64>,
    pub elapsed_seconds: Vec<f64>,
    pub mean_reduced_dim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    /// Names the test is known under.
    pub test: String,
    pub alternative: Alternative,
    pub statistic: f64,
    pub exact: bool,
    pub p: f64,
    pub p_adjusted: f64,
    pub level: f64,
    pub reject: bool,
}

impl TestSummary {
    fn new(test: &str, alternative: Alternative, r: &TestResult, level: f64) -> Self {
        Self {
            test: test.to_string(),
            alternative,
            statistic: r.statistic,
            exact: r.exact,
            p: r.p_value,
            p_adjusted: r.p_adjusted,
            level,
            reject: r.reject,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub problem: String,
    pub instance: u64,
    pub dimension: usize,
    pub algorithms: BTreeMap<String, AlgorithmSummary>,
    /// PCA-BO against BO on final target precision.
    pub final_test: Option<TestSummary>,
    /// PCA-BO against BO on run time.
    pub cpu_test: Option<TestSummary>,
    /// Mean PCA-BO time over mean BO time.
    pub cpu_ratio: Option<f64>,
    /// Mean reduced dimension of PCA-BO.
    pub mean_reduced_dim: Option<f64>,
    /// `1 − r̄/D`.
    pub reduction_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub failed_runs: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn summarize_algorithm(runs: &[&RunSeries]) -> AlgorithmSummary {
    let len = runs.iter().map(|r| r.rows.len()).min().unwrap_or(0);
    let reps = runs.len() as f64;
    let mut mean_precision = Vec::with_capacity(len);
    let mut ci_low = Vec::with_capacity(len);
    let mut ci_high = Vec::with_capacity(len);
    for t in 0..len {
        let col: Vec<f64> = runs.iter().map(|r| r.rows[t].target_precision).collect();
        let m = mean(&col);
        let half = Z_95 * sample_sd(&col) / reps.sqrt();
        mean_precision.push(m);
        ci_low.push(m - half);
        ci_high.push(m + half);
    }
    let dims: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.reduced_dim as f64))
        .collect();
    AlgorithmSummary {
        runs: runs.len(),
        mean_precision,
        ci_low,
        ci_high,
        final_precision: runs.iter().filter_map(|r| r.final_precision()).collect(),
        elapsed_seconds: runs.iter().filter_map(|r| r.final_elapsed()).collect(),
        mean_reduced_dim: if dims.is_empty() { 0.0 } else { mean(&dims) },
    }
}

/// Aggregates runs per (problem, instance, dimension) cell and compares
/// PCA-BO with BO; p-values are Holm-adjusted within each test family.
pub fn summarize(series: &[RunSeries], failed_runs: Vec<String>, precision_level: f64, cpu_level: f64) -> Summary {
    let mut cells: BTreeMap<(String, u64, usize), BTreeMap<String, Vec<&RunSeries>>> = BTreeMap::new();
    for s in series {
        cells
            .entry((s.key.problem.clone(), s.key.instance, s.key.dimension))
            .or_default()
            .entry(s.key.algorithm.clone())
            .or_default()
            .push(s);
    }

    let bo = Algorithm::Bo.name();
    let pca = Algorithm::PcaBo.name();
    let mut out = Vec::new();
    let mut final_results: Vec<(usize, TestResult)> = Vec::new();
    let mut cpu_results: Vec<(usize, TestResult)> = Vec::new();
    for ((problem, instance, dimension), mut algs) in cells {
        for runs in algs.values_mut() {
            runs.sort_by_key(|r| r.key.repetition);
        }
        let algorithms: BTreeMap<String, AlgorithmSummary> = algs
            .iter()
            .map(|(a, runs)| (a.clone(), summarize_algorithm(runs)))
            .collect();
        let idx = out.len();
        let mut cell = CellSummary {
            problem,
            instance,
            dimension,
            algorithms,
            final_test: None,
            cpu_test: None,
            cpu_ratio: None,
            mean_reduced_dim: None,
            reduction_fraction: None,
        };
        if let Some(p) = cell.algorithms.get(pca) {
            cell.mean_reduced_dim = Some(p.mean_reduced_dim);
            cell.reduction_fraction = Some(1.0 - p.mean_reduced_dim / dimension as f64);
        }
        if let (Some(b), Some(p)) = (cell.algorithms.get(bo), cell.algorithms.get(pca)) {
            if !b.elapsed_seconds.is_empty() && !p.elapsed_seconds.is_empty() {
                let tb = mean(&b.elapsed_seconds);
                let tp = mean(&p.elapsed_seconds);
                cell.cpu_ratio = Some(if tb == tp { 1.0 } else { tp / tb });
            }
            if b.runs >= 2 && p.runs >= 2 {
                if let Ok(r) = mann_whitney_u(&p.final_precision, &b.final_precision, Alternative::TwoSided) {
                    final_results.push((idx, r));
                }
                if let Ok(r) = mann_whitney_u(&p.elapsed_seconds, &b.elapsed_seconds, Alternative::TwoSided) {
                    cpu_results.push((idx, r));
                }
            }
        }
        out.push(cell);
    }

    let adjust = |results: &mut Vec<(usize, TestResult)>, level: f64| {
        let ps: Vec<f64> = results.iter().map(|(_, r)| r.p_value).collect();
        let adj = holm_bonferroni(&ps).expect("p-values lie in [0, 1]");
        for ((_, r), a) in results.iter_mut().zip(adj) {
            r.decide(a, level);
        }
    };
    adjust(&mut final_results, precision_level);
    adjust(&mut cpu_results, cpu_level);
    for (i, r) in final_results {
        out[i].final_test = Some(TestSummary::new(
            "wilcoxon-rank-sum / mann-whitney-u",
            Alternative::TwoSided,
            &r,
            precision_level,
        ));
    }
    for (i, r) in cpu_results {
        out[i].cpu_test = Some(TestSummary::new("mann-whitney-u", Alternative::TwoSided, &r, cpu_level));
    }

    Summary {
        cells: out,
        failed_runs,
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| Error::Argument(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Plain-text overview, one line per cell and algorithm.
pub fn render_table(summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<22} {:>4} {:>4} {:<8} {:>5} {:>13} {:>10}",
        "problem", "inst", "dim", "algo", "runs", "final_prec", "time_s"
    );
    for c in &summary.cells {
        for (name, a) in &c.algorithms {
            let fin = a.mean_precision.last().copied().unwrap_or(f64::NAN);
            let t = if a.elapsed_seconds.is_empty() {
                f64::NAN
            } else {
                mean(&a.elapsed_seconds)
            };
            let _ = writeln!(
                s,
                "{:<22} {:>4} {:>4} {:<8} {:>5} {:>13.4e} {:>10.2}",
                c.problem, c.instance, c.dimension, name, a.runs, fin, t
            );
        }
        if let Some(t) = &c.final_test {
            let _ = writeln!(
                s,
                "    final precision test: p = {:.4}, adjusted = {:.4}, reject = {}",
                t.p, t.p_adjusted, t.reject
            );
        }
        if let Some(t) = &c.cpu_test {
            let _ = writeln!(
                s,
                "    cpu time test: p = {:.4}, adjusted = {:.4}, reject = {}",
                t.p, t.p_adjusted, t.reject
            );
        }
        if let (Some(r), Some(d), Some(f)) = (c.cpu_ratio, c.mean_reduced_dim, c.reduction_fraction) {
            let _ = writeln!(
                s,
                "    cpu ratio = {r:.4}, mean r = {d:.2}, reduction = {:.1}%",
                100.0 * f
            );
        }
    }
    if !summary.failed_runs.is_empty() {
        let _ = writeln!(s, "failed runs: {}", summary.failed_runs.join(", "));
    }
    s
}
