use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::summary::{summarize, write_csv, write_summary, RunKey, RunSeries, Summary};
use crate::benchmark::make_problem;
use crate::engine::{run_algorithm, Algorithm, RunOutput};
use crate::error::{Error, Result};

/// One (algorithm, problem, dimension, repetition) unit of work.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTask {
    pub algorithm: Algorithm,
    pub problem: String,
    pub instance: u64,
    pub dimension: usize,
    pub repetition: usize,
}

impl RunTask {
    pub fn key(&self) -> RunKey {
        RunKey {
            algorithm: self.algorithm.name().to_string(),
            problem: self.problem.clone(),
            instance: self.instance,
            dimension: self.dimension,
            repetition: self.repetition,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of a run. Independent of the algorithm, so every algorithm of the
/// same repetition starts from the same design.
pub fn run_seed(base: u64, problem: &str, instance: u64, dimension: usize, repetition: usize) -> u64 {
    let mut h = splitmix(base);
    for b in problem.bytes() {
        h = splitmix(h ^ b as u64);
    }
    h = splitmix(h ^ instance);
    h = splitmix(h ^ dimension as u64);
    splitmix(h ^ repetition as u64)
}

pub fn tasks(config: &ExperimentConfig) -> Vec<RunTask> {
    let mut out = Vec::new();
    for p in &config.problems {
        for &dimension in &p.dimensions {
            for repetition in 0..config.repetitions {
                for &algorithm in &config.algorithms {
                    out.push(RunTask {
                        algorithm,
                        problem: p.name.clone(),
                        instance: p.instance,
                        dimension,
                        repetition,
                    });
                }
            }
        }
    }
    out
}

/// Runs one task to completion on the configured problem.
pub fn run_task(config: &ExperimentConfig, task: &RunTask) -> Result<(RunOutput<f64>, f64)> {
    let problem = make_problem::<f64>(&task.problem, task.dimension, task.instance)?;
    let seed = run_seed(
        config.seed,
        &task.problem,
        task.instance,
        task.dimension,
        task.repetition,
    );
    let opt = config.optimizer_config(task.dimension, seed);
    let out = run_algorithm(
        task.algorithm,
        |x: &[f64]| problem.evaluate_unchecked(x),
        problem.domain(),
        &opt,
    )?;
    Ok((out, problem.f_opt()))
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub csv_files: Vec<PathBuf>,
    pub failed_runs: Vec<String>,
    pub summary: Summary,
    pub summary_path: PathBuf,
}

/// Executes every task on a pool of `config.workers` threads, writes one CSV
/// per run and a `summary.json`.
///
/// A run that panics or errors is logged, marked with a `.failed` file and
/// left out of the summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    // surface permission problems before spending any compute
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;

    let tasks = tasks(config);
    info!("running {} tasks on {} workers", tasks.len(), config.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let outcomes: Vec<(RunKey, std::result::Result<RunSeries, String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let key = task.key();
                let res = catch_unwind(AssertUnwindSafe(|| run_task(config, task)));
                let res = match res {
                    Ok(Ok((out, f_opt))) => Ok(RunSeries::from_record(key.clone(), &out.record, f_opt)),
                    Ok(Err(e)) => Err(e.to_string()),
                    Err(panic) => Err(panic
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "worker panicked".into())),
                };
                (key, res)
            })
            .collect()
    });

    let mut csv_files = Vec::new();
    let mut series = Vec::new();
    let mut failed = Vec::new();
    for (key, res) in outcomes {
        let stem = key.file_stem();
        match res {
            Ok(s) => {
                let path = dir.join(format!("{stem}.csv"));
                write_csv(&path, &s.rows)?;
                csv_files.push(path);
                series.push(s);
            }
            Err(reason) => {
                warn!("run {stem} failed: {reason}");
                fs::write(dir.join(format!("{stem}.failed")), reason + "\n")?;
                failed.push(stem);
            }
        }
    }

    let summary = summarize(&series, failed.clone(), config.precision_level, config.cpu_level);
    let summary_path = dir.join("summary.json");
    write_summary(&summary_path, &summary)?;
    Ok(ExperimentReport {
        output_dir: dir,
        csv_files,
        failed_runs: failed,
        summary,
        summary_path,
    })
}
