//! Experiment runner and statistics for comparing the optimizers.

pub mod config;
pub mod experiment;
pub mod stats;
pub mod summary;

pub use config::{BudgetRule, ExperimentConfig, ProblemSpec, FULL_DE_BUDGET_SCALE};
pub use experiment::{run_experiment, run_seed, run_task, tasks, ExperimentReport, RunTask};
pub use stats::{holm_bonferroni, mann_whitney_u, wilcoxon_rank_sum, Alternative, TestResult};
pub use summary::{load_runs, summarize, write_summary, CsvRow, RunKey, RunSeries, Summary};
