use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmark::ProblemKind;
use crate::engine::{Algorithm, DeSettings, OptimizerConfig};
use crate::error::{Error, Result};

/// Full-scale DE budget factor `c` in `c·r²`.
pub const FULL_DE_BUDGET_SCALE: f64 = 20020.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub dimensions: Vec<usize>,
    #[serde(default)]
    pub instance: u64,
}

/// Total evaluations `per_dimension·D + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetRule {
    pub per_dimension: usize,
    pub offset: usize,
}

impl Default for BudgetRule {
    fn default() -> Self {
        Self {
            per_dimension: 10,
            offset: 50,
        }
    }
}

impl BudgetRule {
    pub fn budget(&self, dim: usize) -> usize {
        self.per_dimension * dim + self.offset
    }
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Bo, Algorithm::PcaBo]
}
fn default_repetitions() -> usize {
    10
}
fn default_doe_fraction() -> f64 {
    0.2
}
fn default_de_budget_scale() -> f64 {
    500.0
}
fn default_de_population() -> usize {
    20
}
fn default_alpha() -> f64 {
    0.95
}
fn default_gpr_restarts() -> usize {
    5
}
fn default_gpr_max_iters() -> usize {
    50
}
fn default_lhs_iterations() -> usize {
    crate::doe::DEFAULT_MAXIMIN_ITERS
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_workers() -> usize {
    1
}
fn default_precision_level() -> f64 {
    0.05
}
fn default_cpu_level() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemSpec>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub budget: BudgetRule,
    #[serde(default = "default_doe_fraction")]
    pub doe_fraction: f64,
    #[serde(default = "default_de_budget_scale")]
    pub de_budget_scale: f64,
    #[serde(default = "default_de_population")]
    pub de_population_per_dim: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gpr_restarts")]
    pub gpr_restarts: usize,
    #[serde(default = "default_gpr_max_iters")]
    pub gpr_max_iters: usize,
    #[serde(default = "default_lhs_iterations")]
    pub lhs_iterations: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    /// Significance level of the final-precision comparison.
    #[serde(default = "default_precision_level")]
    pub precision_level: f64,
    /// Significance level of the CPU-time comparison.
    #[serde(default = "default_cpu_level")]
    pub cpu_level: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.problems.is_empty() {
            return bad("no problems configured".into());
        }
        for p in &self.problems {
            if p.name.parse::<ProblemKind>().is_err() {
                return bad(format!("unknown problem '{}'", p.name));
            }
            if p.dimensions.is_empty() || p.dimensions.contains(&0) {
                return bad(format!("problem '{}' needs positive dimensions", p.name));
            }
            for &d in &p.dimensions {
                let cfg = self.optimizer_config(d, 0);
                if cfg.budget <= cfg.doe_size() {
                    return bad(format!(
                        "budget for '{}' in {d}D does not exceed the design size",
                        p.name
                    ));
                }
            }
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms configured".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        if !(self.doe_fraction > 0.0 && self.doe_fraction <= 1.0) {
            return bad(format!("doe_fraction {} outside (0, 1]", self.doe_fraction));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} outside (0, 1]", self.alpha));
        }
        if !(self.de_budget_scale > 0.0) || self.de_population_per_dim == 0 {
            return bad("DE budget scale and population must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        for level in [self.precision_level, self.cpu_level] {
            if !(level > 0.0 && level < 1.0) {
                return bad(format!("significance level {level} outside (0, 1)"));
            }
        }
        Ok(())
    }

    pub fn optimizer_config(&self, dim: usize, seed: u64) -> OptimizerConfig<f64> {
        OptimizerConfig {
            budget: self.budget.budget(dim),
            doe_fraction: self.doe_fraction,
            alpha: self.alpha,
            de: DeSettings {
                population_per_dim: self.de_population_per_dim,
                budget_scale: self.de_budget_scale,
                ..DeSettings::default()
            },
            gpr_restarts: self.gpr_restarts,
            gpr_max_iters: self.gpr_max_iters,
            lhs_iterations: self.lhs_iterations,
            seed,
        }
    }
}
