//! Optimization loops: standard BO, PCA-assisted BO and a random-search
//! baseline. All three start from the same seeded Latin hypercube design.

use std::time::Instant;

use log::warn;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{bounding_cube, expected_improvement, penalized_ei_unchecked};
use crate::de::{de_maximize, DeConfig};
use crate::doe::{lhs_sample_with_rng, BoxDomain, DEFAULT_MAXIMIN_ITERS};
use crate::error::{Error, Result};
use crate::gpr::{FitOptions, GprModel, HyperBounds, Kernel};
use crate::linalg::{sq_dist, Matrix};
use crate::pca::{fit_pca, PcaMap};
use crate::scalar::Scalar;

/// Proposals closer than this to an archived point are perturbed.
pub const DUPLICATE_RADIUS: f64 = 1e-8;

/// Evaluated points and their objective values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Matrix<T>,
    y: Vec<T>,
    best_index: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            x: Matrix::zeros(0, dim),
            y: Vec::new(),
            best_index: 0,
        }
    }

    pub fn push(&mut self, x: &[T], y: T) {
        self.x.push_row(x);
        self.y.push(y);
        if self.y.len() == 1 || y < self.y[self.best_index] {
            self.best_index = self.y.len() - 1;
        }
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn best_index(&self) -> usize {
        self.best_index
    }

    pub fn best_value(&self) -> Option<T> {
        self.y.get(self.best_index).copied()
    }

    pub fn best_point(&self) -> Option<&[T]> {
        (!self.is_empty()).then(|| self.x.row(self.best_index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "random")]
    RandomSearch,
    #[serde(rename = "bo")]
    Bo,
    #[serde(rename = "pca-bo")]
    PcaBo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::RandomSearch, Algorithm::Bo, Algorithm::PcaBo];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::RandomSearch => "random",
            Algorithm::Bo => "bo",
            Algorithm::PcaBo => "pca-bo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Inner optimizer settings: population `population_per_dim · r` and budget
/// `budget_scale · r²` in an `r`-dimensional search.
#[derive(Debug, Clone, PartialEq)]
pub struct DeSettings<T> {
    pub population_per_dim: usize,
    pub budget_scale: f64,
    pub differential_weight: T,
    pub crossover_rate: T,
}

impl<T: Scalar> Default for DeSettings<T> {
    fn default() -> Self {
        Self {
            population_per_dim: 20,
            budget_scale: 500.0,
            differential_weight: T::lit(0.8),
            crossover_rate: T::lit(0.9),
        }
    }
}

impl<T: Scalar> DeSettings<T> {
    fn config(&self, r: usize, seed: u64) -> DeConfig<T> {
        let population_size = (self.population_per_dim * r).max(4);
        let max_evaluations = ((self.budget_scale * (r * r) as f64).ceil() as usize).max(population_size);
        DeConfig {
            population_size,
            max_evaluations,
            differential_weight: self.differential_weight,
            crossover_rate: self.crossover_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    /// Total objective evaluations, design included.
    pub budget: usize,
    pub doe_fraction: f64,
    /// Fraction of weighted variance kept by the PCA map.
    pub alpha: T,
    pub de: DeSettings<T>,
    pub gpr_restarts: usize,
    pub gpr_max_iters: usize,
    pub lhs_iterations: usize,
    pub seed: u64,
}

impl<T: Scalar> OptimizerConfig<T> {
    /// Defaults for a `dim`-dimensional problem: budget `10·dim + 50`.
    pub fn for_dimension(dim: usize) -> Self {
        Self {
            budget: 10 * dim + 50,
            doe_fraction: 0.2,
            alpha: T::lit(0.95),
            de: DeSettings::default(),
            gpr_restarts: 5,
            gpr_max_iters: 50,
            lhs_iterations: DEFAULT_MAXIMIN_ITERS,
            seed: 0,
        }
    }

    /// `⌈doe_fraction · budget⌉`, at least 2.
    pub fn doe_size(&self) -> usize {
        ((self.doe_fraction * self.budget as f64).ceil() as usize).max(2)
    }

    fn validate(&self) -> Result<()> {
        if !(self.doe_fraction > 0.0 && self.doe_fraction <= 1.0) {
            return Err(Error::Argument(format!(
                "doe_fraction must lie in (0, 1], got {}",
                self.doe_fraction
            )));
        }
        if self.budget <= self.doe_size() {
            return Err(Error::Argument(format!(
                "budget {} must exceed the design size {}",
                self.budget,
                self.doe_size()
            )));
        }
        if !(self.alpha > T::zero() && self.alpha <= T::one()) {
            return Err(Error::Argument(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// One optimization step after the design phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub evaluations: usize,
    pub best_so_far: f64,
    pub reduced_dim: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub doe_size: usize,
    /// Objective calls made so far.
    pub evaluations: usize,
    pub entries: Vec<IterationRecord>,
    /// Proposals that had to be clipped into the domain.
    pub clip_events: usize,
    /// Proposals perturbed away from an archived point.
    pub duplicate_events: usize,
    /// Iterations where the PCA map fell back to a single axis.
    pub pca_fallbacks: usize,
    /// Wall-clock seconds of the whole run.
    pub total_seconds: f64,
}

impl RunRecord {
    pub fn evaluations_used(&self) -> usize {
        self.evaluations
    }

    pub fn mean_reduced_dim(&self) -> f64 {
        if self.entries.is_empty() {
            return f64::NAN;
        }
        self.entries.iter().map(|e| e.reduced_dim as f64).sum::<f64>() / self.entries.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub dataset: Dataset<T>,
    pub record: RunRecord,
}

/// Standard BO: expected improvement maximized over the full domain.
pub fn run_bo<T, F>(objective: F, domain: &BoxDomain<T>, config: &OptimizerConfig<T>) -> Result<RunOutput<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut run = Runner::start(objective, domain, config)?;
    let bounds = HyperBounds::for_widths(&domain.widths());
    let d = domain.dim();
    let mut warm: Option<Kernel<T>> = None;
    while run.dataset.len() < config.budget {
        let model = run.fit_model(run.dataset.x().clone(), &bounds, warm.take())?;
        let best = run.dataset.best_value().expect("design evaluated");
        let de = config.de.config(d, run.rng.next_u64());
        let res = de_maximize(
            |x: &[T]| {
                let (m, v) = model.predict_unchecked(x);
                expected_improvement(m, v.sqrt(), best)
            },
            domain,
            &de,
        )?;
        warm = Some(model.kernel().clone());
        run.step(res.argmax, d)?;
    }
    Ok(run.finish())
}

/// PCA-assisted BO: each iteration refits the weighted PCA map, models the
/// objective in the reduced space and maximizes penalized EI over the
/// bounding cube.
pub fn run_pcabo<T, F>(objective: F, domain: &BoxDomain<T>, config: &OptimizerConfig<T>) -> Result<RunOutput<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut run = Runner::start(objective, domain, config)?;
    let mut warm: Option<Kernel<T>> = None;
    while run.dataset.len() < config.budget {
        let map = match fit_pca(run.dataset.x(), run.dataset.y(), config.alpha) {
            Ok(m) => m,
            Err(Error::DegenerateData(msg)) => {
                warn!("PCA fallback to a single axis: {msg}");
                run.record.pca_fallbacks += 1;
                let x = run.dataset.x();
                let n = T::lit(x.nrows() as f64);
                let mu = (0..x.ncols())
                    .map(|j| x.rows_iter().map(|r| r[j]).sum::<T>() / n)
                    .collect();
                PcaMap::axis_fallback(mu)
            }
            Err(e) => return Err(e),
        };
        let r = map.reduced_dim();
        let z = map.forward_map(run.dataset.x())?;
        let cube = bounding_cube(&map, domain)?;
        let search_box = cube.to_box()?;
        let bounds = HyperBounds::for_widths(&vec![T::lit(2.0) * cube.radius(); r]);
        let start = warm.take().filter(|k| k.dim() == r);
        let model = run.fit_model(z, &bounds, start)?;
        let best = run.dataset.best_value().expect("design evaluated");
        let de = config.de.config(r, run.rng.next_u64());
        let res = de_maximize(
            |z: &[T]| penalized_ei_unchecked(z, &model, &map, domain, best),
            &search_box,
            &de,
        )?;
        warm = Some(model.kernel().clone());
        let x = map.inverse_map(&res.argmax)?;
        run.step(x, r)?;
    }
    Ok(run.finish())
}

/// Uniform random sampling after the shared design.
pub fn run_random_search<T, F>(objective: F, domain: &BoxDomain<T>, config: &OptimizerConfig<T>) -> Result<RunOutput<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    let mut run = Runner::start(objective, domain, config)?;
    while run.dataset.len() < config.budget {
        let x = domain.sample_uniform(&mut run.rng);
        run.step(x, domain.dim())?;
    }
    Ok(run.finish())
}

/// Dispatches on `algorithm`.
pub fn run_algorithm<T, F>(
    algorithm: Algorithm,
    objective: F,
    domain: &BoxDomain<T>,
    config: &OptimizerConfig<T>,
) -> Result<RunOutput<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    match algorithm {
        Algorithm::RandomSearch => run_random_search(objective, domain, config),
        Algorithm::Bo => run_bo(objective, domain, config),
        Algorithm::PcaBo => run_pcabo(objective, domain, config),
    }
}

struct Runner<'a, T, F> {
    objective: F,
    domain: &'a BoxDomain<T>,
    config: &'a OptimizerConfig<T>,
    rng: ChaCha8Rng,
    dataset: Dataset<T>,
    record: RunRecord,
    started: Instant,
}

impl<'a, T, F> Runner<'a, T, F>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    fn start(objective: F, domain: &'a BoxDomain<T>, config: &'a OptimizerConfig<T>) -> Result<Self> {
        config.validate()?;
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let doe_size = config.doe_size();
        let design = lhs_sample_with_rng(domain, doe_size, config.lhs_iterations, &mut rng)?;
        let mut run = Self {
            objective,
            domain,
            config,
            rng,
            dataset: Dataset::new(domain.dim()),
            record: RunRecord {
                doe_size,
                ..RunRecord::default()
            },
            started,
        };
        for row in design.rows_iter() {
            run.evaluate(row)?;
        }
        Ok(run)
    }

    fn evaluate(&mut self, x: &[T]) -> Result<()> {
        let y = (self.objective)(x);
        self.record.evaluations += 1;
        if !y.is_finite() {
            self.record.total_seconds = self.started.elapsed().as_secs_f64();
            return Err(Error::NonFiniteObjective {
                record: Box::new(self.record.clone()),
            });
        }
        self.dataset.push(x, y);
        Ok(())
    }

    fn fit_model(
        &mut self,
        inputs: Matrix<T>,
        bounds: &HyperBounds<T>,
        warm: Option<Kernel<T>>,
    ) -> Result<GprModel<T>> {
        let options = FitOptions {
            restarts: self.config.gpr_restarts,
            seed: self.rng.next_u64(),
            warm_start: warm,
            max_iters: self.config.gpr_max_iters,
        };
        GprModel::fit(&inputs, self.dataset.y(), bounds, &options)
    }

    /// Repairs, evaluates and logs one proposal.
    fn step(&mut self, mut x: Vec<T>, reduced_dim: usize) -> Result<()> {
        if !self.domain.contains(&x) {
            warn!("proposal outside the domain, clipping");
            self.domain.clip(&mut x);
            self.record.clip_events += 1;
        }
        let radius2 = T::lit(DUPLICATE_RADIUS * DUPLICATE_RADIUS);
        let widths = self.domain.widths();
        for _ in 0..100 {
            let dup = self.dataset.x().rows_iter().any(|r| sq_dist(r, &x) <= radius2);
            if !dup {
                break;
            }
            self.record.duplicate_events += 1;
            for (v, &w) in x.iter_mut().zip(&widths) {
                let u = T::lit(self.rng.random::<f64>() * 2.0 - 1.0);
                *v += u * T::lit(1e-6) * w;
            }
            self.domain.clip(&mut x);
        }
        self.evaluate(&x)?;
        self.record.entries.push(IterationRecord {
            iteration: self.record.entries.len() + 1,
            evaluations: self.dataset.len(),
            best_so_far: self.dataset.best_value().expect("nonempty").to_f64_lossy(),
            reduced_dim,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        });
        Ok(())
    }

    fn finish(mut self) -> RunOutput<T> {
        self.record.total_seconds = self.started.elapsed().as_secs_f64();
        RunOutput {
            dataset: self.dataset,
            record: self.record,
        }
    }
}
