//! Differential evolution, `best/1/bin`, maximizing over a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::doe::{lhs_sample_with_rng, BoxDomain};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig<T> {
    pub population_size: usize,
    pub max_evaluations: usize,
    /// Differential weight `F`.
    pub differential_weight: T,
    /// Binomial crossover rate `CR`.
    pub crossover_rate: T,
    pub seed: u64,
}

impl<T: Scalar> DeConfig<T> {
    pub fn new(population_size: usize, max_evaluations: usize, seed: u64) -> Self {
        Self {
            population_size,
            max_evaluations,
            differential_weight: T::lit(0.8),
            crossover_rate: T::lit(0.9),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population_size < 4 {
            return Err(Error::Argument(format!(
                "population size must be at least 4, got {}",
                self.population_size
            )));
        }
        if self.max_evaluations == 0 {
            return Err(Error::Argument("evaluation budget must be positive".into()));
        }
        let f = self.differential_weight;
        if !(f > T::zero() && f <= T::lit(2.0)) {
            return Err(Error::Argument(format!("F must lie in (0, 2], got {f}")));
        }
        let cr = self.crossover_rate;
        if !(cr >= T::zero() && cr <= T::one()) {
            return Err(Error::Argument(format!("CR must lie in [0, 1], got {cr}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult<T> {
    pub argmax: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    /// Best value after initialization and after each generation.
    pub best_history: Vec<T>,
}

/// Maximizes `objective` over `bounds`.
///
/// Mutants are `x_best + F·(x_a − x_b)`, clipped to the box, crossed over
/// binomially with one guaranteed mutant coordinate; trials replace their
/// parent when not worse. The incumbent is updated immediately. Stops once
/// `max_evaluations` is reached; the initial population counts.
pub fn de_maximize<T, F>(mut objective: F, bounds: &BoxDomain<T>, config: &DeConfig<T>) -> Result<DeResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> T,
{
    config.validate()?;
    let d = bounds.dim();
    let np = config.population_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let init = lhs_sample_with_rng(bounds, np, 0, &mut rng)?;
    let mut pop: Vec<Vec<T>> = init.rows_iter().map(<[T]>::to_vec).collect();
    let mut fit: Vec<T> = Vec::with_capacity(np);
    for x in &pop {
        fit.push(sanitize(objective(x)));
    }
    let mut evaluations = np;
    let mut best = argmax(&fit);
    let mut best_history = vec![fit[best]];

    let mut trial = vec![T::zero(); d];
    'outer: while evaluations < config.max_evaluations {
        for i in 0..np {
            if evaluations >= config.max_evaluations {
                break 'outer;
            }
            let (a, b) = pick_two(np, i, &mut rng);
            let forced = rng.random_range(0..d);
            for j in 0..d {
                let cross = j == forced || T::lit(rng.random::<f64>()) < config.crossover_rate;
                trial[j] = if cross {
                    let v = pop[best][j] + config.differential_weight * (pop[a][j] - pop[b][j]);
                    v.max(bounds.lower()[j]).min(bounds.upper()[j])
                } else {
                    pop[i][j]
                };
            }
            let f = sanitize(objective(&trial));
            evaluations += 1;
            if f >= fit[i] {
                pop[i].copy_from_slice(&trial);
                fit[i] = f;
                if f > fit[best] {
                    best = i;
                }
            }
        }
        best_history.push(fit[best]);
    }
    if best_history.last() != Some(&fit[best]) {
        best_history.push(fit[best]);
    }

    Ok(DeResult {
        argmax: pop[best].clone(),
        value: fit[best],
        evaluations,
        best_history,
    })
}

fn sanitize<T: Scalar>(v: T) -> T {
    if v.is_nan() {
        T::neg_infinity()
    } else {
        v
    }
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Two distinct indices in `0..n`, both different from `exclude`.
fn pick_two<R: Rng>(n: usize, exclude: usize, rng: &mut R) -> (usize, usize) {
    let mut a = rng.random_range(0..n - 1);
    if a >= exclude {
        a += 1;
    }
    let (lo, hi) = if a < exclude { (a, exclude) } else { (exclude, a) };
    let mut b = rng.random_range(0..n - 2);
    if b >= lo {
        b += 1;
    }
    if b >= hi {
        b += 1;
    }
    (a, b)
}
