//! Box domains and Latin hypercube designs with maximin improvement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{sq_dist, Matrix};
use crate::scalar::Scalar;

/// Default number of maximin swap attempts.
pub const DEFAULT_MAXIMIN_ITERS: usize = 1000;

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxDomain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::Domain("domain must have at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::Domain(format!(
                "lower has {} entries but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain(format!(
                    "coordinate {i}: lower {lo} must be strictly below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| u - l).collect()
    }

    pub fn midpoint(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| half * (l + u))
            .collect()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    /// Componentwise projection onto the box.
    pub fn clip(&self, x: &mut [T]) {
        for (v, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.max(l).min(u);
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + (u - l) * T::lit(rng.random::<f64>()))
            .collect()
    }
}

/// Latin hypercube design of `n` points in `domain`, seeded.
///
/// Each point sits at the center of its stratum. With `optimize_iters > 0`
/// random within-column swaps are kept when they improve the maximin
/// criterion.
pub fn lhs_sample<T: Scalar>(domain: &BoxDomain<T>, n: usize, seed: u64, optimize_iters: usize) -> Result<Matrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lhs_sample_with_rng(domain, n, optimize_iters, &mut rng)
}

/// As [`lhs_sample`], drawing from a caller-owned generator.
pub fn lhs_sample_with_rng<T: Scalar, R: Rng + ?Sized>(
    domain: &BoxDomain<T>,
    n: usize,
    optimize_iters: usize,
    rng: &mut R,
) -> Result<Matrix<T>> {
    if n == 0 {
        return Err(Error::Argument("LHS needs at least one point".into()));
    }
    let d = domain.dim();
    // strata[j][i] is the stratum of point i along coordinate j
    let mut strata: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        })
        .collect();

    if optimize_iters > 0 && n >= 2 {
        maximin_improve(&mut strata, n, optimize_iters, rng);
    }

    Ok(strata_to_points(domain, &strata, n))
}

fn strata_to_points<T: Scalar>(domain: &BoxDomain<T>, strata: &[Vec<usize>], n: usize) -> Matrix<T> {
    let d = domain.dim();
    let nf = T::lit(n as f64);
    let mut m = Matrix::zeros(n, d);
    for (j, col) in strata.iter().enumerate() {
        let lo = domain.lower[j];
        let w = domain.upper[j] - domain.lower[j];
        for (i, &s) in col.iter().enumerate() {
            m[(i, j)] = lo + w * (T::lit(s as f64) + T::lit(0.5)) / nf;
        }
    }
    m
}

/// `(min distance², number of pairs attaining it)` on the unit-stratum grid.
fn maximin_score(strata: &[Vec<usize>], n: usize) -> (u64, usize) {
    let mut best = u64::MAX;
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            let d2: u64 = strata
                .iter()
                .map(|col| {
                    let diff = col[a].abs_diff(col[b]) as u64;
                    diff * diff
                })
                .sum();
            if d2 < best {
                best = d2;
                count = 1;
            } else if d2 == best {
                count += 1;
            }
        }
    }
    (best, count)
}

// Integer stratum indices keep the comparison exact; the physical distance is
// a per-axis rescaling of it, so for cubic domains the ordering is identical.
fn maximin_improve<R: Rng + ?Sized>(strata: &mut [Vec<usize>], n: usize, iters: usize, rng: &mut R) {
    let d = strata.len();
    let mut score = maximin_score(strata, n);
    for _ in 0..iters {
        let j = rng.random_range(0..d);
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        strata[j].swap(a, b);
        let cand = maximin_score(strata, n);
        if cand.0 > score.0 || (cand.0 == score.0 && cand.1 < score.1) {
            score = cand;
        } else {
            strata[j].swap(a, b);
        }
    }
}

/// Smallest pairwise Euclidean distance between the rows of `points`.
pub fn min_pairwise_distance<T: Scalar>(points: &Matrix<T>) -> T {
    let n = points.nrows();
    let mut best = T::infinity();
    for a in 0..n {
        for b in a + 1..n {
            best = best.min(sq_dist(points.row(a), points.row(b)));
        }
    }
    best.sqrt()
}
