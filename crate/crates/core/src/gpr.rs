//! Gaussian process regression with an anisotropic squared-exponential
//! kernel.
//!
//! Targets are modelled around a constant prior mean (their sample mean).
//! Hyperparameters are chosen by maximizing the log marginal likelihood with
//! a multi-started projected gradient ascent in log space. The observation
//! noise is a jitter floor that only grows when the Cholesky factorization
//! fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{dim_check, Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, cholesky_solve, dot, solve_lower, sq_dist, Matrix};
use crate::scalar::Scalar;

/// Jitter floor, in target units.
pub const JITTER_FLOOR: f64 = 1e-10;
/// Largest jitter tried before giving up, relative to the target variance.
pub const JITTER_CEILING: f64 = 1e-4;
/// Rows closer than this are treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-10;

/// Squared-exponential kernel with one length-scale per input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T> {
    signal_variance: T,
    length_scales: Vec<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn squared_exponential(signal_variance: T, length_scales: Vec<T>) -> Result<Self> {
        if !(signal_variance > T::zero()) || !signal_variance.is_finite() {
            return Err(Error::Argument(format!(
                "signal variance must be positive, got {signal_variance}"
            )));
        }
        if length_scales.is_empty() {
            return Err(Error::Argument("kernel needs at least one length-scale".into()));
        }
        if let Some(l) = length_scales.iter().find(|&&l| !(l > T::zero()) || !l.is_finite()) {
            return Err(Error::Argument(format!("length-scales must be positive, got {l}")));
        }
        Ok(Self {
            signal_variance,
            length_scales,
        })
    }

    pub fn signal_variance(&self) -> T {
        self.signal_variance
    }

    pub fn length_scales(&self) -> &[T] {
        &self.length_scales
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    /// `σ² · exp(−½ Σⱼ ((aⱼ − bⱼ)/ℓⱼ)²)`.
    pub fn eval(&self, a: &[T], b: &[T]) -> Result<T> {
        dim_check("kernel input a", self.dim(), a.len())?;
        dim_check("kernel input b", self.dim(), b.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[T], b: &[T]) -> T {
        let mut q = T::zero();
        for ((&x, &y), &l) in a.iter().zip(b).zip(&self.length_scales) {
            let d = (x - y) / l;
            q += d * d;
        }
        self.signal_variance * (-T::lit(0.5) * q).exp()
    }

    /// Gram matrix `K[i][j] = k(xᵢ, xⱼ)` over the rows of `points`.
    pub fn gram(&self, points: &Matrix<T>) -> Result<Matrix<T>> {
        dim_check("gram inputs", self.dim(), points.ncols())?;
        let n = points.nrows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = self.signal_variance;
            for j in 0..i {
                let v = self.eval_unchecked(points.row(i), points.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }
}

/// Box constraints for hyperparameter search.
///
/// Length-scale bounds are absolute; signal variance bounds are factors of
/// the target variance.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBounds<T> {
    pub length_scale: Vec<(T, T)>,
    pub signal_variance_factor: (T, T),
}

impl<T: Scalar> HyperBounds<T> {
    /// `[1e-2, 1e2]·width` per dimension and `[1e-3, 1e3]·var(y)`.
    pub fn for_widths(widths: &[T]) -> Self {
        let length_scale = widths
            .iter()
            .map(|&w| {
                let w = if w > T::zero() && w.is_finite() { w } else { T::one() };
                (T::lit(1e-2) * w, T::lit(1e2) * w)
            })
            .collect();
        Self {
            length_scale,
            signal_variance_factor: (T::lit(1e-3), T::lit(1e3)),
        }
    }

    /// Bounds from the per-column range of the inputs.
    pub fn from_inputs(inputs: &Matrix<T>) -> Self {
        let widths: Vec<T> = (0..inputs.ncols())
            .map(|j| {
                let col = inputs.column(j);
                let lo = col.iter().copied().fold(T::infinity(), T::min);
                let hi = col.iter().copied().fold(T::neg_infinity(), T::max);
                hi - lo
            })
            .collect();
        Self::for_widths(&widths)
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions<T> {
    /// Number of multi-started local searches.
    pub restarts: usize,
    pub seed: u64,
    /// Optional starting point for the first local search.
    pub warm_start: Option<Kernel<T>>,
    /// Iteration cap of each local search.
    pub max_iters: usize,
}

impl<T> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            restarts: 5,
            seed: 0,
            warm_start: None,
            max_iters: 50,
        }
    }
}

/// Fitted GP posterior.
#[derive(Debug, Clone)]
pub struct GprModel<T> {
    inputs: Matrix<T>,
    targets: Vec<T>,
    prior_mean: T,
    kernel: Kernel<T>,
    noise_variance: T,
    cholesky: Matrix<T>,
    alpha: Vec<T>,
}

impl<T: Scalar> GprModel<T> {
    /// Conditions a GP with fixed hyperparameters on the data.
    pub fn condition(
        inputs: Matrix<T>,
        targets: Vec<T>,
        kernel: Kernel<T>,
        noise_variance: T,
        prior_mean: T,
    ) -> Result<Self> {
        dim_check("training targets", inputs.nrows(), targets.len())?;
        dim_check("training inputs", kernel.dim(), inputs.ncols())?;
        if inputs.nrows() == 0 {
            return Err(Error::Argument("no training data".into()));
        }
        if noise_variance < T::zero() {
            return Err(Error::Argument("noise variance must be nonnegative".into()));
        }
        let mut k = kernel.gram(&inputs)?;
        for i in 0..k.nrows() {
            k[(i, i)] += noise_variance;
        }
        let l = cholesky(&k).ok_or_else(|| Error::Fit("kernel matrix is not positive definite".into()))?;
        let centered: Vec<T> = targets.iter().map(|&y| y - prior_mean).collect();
        let mut alpha = cholesky_solve(&l, &centered);
        // one step of iterative refinement; K can be close to singular
        let kr = k.mul_vec(&alpha);
        let resid: Vec<T> = centered.iter().zip(&kr).map(|(&c, &v)| c - v).collect();
        for (a, d) in alpha.iter_mut().zip(cholesky_solve(&l, &resid)) {
            *a += d;
        }
        Ok(Self {
            inputs,
            targets,
            prior_mean,
            kernel,
            noise_variance,
            cholesky: l,
            alpha,
        })
    }

    /// Fits hyperparameters by maximizing the log marginal likelihood.
    ///
    /// Rows within [`DUPLICATE_TOLERANCE`] of an earlier row are merged,
    /// keeping the smaller target.
    pub fn fit(inputs: &Matrix<T>, targets: &[T], bounds: &HyperBounds<T>, options: &FitOptions<T>) -> Result<Self> {
        dim_check("training targets", inputs.nrows(), targets.len())?;
        dim_check("hyperparameter bounds", inputs.ncols(), bounds.length_scale.len())?;
        if inputs.nrows() < 2 {
            return Err(Error::Argument("GPR fit needs at least two points".into()));
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::Argument("targets must be finite".into()));
        }
        let (x, y) = dedup(inputs, targets);
        let n = y.len();
        let nf = T::lit(n as f64);
        let mean = y.iter().copied().sum::<T>() / nf;
        let var = y.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / nf;
        let scale = if var > T::min_positive_value() && var.is_finite() {
            var
        } else {
            T::one()
        };
        let sd = scale.sqrt();
        let ys: Vec<T> = y.iter().map(|&v| (v - mean) / sd).collect();

        let floor = T::lit(JITTER_FLOOR) / scale;
        let objective = LmlObjective::new(&x, ys, floor, T::lit(JITTER_CEILING));
        let mut lo = Vec::with_capacity(x.ncols() + 1);
        let mut hi = Vec::with_capacity(x.ncols() + 1);
        lo.push(bounds.signal_variance_factor.0.ln());
        hi.push(bounds.signal_variance_factor.1.ln());
        for &(a, b) in &bounds.length_scale {
            lo.push(a.ln());
            hi.push(b.ln());
        }

        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let mut best: Option<(T, Vec<T>, T)> = None;
        for restart in 0..options.restarts.max(1) {
            let start = match (&options.warm_start, restart) {
                (Some(k), 0) if k.dim() == x.ncols() => {
                    let mut t = Vec::with_capacity(lo.len());
                    t.push((k.signal_variance() / scale).ln());
                    t.extend(k.length_scales().iter().map(|l| l.ln()));
                    t
                }
                (None, 0) => {
                    // unit signal, length-scale at the geometric middle of its range
                    let mut t = vec![T::zero()];
                    t.extend(lo[1..].iter().zip(&hi[1..]).map(|(&a, &b)| T::lit(0.5) * (a + b)));
                    t
                }
                _ => random_start(&lo, &hi, &mut rng),
            };
            let start = clamp_vec(start, &lo, &hi);
            if let Some((val, theta, jitter)) = objective.maximize(start, &lo, &hi, options.max_iters) {
                if best.as_ref().is_none_or(|b| val > b.0) {
                    best = Some((val, theta, jitter));
                }
            }
        }
        let (_, theta, jitter) =
            best.ok_or_else(|| Error::Fit("Cholesky failed at every restart even with maximal jitter".into()))?;

        let kernel = Kernel::squared_exponential(theta[0].exp() * scale, theta[1..].iter().map(|t| t.exp()).collect())?;
        let mut noise = jitter * scale;
        let ceiling = (T::lit(JITTER_CEILING) * scale).max(T::lit(JITTER_FLOOR));
        loop {
            match Self::condition(x.clone(), y.clone(), kernel.clone(), noise, mean) {
                Ok(m) => return Ok(m),
                Err(e) if noise >= ceiling => return Err(e),
                Err(_) => noise = (noise * T::lit(10.0)).min(ceiling),
            }
        }
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn prior_mean(&self) -> T {
        self.prior_mean
    }

    pub fn training_inputs(&self) -> &Matrix<T> {
        &self.inputs
    }

    pub fn training_targets(&self) -> &[T] {
        &self.targets
    }

    pub fn cholesky_factor(&self) -> &Matrix<T> {
        &self.cholesky
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Posterior mean and variance at `query`.
    pub fn predict(&self, query: &[T]) -> Result<(T, T)> {
        dim_check("query", self.dim(), query.len())?;
        Ok(self.predict_unchecked(query))
    }

    pub(crate) fn predict_unchecked(&self, query: &[T]) -> (T, T) {
        let kstar: Vec<T> = self
            .inputs
            .rows_iter()
            .map(|r| self.kernel.eval_unchecked(r, query))
            .collect();
        let mean = self.prior_mean + dot(&kstar, &self.alpha);
        let v = solve_lower(&self.cholesky, &kstar);
        let var = (self.kernel.signal_variance - dot(&v, &v)).max(T::zero());
        (mean, var)
    }

    /// `−½ yᵀK⁻¹y − ½ log|K| − (n/2) log 2π` with `y` centered at the prior mean.
    pub fn log_marginal_likelihood(&self) -> T {
        let n = self.targets.len();
        let fit: T = self
            .targets
            .iter()
            .zip(&self.alpha)
            .map(|(&y, &a)| (y - self.prior_mean) * a)
            .sum();
        let half_logdet: T = (0..n).map(|i| self.cholesky[(i, i)].ln()).sum();
        -T::lit(0.5) * fit - half_logdet - T::lit(0.5 * n as f64) * T::TAU().ln()
    }
}

fn dedup<T: Scalar>(inputs: &Matrix<T>, targets: &[T]) -> (Matrix<T>, Vec<T>) {
    let tol2 = T::lit(DUPLICATE_TOLERANCE * DUPLICATE_TOLERANCE);
    let mut x = Matrix::zeros(0, inputs.ncols());
    let mut y: Vec<T> = Vec::with_capacity(targets.len());
    for (row, &t) in inputs.rows_iter().zip(targets) {
        match (0..y.len()).find(|&k| sq_dist(x.row(k), row) <= tol2) {
            Some(k) => y[k] = y[k].min(t),
            None => {
                x.push_row(row);
                y.push(t);
            }
        }
    }
    (x, y)
}

fn random_start<T: Scalar, R: Rng>(lo: &[T], hi: &[T], rng: &mut R) -> Vec<T> {
    lo.iter()
        .zip(hi)
        .map(|(&a, &b)| a + (b - a) * T::lit(rng.random::<f64>()))
        .collect()
}

fn clamp_vec<T: Scalar>(mut v: Vec<T>, lo: &[T], hi: &[T]) -> Vec<T> {
    for ((x, &a), &b) in v.iter_mut().zip(lo).zip(hi) {
        *x = if x.is_finite() {
            x.max(a).min(b)
        } else {
            T::lit(0.5) * (a + b)
        };
    }
    v
}

/// Log marginal likelihood of standardized targets as a function of
/// `θ = (log σ², log ℓ₁, …, log ℓ_d)`.
pub(crate) struct LmlObjective<T> {
    n: usize,
    d: usize,
    y: Vec<T>,
    floor: T,
    ceiling: T,
    /// Squared coordinate differences of each pair `i > j`, `d` values per pair.
    pair_sq: Vec<T>,
}

impl<T: Scalar> LmlObjective<T> {
    /// `y` standardized; `floor` and `ceiling` bound the jitter in the same units.
    pub(crate) fn new(x: &Matrix<T>, y: Vec<T>, floor: T, ceiling: T) -> Self {
        let n = x.nrows();
        let d = x.ncols();
        let mut pair_sq = Vec::with_capacity(n * n.saturating_sub(1) / 2 * d);
        for i in 0..n {
            for j in 0..i {
                for (&a, &b) in x.row(i).iter().zip(x.row(j)) {
                    pair_sq.push((a - b) * (a - b));
                }
            }
        }
        Self {
            n,
            d,
            y,
            floor,
            ceiling: ceiling.max(floor),
            pair_sq,
        }
    }

    /// Value, gradient and the jitter that made the factorization succeed.
    pub(crate) fn value_and_grad(&self, theta: &[T]) -> Option<(T, Vec<T>, T)> {
        let (n, d) = (self.n, self.d);
        let sf2 = theta[0].exp();
        let inv_l2: Vec<T> = theta[1..].iter().map(|&t| (-(t + t)).exp()).collect();
        let mut kn = Matrix::zeros(n, n);
        let mut p = 0;
        for i in 0..n {
            kn[(i, i)] = sf2;
            for j in 0..i {
                let q: T = self.pair_sq[p * d..(p + 1) * d]
                    .iter()
                    .zip(&inv_l2)
                    .map(|(&s, &w)| s * w)
                    .sum();
                let v = sf2 * (-T::lit(0.5) * q).exp();
                kn[(i, j)] = v;
                kn[(j, i)] = v;
                p += 1;
            }
        }
        let mut jitter = self.floor;
        let l = loop {
            let mut k = kn.clone();
            for i in 0..n {
                k[(i, i)] += jitter;
            }
            if let Some(l) = cholesky(&k) {
                break l;
            }
            if jitter >= self.ceiling {
                return None;
            }
            jitter = (jitter * T::lit(10.0)).min(self.ceiling);
        };
        let alpha = cholesky_solve(&l, &self.y);
        let half_logdet: T = (0..n).map(|i| l[(i, i)].ln()).sum();
        let value = -T::lit(0.5) * dot(&self.y, &alpha) - half_logdet - T::lit(0.5 * n as f64) * T::TAU().ln();

        // dL/dθ = ½ tr((ααᵀ − K⁻¹) ∂K/∂θ)
        let kinv = cholesky_inverse(&l);
        let mut grad = vec![T::zero(); d + 1];
        let mut diag = T::zero();
        for i in 0..n {
            diag += alpha[i] * alpha[i] - kinv[(i, i)];
        }
        grad[0] = T::lit(0.5) * diag * sf2;
        let mut p = 0;
        for i in 0..n {
            for j in 0..i {
                let g = (alpha[i] * alpha[j] - kinv[(i, j)]) * kn[(i, j)];
                grad[0] += g;
                for ((gk, &s), &w) in grad[1..].iter_mut().zip(&self.pair_sq[p * d..(p + 1) * d]).zip(&inv_l2) {
                    *gk += g * s * w;
                }
                p += 1;
            }
        }
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return None;
        }
        Some((value, grad, jitter))
    }

    /// Projected gradient ascent with Barzilai-Borwein steps and Armijo
    /// backtracking. Never returns a value below that of `start`.
    pub(crate) fn maximize(&self, start: Vec<T>, lo: &[T], hi: &[T], max_iters: usize) -> Option<(T, Vec<T>, T)> {
        let (mut f, mut g, mut jitter) = self.value_and_grad(&start)?;
        let mut theta = start;
        let mut step = T::lit(0.1);
        let armijo = T::lit(1e-4);
        for _ in 0..max_iters {
            let mut accepted = None;
            let mut s = step;
            for _ in 0..30 {
                let cand = clamp_vec(theta.iter().zip(&g).map(|(&t, &gi)| t + s * gi).collect(), lo, hi);
                let moved: T = cand
                    .iter()
                    .zip(&theta)
                    .zip(&g)
                    .map(|((&c, &t), &gi)| (c - t) * gi)
                    .sum();
                if moved <= T::zero() {
                    break;
                }
                if let Some((fc, gc, jc)) = self.value_and_grad(&cand) {
                    if fc >= f + armijo * moved {
                        accepted = Some((cand, fc, gc, jc));
                        break;
                    }
                }
                s = s * T::lit(0.5);
            }
            let Some((cand, fc, gc, jc)) = accepted else { break };
            let sv: Vec<T> = cand.iter().zip(&theta).map(|(&a, &b)| a - b).collect();
            let yv: Vec<T> = gc.iter().zip(&g).map(|(&a, &b)| a - b).collect();
            let sy = dot(&sv, &yv);
            let ss = dot(&sv, &sv);
            step = if sy < T::zero() {
                (ss / -sy).max(T::lit(1e-4)).min(T::lit(10.0))
            } else {
                T::lit(1.0)
            };
            let improvement = fc - f;
            theta = cand;
            f = fc;
            g = gc;
            jitter = jc;
            if improvement <= T::lit(1e-9) * (T::one() + f.abs()) {
                break;
            }
        }
        Some((f, theta, jitter))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(xs: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(xs.len(), 1, xs.to_vec())
    }

    #[test]
    fn kernel_values() {
        let k = Kernel::squared_exponential(1.0, vec![1.0]).unwrap();
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 1.0);
        let v = k.eval(&[0.0], &[2f64.sqrt()]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.367_879).abs() < 1e-6);
        assert!(k.eval(&[0.0], &[1e3]).unwrap() < 1e-300);
        assert!(matches!(k.eval(&[0.0, 1.0], &[0.0]), Err(Error::Argument(_))));
        assert!(Kernel::squared_exponential(0.0, vec![1.0]).is_err());
        assert!(Kernel::squared_exponential(1.0, vec![-1.0]).is_err());
        let k2 = Kernel::squared_exponential(2.5, vec![0.5, 3.0]).unwrap();
        let (a, b) = ([0.1, -0.4], [1.2, 0.7]);
        assert_eq!(k2.eval(&a, &b).unwrap(), k2.eval(&b, &a).unwrap());
        assert_eq!(k2.eval(&a, &a).unwrap(), 2.5);
    }

    #[test]
    fn lml_single_point() {
        let k = Kernel::squared_exponential(1.0, vec![1.0]).unwrap();
        let m = GprModel::condition(column(&[0.0]), vec![0.0], k, 0.0, 0.0).unwrap();
        assert!((m.log_marginal_likelihood() + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn lml_zero_targets_has_no_fit_term() {
        let k = Kernel::squared_exponential(1.3, vec![0.7]).unwrap();
        let x = column(&[0.0, 0.5, 1.7]);
        let m = GprModel::condition(x, vec![0.0; 3], k, 1e-8, 0.0).unwrap();
        let l = m.cholesky_factor();
        let expected = -(0..3).map(|i| l[(i, i)].ln()).sum::<f64>() - 1.5 * std::f64::consts::TAU.ln();
        assert!((m.log_marginal_likelihood() - expected).abs() < 1e-12);
    }

    #[test]
    fn quadratic_interpolation() {
        let xs: Vec<f64> = (0..10).map(|i| -2.0 + 0.45 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x - 0.5 * x + 1.0).collect();
        let x = column(&xs);
        let m = GprModel::fit(&x, &ys, &HyperBounds::from_inputs(&x), &FitOptions::default()).unwrap();
        for (xi, yi) in xs.iter().zip(&ys) {
            let (mu, var) = m.predict(&[*xi]).unwrap();
            assert!((mu - yi).abs() <= 1e-6 * yi.abs().max(1.0), "{mu} vs {yi}");
            assert!(var < 1e-6);
        }
    }

    #[test]
    fn constant_targets() {
        let x = column(&[0.0, 1.0, 2.0, 3.5]);
        let m = GprModel::fit(&x, &[4.2; 4], &HyperBounds::from_inputs(&x), &FitOptions::default()).unwrap();
        for q in [-3.0, 0.5, 1.7, 10.0] {
            let (mu, _) = m.predict(&[q]).unwrap();
            assert!((mu - 4.2).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_regression() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * std::f64::consts::TAU / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let x = column(&xs);
        let m = GprModel::fit(
            &x,
            &ys,
            &HyperBounds::for_widths(&[std::f64::consts::TAU]),
            &FitOptions::default(),
        )
        .unwrap();
        let grid = 500;
        let mut sse = 0.0;
        for i in 0..=grid {
            let q = i as f64 * std::f64::consts::TAU / grid as f64;
            let (mu, _) = m.predict(&[q]).unwrap();
            sse += (mu - q.sin()).powi(2);
        }
        let rmse = (sse / (grid + 1) as f64).sqrt();
        assert!(rmse < 0.05, "rmse {rmse}");
    }

    #[test]
    fn prior_reversion_far_away() {
        let x = column(&[0.0, 0.3, 0.9]);
        let ys = [1.0, 2.0, 0.5];
        let m = GprModel::fit(&x, &ys, &HyperBounds::from_inputs(&x), &FitOptions::default()).unwrap();
        let far = 1e3 * m.kernel().length_scales()[0] + 10.0;
        let (mu, var) = m.predict(&[far]).unwrap();
        assert!((mu - m.prior_mean()).abs() < 1e-9);
        assert!((var - m.kernel().signal_variance()).abs() <= 1e-9 * m.kernel().signal_variance());
    }

    #[test]
    fn midpoint_has_maximal_variance() {
        let k = Kernel::squared_exponential(1.0, vec![0.8]).unwrap();
        let m = GprModel::condition(column(&[-1.0, 1.0]), vec![0.3, -0.2], k, 1e-10, 0.05).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| -1.0 + i as f64 / 200.0).collect();
        let (arg, _) = grid
            .iter()
            .map(|&q| (q, m.predict(&[q]).unwrap().1))
            .fold((0.0, f64::MIN), |acc, (q, v)| if v > acc.1 { (q, v) } else { acc });
        assert!(arg.abs() < 1e-12, "argmax {arg}");
    }

    #[test]
    fn duplicates_are_merged_keeping_best() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap();
        let ys = [3.0, 1.0, 2.0, 0.0];
        let m = GprModel::fit(&x, &ys, &HyperBounds::for_widths(&[1.0, 1.0]), &FitOptions::default()).unwrap();
        assert_eq!(m.training_targets(), &[2.0, 1.0, 0.0]);
        assert_eq!(m.training_inputs().nrows(), 3);
    }

    #[test]
    fn fit_argument_errors() {
        let x = column(&[0.0]);
        assert!(GprModel::fit(&x, &[1.0], &HyperBounds::for_widths(&[1.0]), &FitOptions::default()).is_err());
        let x = column(&[0.0, 1.0]);
        assert!(GprModel::fit(&x, &[1.0], &HyperBounds::for_widths(&[1.0]), &FitOptions::default()).is_err());
        let m = GprModel::fit(
            &x,
            &[1.0, 0.0],
            &HyperBounds::for_widths(&[1.0]),
            &FitOptions::default(),
        )
        .unwrap();
        assert!(matches!(m.predict(&[0.0, 1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let d = 3;
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect());
        let y: Vec<f64> = (0..n)
            .map(|i| (x[(i, 0)] * 1.3).sin() + x[(i, 1)] * x[(i, 2)])
            .collect();
        let obj = LmlObjective::new(&x, y, 1e-10, 1e-4);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..=d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let (_, grad, _) = obj.value_and_grad(&theta).unwrap();
            for k in 0..=d {
                let h = 1e-5;
                let mut tp = theta.clone();
                tp[k] += h;
                let mut tm = theta.clone();
                tm[k] -= h;
                let fd = (obj.value_and_grad(&tp).unwrap().0 - obj.value_and_grad(&tm).unwrap().0) / (2.0 * h);
                let rel = (fd - grad[k]).abs() / fd.abs().max(1e-3);
                assert!(rel < 1e-4, "component {k}: analytic {} vs fd {fd}", grad[k]);
            }
        }
    }

    #[test]
    fn local_search_never_decreases_evidence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..5 {
            let n = 15;
            let x = Matrix::from_vec(n, 2, (0..2 * n).map(|_| rng.random::<f64>()).collect());
            let y: Vec<f64> = (0..n)
                .map(|i| (3.0 * x[(i, 0)]).cos() + x[(i, 1)] * trial as f64)
                .collect();
            let obj = LmlObjective::new(&x, y, 1e-10, 1e-4);
            let lo = vec![(1e-3f64).ln(), (1e-2f64).ln(), (1e-2f64).ln()];
            let hi = vec![(1e3f64).ln(), (1e2f64).ln(), (1e2f64).ln()];
            for _ in 0..5 {
                let start = random_start(&lo, &hi, &mut rng);
                let Some((f0, _, _)) = obj.value_and_grad(&start) else {
                    continue;
                };
                let (f1, theta, _) = obj.maximize(start, &lo, &hi, 50).unwrap();
                assert!(f1 >= f0);
                for ((t, a), b) in theta.iter().zip(&lo).zip(&hi) {
                    assert!(t >= a && t <= b);
                }
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let xs: Vec<f32> = (0..8).map(|i| i as f32 * 0.5).collect();
        let ys: Vec<f32> = xs.iter().map(|x| x.cos()).collect();
        let x = Matrix::from_vec(8, 1, xs.clone());
        let m = GprModel::fit(&x, &ys, &HyperBounds::from_inputs(&x), &FitOptions::default()).unwrap();
        let (mu, var) = m.predict(&[1.0f32]).unwrap();
        assert!((mu - ys[2]).abs() < 1e-2);
        assert!(var >= 0.0);
    }
}
