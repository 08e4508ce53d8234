//! Objective-weighted PCA: rank-based weights, weighted covariance
//! eigendecomposition, component selection and the affine maps between the
//! search space and the reduced space.

use crate::error::{dim_check, Error, Result};
use crate::linalg::{dot, symmetric_eigen, Matrix};
use crate::scalar::Scalar;

/// Normalized rank-based weights, one per data point.
#[derive(Debug, Clone, PartialEq)]
pub struct RankWeights<T> {
    weights: Vec<T>,
    ranks: Vec<usize>,
}

impl<T: Scalar> RankWeights<T> {
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// 1-based ranks; rank 1 is the smallest target.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

/// Weights `w̃ᵢ = ln n − ln rᵢ`, normalized to sum to one.
///
/// Ties are ranked by order of first occurrence.
pub fn rank_weights<T: Scalar>(targets: &[T]) -> Result<RankWeights<T>> {
    let n = targets.len();
    if n < 2 {
        return Err(Error::Argument("rank weights need at least two targets".into()));
    }
    if targets.iter().any(|t| t.is_nan()) {
        return Err(Error::Argument("targets contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps first-occurrence order among ties
    order.sort_by(|&a, &b| targets[a].partial_cmp(&targets[b]).expect("no NaN"));
    let mut ranks = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    let ln_n = T::lit(n as f64).ln();
    let pre: Vec<T> = ranks.iter().map(|&r| ln_n - T::lit(r as f64).ln()).collect();
    let total: T = pre.iter().copied().sum();
    let weights = pre.into_iter().map(|w| w / total).collect();
    Ok(RankWeights { weights, ranks })
}

/// Smallest `r` whose leading eigenvalues hold at least `alpha` of the total.
///
/// `eigenvalues` must be sorted non-increasing.
pub fn select_rank<T: Scalar>(eigenvalues: &[T], alpha: T) -> usize {
    let total: T = eigenvalues.iter().copied().sum();
    let target = alpha * total;
    // absorbs round-off when alpha·total lands a few ulps above a partial sum
    let slack = T::lit(64.0) * T::epsilon() * total.abs();
    let mut cum = T::zero();
    for (k, &v) in eigenvalues.iter().enumerate() {
        cum += v;
        if cum + slack >= target {
            return k + 1;
        }
    }
    eigenvalues.len()
}

/// Fitted linear map `x ↦ P_r (x − μ − μ′)` and its inverse
/// `z ↦ P_rᵀ z + μ′ + μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaMap<T> {
    mu: Vec<T>,
    mu_prime: Vec<T>,
    components: Matrix<T>,
    eigenvalues: Vec<T>,
    all_eigenvalues: Vec<T>,
    total_variance: T,
    alpha: T,
}

impl<T: Scalar> PcaMap<T> {
    /// Builds a map from explicit parts. `components` rows must be
    /// orthonormal.
    pub fn from_parts(mu: Vec<T>, mu_prime: Vec<T>, components: Matrix<T>, alpha: T) -> Result<Self> {
        dim_check("mu'", mu.len(), mu_prime.len())?;
        dim_check("components", mu.len(), components.ncols())?;
        if components.nrows() == 0 {
            return Err(Error::Argument("map needs at least one component".into()));
        }
        let r = components.nrows();
        Ok(Self {
            mu,
            mu_prime,
            components,
            eigenvalues: vec![T::one(); r],
            all_eigenvalues: vec![T::one(); r],
            total_variance: T::lit(r as f64),
            alpha,
        })
    }

    /// One-component map along the first coordinate axis, used when the
    /// weighted data has no variance.
    pub fn axis_fallback(mu: Vec<T>) -> Self {
        let d = mu.len();
        let mut components = Matrix::zeros(1, d);
        components[(0, 0)] = T::one();
        Self {
            mu_prime: vec![T::zero(); d],
            mu,
            components,
            eigenvalues: vec![T::zero()],
            all_eigenvalues: vec![T::zero(); d],
            total_variance: T::zero(),
            alpha: T::one(),
        }
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn mu_prime(&self) -> &[T] {
        &self.mu_prime
    }

    /// `r × D` matrix with orthonormal rows.
    pub fn components(&self) -> &Matrix<T> {
        &self.components
    }

    /// Kept eigenvalues, non-increasing.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Full spectrum, non-increasing.
    pub fn all_eigenvalues(&self) -> &[T] {
        &self.all_eigenvalues
    }

    pub fn total_variance(&self) -> T {
        self.total_variance
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Dimension of the search space.
    pub fn input_dim(&self) -> usize {
        self.mu.len()
    }

    /// Number of kept components `r`.
    pub fn reduced_dim(&self) -> usize {
        self.components.nrows()
    }

    /// Maps each row of `x` to the reduced space.
    pub fn forward_map(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        dim_check("forward map input", self.input_dim(), x.ncols())?;
        let mut out = Matrix::zeros(x.nrows(), self.reduced_dim());
        for (i, row) in x.rows_iter().enumerate() {
            let z = self.forward_point_unchecked(row);
            out.row_mut(i).copy_from_slice(&z);
        }
        Ok(out)
    }

    pub fn forward_point(&self, x: &[T]) -> Result<Vec<T>> {
        dim_check("forward map input", self.input_dim(), x.len())?;
        Ok(self.forward_point_unchecked(x))
    }

    fn forward_point_unchecked(&self, x: &[T]) -> Vec<T> {
        let shifted: Vec<T> = x
            .iter()
            .zip(self.mu.iter().zip(&self.mu_prime))
            .map(|(&v, (&m, &mp))| v - m - mp)
            .collect();
        self.components.mul_vec(&shifted)
    }

    /// `L(z) = P_rᵀ z + μ′ + μ`.
    pub fn inverse_map(&self, z: &[T]) -> Result<Vec<T>> {
        dim_check("inverse map input", self.reduced_dim(), z.len())?;
        Ok(self.inverse_map_unchecked(z))
    }

    pub(crate) fn inverse_map_unchecked(&self, z: &[T]) -> Vec<T> {
        let mut x = self.components.tr_mul_vec(z);
        for (v, (&m, &mp)) in x.iter_mut().zip(self.mu.iter().zip(&self.mu_prime)) {
            *v += mp + m;
        }
        x
    }
}

/// Fits the weighted PCA map on design `x` (one point per row) with
/// objective values `targets`, keeping `alpha` of the weighted variance.
pub fn fit_pca<T: Scalar>(x: &Matrix<T>, targets: &[T], alpha: T) -> Result<PcaMap<T>> {
    dim_check("targets", x.nrows(), targets.len())?;
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::Argument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let n = x.nrows();
    let d = x.ncols();
    let w = rank_weights(targets)?;
    let nf = T::lit(n as f64);

    let mu: Vec<T> = (0..d).map(|j| x.rows_iter().map(|r| r[j]).sum::<T>() / nf).collect();
    // X′ = W X̄, each centered row scaled by its weight
    let mut weighted = Matrix::zeros(n, d);
    for (i, (row, &wi)) in x.rows_iter().zip(w.weights()).enumerate() {
        for (o, (&v, &m)) in weighted.row_mut(i).iter_mut().zip(row.iter().zip(&mu)) {
            *o = (v - m) * wi;
        }
    }
    let mu_prime: Vec<T> = (0..d)
        .map(|j| weighted.rows_iter().map(|r| r[j]).sum::<T>() / nf)
        .collect();

    let mut cov = Matrix::zeros(d, d);
    for row in weighted.rows_iter() {
        let c: Vec<T> = row.iter().zip(&mu_prime).map(|(&v, &m)| v - m).collect();
        for a in 0..d {
            for b in 0..=a {
                cov[(a, b)] += c[a] * c[b];
            }
        }
    }
    let denom = T::lit((n - 1) as f64);
    for a in 0..d {
        for b in 0..=a {
            let v: T = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }

    let (values, vectors): (Vec<T>, Matrix<T>) = symmetric_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    let clamp = T::lit(1e-10);
    let sorted: Vec<T> = order
        .iter()
        .map(|&k| {
            let v = values[k];
            if v < T::zero() && v >= -clamp {
                T::zero()
            } else {
                v
            }
        })
        .collect();
    let total: T = sorted.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::DegenerateData("weighted data has zero total variance".into()));
    }
    let r = select_rank(&sorted, alpha);

    let mut components = Matrix::zeros(r, d);
    for (row, &k) in order.iter().take(r).enumerate() {
        let mut v = vectors.column(k);
        let lead = v
            .iter()
            .copied()
            .fold(T::zero(), |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.row_mut(row).copy_from_slice(&v);
    }

    Ok(PcaMap {
        mu,
        mu_prime,
        components,
        eigenvalues: sorted[..r].to_vec(),
        all_eigenvalues: sorted,
        total_variance: total,
        alpha,
    })
}

/// Gram matrix `P_r P_rᵀ` of the kept components.
pub fn component_gram<T: Scalar>(map: &PcaMap<T>) -> Matrix<T> {
    let p = map.components();
    let r = p.nrows();
    let mut g = Matrix::zeros(r, r);
    for a in 0..r {
        for b in 0..r {
            g[(a, b)] = dot(p.row(a), p.row(b));
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_hand_values() {
        let w = rank_weights(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(w.ranks(), &[3, 1, 2]);
        let l3 = 3f64.ln();
        let pre = [0.0, l3, l3 - 2f64.ln()];
        let s: f64 = pre.iter().sum();
        for (a, b) in w.weights().iter().zip(pre.iter().map(|p| p / s)) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((w.weights()[1] - 0.7304).abs() < 1e-4);
        assert!((w.weights()[2] - 0.2696).abs() < 1e-4);

        let w2 = rank_weights(&[5.0, 7.0]).unwrap();
        assert_eq!(w2.weights(), &[1.0, 0.0]);
        assert!(rank_weights(&[1.0]).is_err());
    }

    #[test]
    fn ties_rank_by_first_occurrence() {
        let w = rank_weights(&[2.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(w.ranks(), &[3, 1, 4, 2]);
    }

    #[test]
    fn appending_a_new_best_discounts_everyone() {
        let ys = vec![4.0, 1.5, 3.0, 2.2, 9.0];
        let before = rank_weights(&ys).unwrap();
        let mut more = ys.clone();
        more.push(0.1);
        let after = rank_weights(&more).unwrap();
        for i in 0..ys.len() {
            if before.weights()[i] > 0.0 {
                assert!(after.weights()[i] < before.weights()[i]);
            }
        }
    }

    #[test]
    fn rank_selection_arithmetic() {
        assert_eq!(select_rank(&[9.0, 0.5, 0.5], 0.95), 2);
        assert_eq!(select_rank(&[9.0, 0.5, 0.5], 0.9), 1);
        assert_eq!(select_rank(&[9.0, 0.5, 0.5], 1.0), 3);
        assert_eq!(select_rank(&[1.0, 1.0, 1.0, 1.0], 0.5), 2);
    }

    #[test]
    fn line_data_gives_diagonal_component() {
        let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 * 0.3 - 1.0, i as f64 * 0.3 - 1.0]).collect();
        let x = Matrix::from_rows(&pts).unwrap();
        // one point far better than all others
        let ys = [5.0, 4.0, 3.0, 2.0, 1.0, -100.0];
        let map = fit_pca(&x, &ys, 0.95).unwrap();
        assert_eq!(map.reduced_dim(), 1);
        let c = map.components().row(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c[0] - s).abs() < 1e-10 && (c[1] - s).abs() < 1e-10);
    }

    #[test]
    fn full_retention_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, d) = (20, 4);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect());
        let ys: Vec<f64> = x.rows_iter().map(|r| r.iter().map(|v| v * v).sum()).collect();
        let map = fit_pca(&x, &ys, 1.0).unwrap();
        assert_eq!(map.reduced_dim(), d);
        let z = map.forward_map(&x).unwrap();
        for (i, zr) in z.rows_iter().enumerate() {
            let back = map.inverse_map(zr).unwrap();
            for (a, b) in back.iter().zip(x.row(i)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let origin = map.inverse_map(&vec![0.0; d]).unwrap();
        for j in 0..d {
            assert!((origin[j] - map.mu()[j] - map.mu_prime()[j]).abs() < 1e-15);
        }
        let center: Vec<f64> = (0..d).map(|j| map.mu()[j] + map.mu_prime()[j]).collect();
        assert!(map.forward_point(&center).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn identity_map_passes_coordinates() {
        let mut p = Matrix::zeros(2, 3);
        p[(0, 0)] = 1.0;
        p[(1, 1)] = 1.0;
        let map = PcaMap::from_parts(vec![0.0; 3], vec![0.0; 3], p, 0.9).unwrap();
        let x = Matrix::from_rows(&[[0.3, -1.2, 4.0]]).unwrap();
        assert_eq!(map.forward_map(&x).unwrap().row(0), &[0.3, -1.2]);
        assert!(map.forward_point(&[1.0]).is_err());
        assert!(map.inverse_map(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn degenerate_data_is_reported() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(
            fit_pca(&x, &[1.0, 2.0, 3.0], 0.95),
            Err(Error::DegenerateData(_))
        ));
        assert!(fit_pca(&x, &[1.0, 2.0, 3.0], 0.0).is_err());
        assert!(fit_pca(&x, &[1.0, 2.0], 0.5).is_err());
    }

    #[test]
    fn sign_convention_largest_entry_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Matrix::from_vec(15, 3, (0..45).map(|_| rng.random::<f64>()).collect());
        let ys: Vec<f64> = (0..15).map(|_| rng.random()).collect();
        let map = fit_pca(&x, &ys, 1.0).unwrap();
        for row in map.components().rows_iter() {
            let lead = row
                .iter()
                .copied()
                .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(lead > 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn weights_normalized_and_monotone(ys in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
            let w = rank_weights(&ys).unwrap();
            let s: f64 = w.weights().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            for i in 0..ys.len() {
                for j in 0..ys.len() {
                    if w.ranks()[i] < w.ranks()[j] {
                        prop_assert!(w.weights()[i] >= w.weights()[j]);
                    }
                }
                if w.ranks()[i] == ys.len() {
                    prop_assert_eq!(w.weights()[i], 0.0);
                }
            }
        }

        #[test]
        fn forward_inverse_identity(seed in any::<u64>(), d in 2usize..7, alpha in 0.3f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3 * d;
            let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect());
            let ys: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let map = fit_pca(&x, &ys, alpha).unwrap();
            let g = component_gram(&map);
            for a in 0..map.reduced_dim() {
                for b in 0..map.reduced_dim() {
                    let e = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((g[(a, b)] - e).abs() < 1e-10);
                }
            }
            let z: Vec<f64> = (0..map.reduced_dim()).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let back = map.forward_point(&map.inverse_map(&z).unwrap()).unwrap();
            for (a, b) in back.iter().zip(&z) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
