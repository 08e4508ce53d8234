//! Infill criteria: expected improvement, the infeasibility penalty, and the
//! reduced-space search cube.

use crate::doe::BoxDomain;
use crate::error::{dim_check, Result};
use crate::gpr::GprModel;
use crate::linalg::{norm, Matrix};
use crate::pca::PcaMap;
use crate::scalar::Scalar;

/// Closed-form `E[max(0, best − Y)]` for `Y ~ N(mean, stddev²)`.
pub fn expected_improvement<T: Scalar>(mean: T, stddev: T, best: T) -> T {
    let diff = best - mean;
    if !(stddev > T::zero()) {
        return diff.max(T::zero());
    }
    let u = diff / stddev;
    (diff * u.norm_cdf() + stddev * u.norm_pdf()).max(T::zero())
}

/// Euclidean distance from `x` to the box; zero inside.
pub fn boundary_distance<T: Scalar>(x: &[T], domain: &BoxDomain<T>) -> T {
    x.iter()
        .zip(domain.lower().iter().zip(domain.upper()))
        .fold(T::zero(), |acc, (&v, (&l, &u))| {
            let excess = if v < l {
                l - v
            } else if v > u {
                v - u
            } else {
                T::zero()
            };
            acc + excess * excess
        })
        .sqrt()
}

/// Expected improvement of `model` at `x` against incumbent `best`.
pub fn model_ei<T: Scalar>(model: &GprModel<T>, x: &[T], best: T) -> Result<T> {
    let (mean, var) = model.predict(x)?;
    Ok(expected_improvement(mean, var.sqrt(), best))
}

/// Penalized EI of reduced-space point `z`: the EI when `L(z)` lies in the
/// domain, otherwise minus its distance to the domain.
pub fn penalized_ei<T: Scalar>(
    z: &[T],
    model: &GprModel<T>,
    map: &PcaMap<T>,
    domain: &BoxDomain<T>,
    best: T,
) -> Result<T> {
    dim_check("reduced point", map.reduced_dim(), z.len())?;
    dim_check("model input", map.reduced_dim(), model.dim())?;
    dim_check("domain", map.input_dim(), domain.dim())?;
    Ok(penalized_ei_unchecked(z, model, map, domain, best))
}

pub(crate) fn penalized_ei_unchecked<T: Scalar>(
    z: &[T],
    model: &GprModel<T>,
    map: &PcaMap<T>,
    domain: &BoxDomain<T>,
    best: T,
) -> T {
    let x = map.inverse_map_unchecked(z);
    if domain.contains(&x) {
        let (mean, var) = model.predict_unchecked(z);
        expected_improvement(mean, var.sqrt(), best)
    } else {
        -boundary_distance(&x, domain)
    }
}

/// Axis-aligned cube `[cᵢ − ρ, cᵢ + ρ]` in the reduced space.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingCube<T> {
    center: Vec<T>,
    radius: T,
}

impl<T: Scalar> BoundingCube<T> {
    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn to_box(&self) -> Result<BoxDomain<T>> {
        BoxDomain::new(
            self.center.iter().map(|&c| c - self.radius).collect(),
            self.center.iter().map(|&c| c + self.radius).collect(),
        )
    }

    pub fn contains(&self, z: &[T]) -> bool {
        z.len() == self.dim() && z.iter().zip(&self.center).all(|(&v, &c)| (v - c).abs() <= self.radius)
    }
}

/// Cube centered at the image of the domain midpoint with the domain's
/// half-diagonal as radius. Contains the image of every domain point.
pub fn bounding_cube<T: Scalar>(map: &PcaMap<T>, domain: &BoxDomain<T>) -> Result<BoundingCube<T>> {
    dim_check("domain", map.input_dim(), domain.dim())?;
    let center = map.forward_point(&domain.midpoint())?;
    let radius = T::lit(0.5) * norm(&domain.widths());
    Ok(BoundingCube { center, radius })
}

/// Forward images of the domain corners: all `2^D` when `D ≤ 12`, else
/// `samples` random ones.
pub fn corner_images<T: Scalar, R: rand::Rng>(
    map: &PcaMap<T>,
    domain: &BoxDomain<T>,
    samples: usize,
    rng: &mut R,
) -> Result<Matrix<T>> {
    let d = domain.dim();
    let corner = |bits: u64| -> Vec<T> {
        (0..d)
            .map(|j| {
                if bits >> j & 1 == 1 {
                    domain.upper()[j]
                } else {
                    domain.lower()[j]
                }
            })
            .collect()
    };
    let mut out = Matrix::zeros(0, map.reduced_dim());
    if d <= 12 {
        for bits in 0..(1u64 << d) {
            out.push_row(&map.forward_point(&corner(bits))?);
        }
    } else {
        for _ in 0..samples {
            let bits: u64 = rng.random();
            out.push_row(&map.forward_point(&corner(bits))?);
        }
    }
    Ok(out)
}
