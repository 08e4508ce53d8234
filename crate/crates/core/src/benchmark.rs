//! Shifted and rotated multimodal test problems on `[-5, 5]^D`.
//!
//! The first five are multimodal with adequate global structure, the last
//! two have weak global structure.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::doe::BoxDomain;
use crate::error::{dim_check, Error, Result};
use crate::linalg::{orthonormalize_columns, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalStructure {
    Adequate,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Sphere,
    Ellipsoid,
    Rastrigin,
    Schaffers,
    GriewankRosenbrock,
    Schwefel,
    Gallagher,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Sphere,
        ProblemKind::Ellipsoid,
        ProblemKind::Rastrigin,
        ProblemKind::Schaffers,
        ProblemKind::GriewankRosenbrock,
        ProblemKind::Schwefel,
        ProblemKind::Gallagher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Sphere => "sphere",
            ProblemKind::Ellipsoid => "ellipsoid",
            ProblemKind::Rastrigin => "rastrigin",
            ProblemKind::Schaffers => "schaffers",
            ProblemKind::GriewankRosenbrock => "griewank-rosenbrock",
            ProblemKind::Schwefel => "schwefel",
            ProblemKind::Gallagher => "gallagher",
        }
    }

    pub fn structure(self) -> GlobalStructure {
        match self {
            ProblemKind::Schwefel | ProblemKind::Gallagher => GlobalStructure::Weak,
            _ => GlobalStructure::Adequate,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ProblemKind::Sphere => "squared norm",
            ProblemKind::Ellipsoid => "axis-scaled quadratic, condition number 1e3",
            ProblemKind::Rastrigin => "cosine-modulated sphere with a regular grid of local optima",
            ProblemKind::Schaffers => "Schaffer F7 on consecutive coordinate pairs",
            ProblemKind::GriewankRosenbrock => "Griewank composed with Rosenbrock",
            ProblemKind::Schwefel => "Schwefel sine function with deceptive distant basins",
            ProblemKind::Gallagher => "21 Gaussian peaks with random conditioning",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown problem '{s}'")))
    }
}

const GALLAGHER_PEAKS: usize = 21;
// maximizer of u·sin(√|u|) on [-500, 500]
const SCHWEFEL_ARGMAX: f64 = 420.968_746_359_982;
const SCHWEFEL_SCALE: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
struct Peak<T> {
    center: Vec<T>,
    /// Diagonal of the quadratic form, already permuted.
    scales: Vec<T>,
    height: T,
}

/// One instance of a test problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TestProblem<T> {
    kind: ProblemKind,
    dimension: usize,
    instance_seed: u64,
    domain: BoxDomain<T>,
    shift: Vec<T>,
    rotation: Matrix<T>,
    f_opt: T,
    peaks: Vec<Peak<T>>,
}

/// Looks `name` up in the registry and instantiates it.
pub fn make_problem<T: Scalar>(name: &str, dimension: usize, instance_seed: u64) -> Result<TestProblem<T>> {
    let kind: ProblemKind = name.parse()?;
    TestProblem::new(kind, dimension, instance_seed)
}

fn instance_stream(kind: ProblemKind, dimension: usize, seed: u64) -> ChaCha8Rng {
    // FNV-1a over the name keeps streams of different problems apart
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in kind.name().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(h ^ seed.rotate_left(17) ^ (dimension as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(seed);
    rng
}

fn random_rotation<T: Scalar, R: Rng>(d: usize, rng: &mut R) -> Matrix<T> {
    loop {
        let g = Matrix::from_vec(d, d, (0..d * d).map(|_| T::lit(rng.sample(StandardNormal))).collect());
        if let Some(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

impl<T: Scalar> TestProblem<T> {
    pub fn new(kind: ProblemKind, dimension: usize, instance_seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        let mut rng = instance_stream(kind, dimension, instance_seed);
        let shift: Vec<T> = (0..dimension).map(|_| T::lit(rng.random_range(-4.0..4.0))).collect();
        let rotation = random_rotation(dimension, &mut rng);
        let f_opt = T::lit((rng.random_range(-100.0f64..100.0) * 100.0).round() / 100.0);
        let peaks = if kind == ProblemKind::Gallagher {
            gallagher_peaks(dimension, &mut rng)
        } else {
            Vec::new()
        };
        Ok(Self {
            kind,
            dimension,
            instance_seed,
            domain: BoxDomain::cube(dimension, T::lit(-5.0), T::lit(5.0))?,
            shift,
            rotation,
            f_opt,
            peaks,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn instance_seed(&self) -> u64 {
        self.instance_seed
    }

    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    pub fn x_opt(&self) -> &[T] {
        &self.shift
    }

    pub fn f_opt(&self) -> T {
        self.f_opt
    }

    pub fn rotation(&self) -> &Matrix<T> {
        &self.rotation
    }

    /// `f(R(x − shift)) + f_opt`; `x` must lie in the domain.
    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        dim_check("problem input", self.dimension, x.len())?;
        if !self.domain.contains(x) {
            return Err(Error::Argument("point lies outside the problem domain".into()));
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// As [`evaluate`](Self::evaluate) without the domain check.
    pub fn evaluate_unchecked(&self, x: &[T]) -> T {
        let diff: Vec<T> = x.iter().zip(&self.shift).map(|(&a, &s)| a - s).collect();
        let y = self.rotation.mul_vec(&diff);
        self.base(&y) + self.f_opt
    }

    /// Base function at rotated, shifted coordinates; minimum 0 at the origin.
    fn base(&self, y: &[T]) -> T {
        let d = y.len();
        let df = T::lit(d as f64);
        match self.kind {
            ProblemKind::Sphere => y.iter().map(|&v| v * v).sum(),
            ProblemKind::Ellipsoid => {
                let denom = if d > 1 { (d - 1) as f64 } else { 1.0 };
                y.iter()
                    .enumerate()
                    .map(|(i, &v)| T::lit(10f64.powf(3.0 * i as f64 / denom)) * v * v)
                    .sum()
            }
            ProblemKind::Rastrigin => y
                .iter()
                .map(|&v| v * v + T::lit(10.0) * (T::one() - (T::TAU() * v).cos()))
                .sum(),
            ProblemKind::Schaffers => {
                let term = |s: T| {
                    let root = s.sqrt();
                    let sn = (T::lit(50.0) * s.powf(T::lit(0.2))).sin();
                    root + root * sn * sn
                };
                if d == 1 {
                    let t = term(y[0].abs());
                    return t * t;
                }
                let mean = y
                    .windows(2)
                    .map(|w| term((w[0] * w[0] + w[1] * w[1]).sqrt()))
                    .sum::<T>()
                    / T::lit((d - 1) as f64);
                mean * mean
            }
            ProblemKind::GriewankRosenbrock => {
                let c = T::one().max(df.sqrt() / T::lit(8.0));
                let z: Vec<T> = y.iter().map(|&v| c * v + T::one()).collect();
                let g = |s: T| s / T::lit(4000.0) - s.cos();
                if d == 1 {
                    let s = (z[0] - T::one()) * (z[0] - T::one());
                    return T::lit(10.0) * g(s) + T::lit(10.0);
                }
                let sum: T = z
                    .windows(2)
                    .map(|w| {
                        let a = w[0] * w[0] - w[1];
                        let b = w[0] - T::one();
                        g(T::lit(100.0) * a * a + b * b)
                    })
                    .sum();
                T::lit(10.0) / T::lit((d - 1) as f64) * sum + T::lit(10.0)
            }
            ProblemKind::Schwefel => {
                let u_star = T::lit(SCHWEFEL_ARGMAX);
                let peak = schwefel_term(u_star);
                y.iter()
                    .map(|&v| peak - schwefel_term(u_star + T::lit(SCHWEFEL_SCALE) * v))
                    .sum()
            }
            ProblemKind::Gallagher => {
                let best = self
                    .peaks
                    .iter()
                    .map(|p| {
                        let q: T = y
                            .iter()
                            .zip(&p.center)
                            .zip(&p.scales)
                            .map(|((&v, &c), &s)| s * (v - c) * (v - c))
                            .sum();
                        p.height * (-q / (T::lit(2.0) * df)).exp()
                    })
                    .fold(T::zero(), T::max);
                T::lit(10.0) - best
            }
        }
    }
}

/// `u·sin(√|u|)` inside `[-500, 500]`; outside, the boundary value minus a
/// quadratic penalty.
fn schwefel_term<T: Scalar>(u: T) -> T {
    let lim = T::lit(500.0);
    let c = u.max(-lim).min(lim);
    let over = u.abs() - lim;
    let penalty = if over > T::zero() {
        T::lit(1e-2) * over * over
    } else {
        T::zero()
    };
    c * c.abs().sqrt().sin() - penalty
}

fn gallagher_peaks<T: Scalar, R: Rng>(d: usize, rng: &mut R) -> Vec<Peak<T>> {
    let spectrum = |cond: f64| -> Vec<f64> {
        (0..d)
            .map(|j| {
                let e = if d > 1 { j as f64 / (d - 1) as f64 - 0.5 } else { 0.0 };
                cond.powf(e)
            })
            .collect()
    };
    let mut peaks = Vec::with_capacity(GALLAGHER_PEAKS);
    for i in 0..GALLAGHER_PEAKS {
        let (center, cond, height) = if i == 0 {
            (vec![0.0; d], 1000.0, 10.0)
        } else {
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
            let cond = 1000f64.powf(rng.random::<f64>());
            let h = 1.1 + 8.0 * (i - 1) as f64 / (GALLAGHER_PEAKS - 2) as f64;
            (c, cond, h)
        };
        let mut scales = spectrum(cond);
        // random axis assignment gives each peak its own orientation
        for k in (1..d).rev() {
            let j = rng.random_range(0..=k);
            scales.swap(k, j);
        }
        peaks.push(Peak {
            center: center.into_iter().map(T::lit).collect(),
            scales: scales.into_iter().map(T::lit).collect(),
            height: T::lit(height),
        });
    }
    peaks
}
