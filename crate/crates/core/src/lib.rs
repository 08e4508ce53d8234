//! Bayesian optimization with Gaussian process surrogates, including a
//! variant that searches a PCA subspace learned from rank-weighted
//! evaluations.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod acquisition;
pub mod benchmark;
pub mod de;
pub mod doe;
pub mod engine;
pub mod error;
pub mod gpr;
pub mod harness;
pub mod linalg;
pub mod pca;
pub mod scalar;

pub use acquisition::{boundary_distance, bounding_cube, expected_improvement, penalized_ei};
pub use benchmark::{make_problem, GlobalStructure, ProblemKind};
pub use de::{de_maximize, DeConfig, DeResult};
pub use doe::{lhs_sample, BoxDomain};
pub use engine::{run_bo, run_pcabo, run_random_search, Algorithm, IterationRecord, RunRecord};
pub use error::{Error, Result};
pub use gpr::{FitOptions, HyperBounds};
pub use linalg::Matrix;
pub use pca::{fit_pca, rank_weights};
pub use scalar::Scalar;

pub type Domain = doe::BoxDomain<f64>;
pub type DesignMatrix = linalg::Matrix<f64>;
pub type Kernel = gpr::Kernel<f64>;
pub type GprModel = gpr::GprModel<f64>;
pub type PcaMap = pca::PcaMap<f64>;
pub type RankWeights = pca::RankWeights<f64>;
pub type BoundingCube = acquisition::BoundingCube<f64>;
pub type Dataset = engine::Dataset<f64>;
pub type OptimizerConfig = engine::OptimizerConfig<f64>;
pub type RunOutput = engine::RunOutput<f64>;
pub type TestProblem = benchmark::TestProblem<f64>;
