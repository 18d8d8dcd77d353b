//! Minimax analysis of dictionary learning at desk scale.
//!
//! The crate covers three layers of the problem of estimating an unknown
//! unit-column dictionary `D` from noisy sparse combinations `y = D x + n`:
//!
//! - **Bounds** ([`bounds`]): closed-form minimax lower bounds on the worst
//!   case MSE of any learning scheme, an MSE upper bound achieved by a
//!   concrete thresholding scheme, the single-atom constrained Cramer-Rao
//!   matrix, and exact inversion of the lower bounds for required sample
//!   size.
//! - **Constructions** ([`packing`], [`geometry`], [`infotheory`]): the
//!   proof objects behind the lower bounds made executable - random binary
//!   packing codes, well-separated dictionary ensembles with numerical
//!   certificates, conditional mutual-information budgets, the Fano floor
//!   and the minimum-distance detector.
//! - **Experiments** ([`model`], [`learners`]): a seeded generative model,
//!   the thresholding scheme and an oracle least-squares baseline, and
//!   Monte Carlo harnesses for MSE and detection-error probability whose
//!   results are reproducible bit for bit from a master seed.
//!
//! All numerics are generic over the scalar type through [`Real`]
//! (`f32`/`f64`); the `*64` aliases below pin the default double-precision
//! instantiation used by the CLI and the file formats.

pub mod bounds;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod infotheory;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod model;
pub mod packing;
pub mod real;
pub mod rng;

pub use error::{Error, Result};
pub use real::{real, Real};

/// Double-precision dictionary.
pub type Dictionary64 = model::DictionaryMatrix<f64>;
/// Single-precision dictionary.
pub type Dictionary32 = model::DictionaryMatrix<f32>;
/// Double-precision coefficient model.
pub type CoefficientModel64 = model::CoefficientModel<f64>;
/// Double-precision noise model.
pub type NoiseModel64 = model::NoiseModel<f64>;
/// Double-precision observation batch.
pub type Batch64 = model::ObservationBatch<f64>;
/// Double-precision ensemble.
pub type Ensemble64 = packing::DictionaryEnsemble<f64>;
/// Double-precision bound report.
pub type BoundReport64 = bounds::BoundReport<f64>;
/// Double-precision mutual-information budget.
pub type MiBudget64 = infotheory::MiBudget<f64>;
