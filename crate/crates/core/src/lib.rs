//! Exact lattice computations and numerical continuum estimators for
//! configurational SLE measures.

pub mod error;
pub mod lattice;
pub mod lerw;
pub mod linalg;
pub mod loewner;
pub mod loops;
pub mod saw;
pub mod partition;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GreenMatrix64 = lattice::GreenMatrix<f64>;
pub type GreenMatrix32 = lattice::GreenMatrix<f32>;
pub type HittingMatrix64 = lattice::HittingMatrix<f64>;
pub type HittingMatrix32 = lattice::HittingMatrix<f32>;
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
pub type ExcursionSampler64 = lerw::ExcursionSampler<f64>;
pub type ExcursionSampler32 = lerw::ExcursionSampler<f32>;
pub type ParamBundle64 = partition::ParamBundle<f64>;
pub type ParamBundle32 = partition::ParamBundle<f32>;
pub type DrivingState64 = loewner::DrivingState<f64>;
pub type DrivingState32 = loewner::DrivingState<f32>;
pub type TracePolyline64 = loewner::TracePolyline<f64>;
pub type TracePolyline32 = loewner::TracePolyline<f32>;
pub type ExcursionPath2D64 = loewner::ExcursionPath2D<f64>;
pub type ExcursionPath2D32 = loewner::ExcursionPath2D<f32>;
