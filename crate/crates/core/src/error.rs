use thiserror::Error;

use crate::lattice::LatticePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain has {size} interior points, above the dense-solve cap of {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("point {0} is not an interior point of the domain")]
    NotInterior(LatticePoint),

    #[error("point {0} is not a boundary point of the domain")]
    NotBoundary(LatticePoint),

    #[error("boundary points must be distinct, got {0} twice")]
    CoincidentPoints(LatticePoint),

    #[error("point {0} is not strictly above the real axis")]
    NotInUpperHalfPlane(LatticePoint),

    #[error("source and target tuples differ in length ({sources} vs {targets})")]
    ArityMismatch { sources: usize, targets: usize },

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("walk is not self-avoiding: {0} is visited twice")]
    NotSelfAvoiding(LatticePoint),

    #[error("{what} exceeded its budget of {limit}")]
    Budget { what: &'static str, limit: usize },

    #[error("no excursion connects {from} to {to} in the domain")]
    Unreachable { from: LatticePoint, to: LatticePoint },

    #[error("{what} = {value} is outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("ordering violated: {0}")]
    Ordering(String),

    #[error("matrix is singular")]
    Singular,

    #[error("{0}")]
    Convergence(String),

    #[error("step cap of {cap} exceeded after reaching {reached}")]
    StepCap { cap: usize, reached: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
