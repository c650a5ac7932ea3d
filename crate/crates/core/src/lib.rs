//! Contravariant connections of a pseudo-Riemannian metric paired with a
//! bivector field.

pub mod chart;
pub mod connections;
pub mod curvature;
pub mod dual;
pub mod error;
pub mod expr;
pub mod field;
pub mod killing;
pub mod lie;
pub mod linalg;
pub mod poisson;
pub mod report;
pub mod scalar;
pub mod scene;
pub mod scenes;
pub mod transport;

pub use chart::{Chart, Interval, Point};
pub use dual::Dual;
pub use error::{Error, EvalError, ParseError, Result};
pub use field::{
    BivectorField, ConstField, CovectorField, DiffStrategy, Field, MetricField, ScalarField,
    VectorField,
};
pub use lie::{Classification, InvariantForm, LieAlgebra};
pub use poisson::{Basis, Geometry};
pub use report::{Check, ResidualReport};
pub use scalar::Scalar;

/// First-order forward-mode scalar.
pub type Dual64 = Dual<f64>;
/// Second-order (hyper-dual) forward-mode scalar.
pub type HyperDual64 = Dual<Dual<f64>>;
/// Lie algebra with exact rational structure constants.
pub type RationalLieAlgebra = LieAlgebra<lie::Rational>;
/// Invariant form with exact rational entries.
pub type RationalForm = InvariantForm<lie::Rational>;
/// Lie algebra with floating-point structure constants.
pub type LieAlgebra64 = LieAlgebra<f64>;
