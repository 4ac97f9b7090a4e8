//! Vector Laplacians, deformation viscosity and incompressible flow on the
//! flat torus, the round sphere and the hyperbolic plane.
//!
//! Everything is generic over a [`Scalar`]; the `*64` aliases below fix `f64`.

pub mod checks;
pub mod error;
pub mod field;
pub mod format;
pub mod geometry;
pub mod library;
pub mod operators;
pub mod restriction;
pub mod scalar;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use field::{OneFormField, ScalarField, SymTensorField, TensorField, TwoFormField};
pub use geometry::{ManifoldKind, ManifoldSpec};
pub use operators::{Chart, FieldRef, Region};
pub use restriction::{CartesianField, Polynomial, SphericalVectorField};
pub use scalar::Scalar;

pub type Chart64 = Chart<f64>;
pub type Spec64 = ManifoldSpec<f64>;
pub type OneForm64 = OneFormField<f64>;
pub type Scalar64 = ScalarField<f64>;
pub type SphericalField64 = SphericalVectorField<f64>;
pub type Config64 = solver::SolverConfig<f64>;
pub type Solver64 = solver::Solver<f64>;
