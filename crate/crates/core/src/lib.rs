//! V-line and star transforms of symmetric 2-tensor fields on a pixel grid,
//! their inversions, and the numerical machinery behind them: ray tracing,
//! finite differences, second-order PDE solvers, and the Radon transform
//! with filtered backprojection.

pub mod calculus;
pub mod error;
pub mod fields;
pub mod harness;
pub mod inversion;
pub mod pdesolve;
pub mod phantoms;
pub mod radon;
pub mod raytrace;
pub mod vlt;

pub use crate::error::{Result, VltError};
pub use crate::fields::{
    Direction, Grid, ScalarField, StarBranch, StarGeometry, SymTensorField, VLineGeometry, VectorField,
};
pub use crate::harness::{ExperimentConfig, Method, RunManifest};
pub use crate::inversion::InversionOptions;
pub use crate::pdesolve::{PdeKind, SecondOrderProblem, SolverOptions};
pub use crate::phantoms::PhantomId;
pub use crate::radon::Sinogram;
pub use crate::vlt::{Moment, StarData, TransformKind};
