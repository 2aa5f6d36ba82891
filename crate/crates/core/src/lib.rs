//! Rescaled three-dimensional elasticity on a beam-plate junction, its
//! asymptotic limit models, the source/displacement scalings and the
//! corrector extraction operators.

pub mod correctors;
pub mod element;
pub mod error;
pub mod expr;
pub mod limit;
pub mod mesh;
pub mod quadrature;
pub mod scaling;
pub mod solver3d;
pub mod sparse;
pub mod study;
pub mod tensor;

pub use error::{Error, Result};
pub use mesh::{CrossSection, Grading, MultidomainMesh};
pub use scaling::{Regime, ScalingParams};
pub use tensor::{SymMatrix3, Tensor4};
