//! Numerical toolkit for kinetic Fokker-Planck equations with rough
//! coefficients: Galilean geometry, symbol classes, a space-time grid, a
//! vanishing-viscosity solver, a variational solver and estimate checks.

pub mod error;
pub mod kolgeom;
pub mod mesh;
pub mod symbol;
pub mod variational;
pub mod verify;
pub mod viscous;

pub use error::{KfpError, Result};
