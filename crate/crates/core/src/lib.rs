//! Reduction and unfolding of differential operators along the
//! Kustaanheimo-Stiefel fibration `R^4\{0} -> R^3\{0}`, with the
//! hydrogen-oscillator correspondence as the worked application.
//!
//! - [`opalgebra`]: exact coefficient ring and differential operators.
//! - [`ksfib`]: the fibration, function transport and operator projection.
//! - [`hydrogen`]: model Hamiltonians, eigenproblem reparametrization, spectrum.
//! - [`spectral`]: exact matrices on Gaussian-monomial bases.
//! - [`symmetry`]: the so(4) generators and their projections.
//! - [`cli`]: operator literal syntax and the `ksreduce` command frontend.

pub mod cli;
pub mod error;
pub mod hydrogen;
pub mod ksfib;
pub mod linalg;
pub mod opalgebra;
pub mod spectral;
pub mod symmetry;

pub use error::{Error, Result};
pub use opalgebra::{Chart, Coeff, DiffOp, MultiIndex, Param, VectorField, Q};
