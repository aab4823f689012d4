//! Coercive regularised variational principles for the Helmholtz equation
//! with impedance boundary conditions.
//!
//! * [`geometry`]: boxes, star-shape constants and quadrature.
//! * [`identities`]: Rellich and low-order Morawetz integral identities.
//! * [`energy`]: energies, sesquilinear forms, coercivity constants, norms.
//! * [`fem`]: H²-conforming Galerkin discretisation of the weak-BC energy.
//! * [`planewave`]: plane-wave neural network trained on a Monte-Carlo energy.
//! * [`oracle`]: analytic and brute-force reference solutions.
//! * [`cli`]: the `hvp` command-line front end.

pub mod error;
pub mod field;
pub mod geometry;
pub mod energy;
pub mod fem;
pub mod identities;
pub mod oracle;
pub mod planewave;
pub mod study;
pub mod cli;

pub use error::{Error, Result};
pub use field::{ClosedFormField, Jet, Point, C64};
pub use geometry::{Domain, QuadSpec, Quadratures};
