//! H²-conforming Galerkin discretisation of the weak-BC energy on uniform
//! meshes: quintic Hermite elements in 1D and Bogner–Fox–Schmit bicubics in 2D.

pub mod assembly;
pub mod element;
pub mod grid;
pub mod space;
pub mod sparse;

pub use assembly::{assemble, assemble_generalised, AssemblyOptions, FemSystem, GramMatrices, PenaltyMode};
pub use element::ElementKind;
pub use grid::FieldGrid;
pub use space::{build_space, FemFunction, FemSpace};
pub use sparse::{solve, CsrMatrix, Solution};

use serde::{Deserialize, Serialize};

use crate::energy::seminorm_terms;
use crate::field::{ClosedFormField, Combination, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub v_norm: f64,
    pub v_norm_rescaled: f64,
    pub l2: f64,
    pub h1: f64,
}

/// Errors of the discrete function with coefficients `x` against `reference`,
/// by mesh-aligned quadrature of `order` points per axis.
pub fn error_norms(
    space: &FemSpace,
    x: &[C64],
    reference: &dyn ClosedFormField,
    k: f64,
    order: usize,
) -> ErrorNorms {
    let uh = space.function(x);
    let diff = Combination::difference(reference, &uh);
    norms_of(space, &diff, k, order)
}

/// Norms of an arbitrary field using the space's quadrature.
pub fn norms_of(space: &FemSpace, u: &dyn ClosedFormField, k: f64, order: usize) -> ErrorNorms {
    let q = space.quadratures(order);
    let t = seminorm_terms(u, k, &q);
    let l = space.domain().diameter();
    let l2 = if k > 0.0 { (t.mass / (k * k)).sqrt() } else { 0.0 };
    ErrorNorms {
        v_norm: t.v_norm_sqr().sqrt(),
        v_norm_rescaled: t.v_norm_sqr_rescaled(l).sqrt(),
        l2,
        h1: (l2 * l2 + t.grad).sqrt(),
    }
}
