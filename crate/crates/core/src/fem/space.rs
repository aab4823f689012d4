//! Uniform structured meshes, global DOF numbering, discrete functions and
//! nodal interpolation.

use crate::error::{Error, Result};
use crate::fem::element::{shape_jets, ElementKind, ShapeJet};
use crate::field::{ClosedFormField, Jet, Point, C64};
use crate::geometry::{gauss_legendre_on, BoundaryQuadrature, Domain, InteriorQuadrature, Quadratures};

/// An H²-conforming space on a uniform mesh of an interval or rectangle.
#[derive(Clone, Debug)]
pub struct FemSpace {
    domain: Domain,
    kind: ElementKind,
    cells: [usize; 2],
    h: [f64; 2],
}

/// One boundary face of an element: the local reference coordinate held fixed
/// and the outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    pub element: usize,
    /// Axis normal to the face and whether it is the upper side.
    pub axis: usize,
    pub upper: bool,
}

impl BoundaryFace {
    pub fn normal(&self) -> Point {
        let mut n = [0.0; 3];
        n[self.axis] = if self.upper { 1.0 } else { -1.0 };
        n
    }

    /// Index into the four (two in 1D) face orientations.
    pub fn orientation(&self) -> usize {
        2 * self.axis + usize::from(self.upper)
    }
}

pub fn build_space(domain: &Domain, h: f64, kind: ElementKind) -> Result<FemSpace> {
    FemSpace::new(domain, h, kind)
}

impl FemSpace {
    pub fn new(domain: &Domain, h: f64, kind: ElementKind) -> Result<Self> {
        if domain.dim() != kind.dim() {
            return Err(Error::InvalidDomain(format!(
                "{kind:?} needs a {}-dimensional domain",
                kind.dim()
            )));
        }
        let mut cells = [1usize; 2];
        let mut hs = [1.0; 2];
        for a in 0..domain.dim() {
            let extent = domain.extent(a);
            let n = (extent / h).round();
            if !(h > 0.0) || n < 1.0 || (n * h - extent).abs() > 1e-9 * extent {
                return Err(Error::IncompatibleMesh { h, extent });
            }
            cells[a] = n as usize;
            hs[a] = extent / n;
        }
        Ok(Self {
            domain: domain.clone(),
            kind,
            cells,
            h: hs,
        })
    }

    /// Space with `n` cells per axis.
    pub fn with_cells(domain: &Domain, n: usize, kind: ElementKind) -> Result<Self> {
        let mut s = Self::new(domain, domain.extent(0) / n as f64, kind)?;
        if domain.dim() == 2 {
            s.cells[1] = n;
            s.h[1] = domain.extent(1) / n as f64;
        }
        Ok(s)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    /// Cell sizes per axis.
    pub fn h(&self) -> [f64; 2] {
        self.h
    }

    /// The mesh size used for the `λ/h` penalty.
    pub fn mesh_size(&self) -> f64 {
        self.h[..self.dim()].iter().cloned().fold(0.0, f64::max)
    }

    pub fn n_nodes(&self) -> usize {
        match self.dim() {
            1 => self.cells[0] + 1,
            _ => (self.cells[0] + 1) * (self.cells[1] + 1),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.kind.dofs_per_node()
    }

    pub fn n_elements(&self) -> usize {
        match self.dim() {
            1 => self.cells[0],
            _ => self.cells[0] * self.cells[1],
        }
    }

    fn element_index(&self, e: usize) -> (usize, usize) {
        (e % self.cells[0], e / self.cells[0])
    }

    /// Lower-left corner of element `e`.
    pub fn element_origin(&self, e: usize) -> Point {
        let (ex, ey) = self.element_index(e);
        let b = self.domain.bounds();
        let mut p = [0.0; 3];
        p[0] = b[0].0 + ex as f64 * self.h[0];
        if self.dim() == 2 {
            p[1] = b[1].0 + ey as f64 * self.h[1];
        }
        p
    }

    /// Global DOF indices of element `e` in local shape-function order.
    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        let (ex, ey) = self.element_index(e);
        match self.kind {
            ElementKind::QuinticHermite1d => (0..6).map(|i| 3 * ex + i).collect(),
            ElementKind::BognerFoxSchmit2d => {
                let nx = self.cells[0] + 1;
                let mut out = Vec::with_capacity(16);
                for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let node = (ex + a) + (ey + b) * nx;
                    out.extend((0..4).map(|t| 4 * node + t));
                }
                out
            }
        }
    }

    /// Element faces lying on the domain boundary, in element order.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for e in 0..self.n_elements() {
            let (ex, ey) = self.element_index(e);
            let idx = [ex, ey];
            for axis in 0..self.dim() {
                if idx[axis] == 0 {
                    out.push(BoundaryFace { element: e, axis, upper: false });
                }
                if idx[axis] + 1 == self.cells[axis] {
                    out.push(BoundaryFace { element: e, axis, upper: true });
                }
            }
        }
        out
    }

    pub fn shape_jets(&self, t: f64, s: f64) -> Vec<ShapeJet> {
        shape_jets(self.kind, t, s, self.h[0], self.h[1])
    }

    /// Element containing `x` and the reference coordinates within it.
    pub fn locate(&self, x: &Point) -> (usize, f64, f64) {
        let b = self.domain.bounds();
        let mut idx = [0usize; 2];
        let mut rel = [0.0; 2];
        for a in 0..self.dim() {
            let r = (x[a] - b[a].0) / self.h[a];
            let i = (r.floor().max(0.0) as usize).min(self.cells[a] - 1);
            idx[a] = i;
            rel[a] = r - i as f64;
        }
        (idx[0] + idx[1] * self.cells[0], rel[0], rel[1])
    }

    /// Gauss rules on every element and boundary face, aligned with the mesh
    /// so that piecewise polynomials are integrated without crossing kinks.
    pub fn quadratures(&self, order: usize) -> Quadratures {
        let (ref_t, ref_w) = gauss_legendre_on(order, 0.0, 1.0);
        let mut interior = InteriorQuadrature::default();
        let mut boundary = BoundaryQuadrature::default();
        let (hx, hy) = (self.h[0], self.h[1]);
        for e in 0..self.n_elements() {
            let o = self.element_origin(e);
            match self.dim() {
                1 => {
                    for (t, w) in ref_t.iter().zip(&ref_w) {
                        interior.points.push([o[0] + t * hx, 0.0, 0.0]);
                        interior.weights.push(w * hx);
                    }
                }
                _ => {
                    for (s, ws) in ref_t.iter().zip(&ref_w) {
                        for (t, wt) in ref_t.iter().zip(&ref_w) {
                            interior.points.push([o[0] + t * hx, o[1] + s * hy, 0.0]);
                            interior.weights.push(wt * ws * hx * hy);
                        }
                    }
                }
            }
        }
        for face in self.boundary_faces() {
            let o = self.element_origin(face.element);
            let n = face.normal();
            let side = if face.upper { 1.0 } else { 0.0 };
            match self.dim() {
                1 => {
                    boundary.points.push([o[0] + side * hx, 0.0, 0.0]);
                    boundary.normals.push(n);
                    boundary.weights.push(1.0);
                }
                _ => {
                    for (t, w) in ref_t.iter().zip(&ref_w) {
                        let p = if face.axis == 0 {
                            [o[0] + side * hx, o[1] + t * hy, 0.0]
                        } else {
                            [o[0] + t * hx, o[1] + side * hy, 0.0]
                        };
                        boundary.points.push(p);
                        boundary.normals.push(n);
                        boundary.weights.push(w * if face.axis == 0 { hy } else { hx });
                    }
                }
            }
        }
        Quadratures { interior, boundary }
    }

    /// Nodal coordinates in global node order.
    pub fn node(&self, i: usize) -> Point {
        let b = self.domain.bounds();
        let nx = self.cells[0] + 1;
        let mut p = [0.0; 3];
        p[0] = b[0].0 + (i % nx) as f64 * self.h[0];
        if self.dim() == 2 {
            p[1] = b[1].0 + (i / nx) as f64 * self.h[1];
        }
        p
    }

    /// Hermite interpolant: nodal values and derivatives of `u`.
    pub fn interpolate(&self, u: &dyn ClosedFormField) -> Vec<C64> {
        let per = self.kind.dofs_per_node();
        let mut out = Vec::with_capacity(self.n_dofs());
        for i in 0..self.n_nodes() {
            let x = self.node(i);
            let j = u.jet(&x);
            match self.kind {
                ElementKind::QuinticHermite1d => out.extend([j.value, j.grad[0], j.lap]),
                ElementKind::BognerFoxSchmit2d => {
                    out.extend([j.value, j.grad[0], j.grad[1], u.mixed_xy(&x)])
                }
            }
        }
        debug_assert_eq!(out.len(), self.n_nodes() * per);
        out
    }

    pub fn function<'a>(&'a self, coeffs: &'a [C64]) -> FemFunction<'a> {
        assert_eq!(coeffs.len(), self.n_dofs(), "coefficient vector length");
        FemFunction { space: self, coeffs }
    }
}

/// A discrete function `Σ cᵢ φᵢ`, evaluable as a closed-form field.
#[derive(Clone, Copy)]
pub struct FemFunction<'a> {
    pub space: &'a FemSpace,
    pub coeffs: &'a [C64],
}

impl FemFunction<'_> {
    fn eval(&self, x: &Point) -> (Jet, C64) {
        let (e, t, s) = self.space.locate(x);
        let dofs = self.space.element_dofs(e);
        let shapes = self.space.shape_jets(t, s);
        let mut jet = Jet::ZERO;
        let mut dxy = C64::new(0.0, 0.0);
        for (d, sj) in dofs.iter().zip(&shapes) {
            let c = self.coeffs[*d];
            jet.value += c * sj.v;
            jet.grad[0] += c * sj.dx;
            jet.grad[1] += c * sj.dy;
            jet.lap += c * sj.lap();
            dxy += c * sj.dxy;
        }
        (jet, dxy)
    }
}

impl ClosedFormField for FemFunction<'_> {
    fn jet(&self, x: &Point) -> Jet {
        self.eval(x).0
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        self.eval(x).1
    }
}
