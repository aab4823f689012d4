//! Assembly of the weak-BC Galerkin system and of the Gram matrices of the
//! six seminorms in the 𝒱-norm.
//!
//! Shape functions are real and the mesh is uniform, so every element shares
//! one bulk matrix and every boundary face one matrix per orientation. Only
//! load vectors depend on the element; those are computed in parallel and
//! scattered in element order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{coercivity_coefficients_weak, EnergyParams, SeminormTerms};
use crate::error::Result;
use crate::fem::element::ShapeJet;
use crate::fem::space::FemSpace;
use crate::fem::sparse::{solve, CsrMatrix, Solution};
use crate::field::{BoundarySource, Point, SourceField, C64, I};
use crate::geometry::gauss_legendre_on;

/// Weight of the impedance penalty: `2γ₂`, or `λ/h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PenaltyMode {
    Energy,
    LambdaOverH { lambda: f64 },
}

impl PenaltyMode {
    pub fn boundary_weight(&self, params: &EnergyParams, h: f64) -> f64 {
        match *self {
            Self::Energy => 2.0 * params.gamma2,
            Self::LambdaOverH { lambda } => lambda / h,
        }
    }
}

struct QuadNode {
    point: [f64; 2],
    weight: f64,
    shapes: Vec<ShapeJet>,
}

/// Shape tabulations at reference quadrature points with physical weights.
struct ReferenceTables {
    interior: Vec<QuadNode>,
    /// Indexed by [`crate::fem::space::BoundaryFace::orientation`].
    faces: Vec<Vec<QuadNode>>,
}

impl ReferenceTables {
    fn new(space: &FemSpace, order: usize) -> Self {
        let (ts, ws) = gauss_legendre_on(order, 0.0, 1.0);
        let [hx, hy] = space.h();
        let mut interior = Vec::new();
        let mut faces = Vec::new();
        match space.dim() {
            1 => {
                for (t, w) in ts.iter().zip(&ws) {
                    interior.push(QuadNode {
                        point: [*t, 0.0],
                        weight: w * hx,
                        shapes: space.shape_jets(*t, 0.0),
                    });
                }
                for t in [0.0, 1.0] {
                    faces.push(vec![QuadNode {
                        point: [t, 0.0],
                        weight: 1.0,
                        shapes: space.shape_jets(t, 0.0),
                    }]);
                }
            }
            _ => {
                for (s, wsv) in ts.iter().zip(&ws) {
                    for (t, wt) in ts.iter().zip(&ws) {
                        interior.push(QuadNode {
                            point: [*t, *s],
                            weight: wt * wsv * hx * hy,
                            shapes: space.shape_jets(*t, *s),
                        });
                    }
                }
                // orientation 2·axis + upper
                for axis in 0..2 {
                    for side in [0.0, 1.0] {
                        let len = if axis == 0 { hy } else { hx };
                        faces.push(
                            ts.iter()
                                .zip(&ws)
                                .map(|(t, w)| {
                                    let p = if axis == 0 { [side, *t] } else { [*t, side] };
                                    QuadNode {
                                        point: p,
                                        weight: w * len,
                                        shapes: space.shape_jets(p[0], p[1]),
                                    }
                                })
                                .collect(),
                        );
                    }
                }
            }
        }
        Self { interior, faces }
    }
}

fn face_normal(orientation: usize) -> Point {
    let mut n = [0.0; 3];
    n[orientation / 2] = if orientation % 2 == 1 { 1.0 } else { -1.0 };
    n
}

fn normal_derivative(s: &ShapeJet, n: &Point) -> f64 {
    s.dx * n[0] + s.dy * n[1]
}

fn grad_dot(a: &ShapeJet, b: &ShapeJet) -> f64 {
    a.dx * b.dx + a.dy * b.dy
}

/// Local matrices shared by all elements.
struct LocalMatrices {
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    residual: Vec<f64>,
    face_mass: Vec<Vec<f64>>,
    face_grad: Vec<Vec<f64>>,
    /// Entry `(i, j)` is `∮ r(φⱼ) conj(r(φᵢ))` with `r = ∂ₙ - ik`.
    face_imp: Vec<Vec<C64>>,
}

impl LocalMatrices {
    fn new(tables: &ReferenceTables, nl: usize, k: f64) -> Self {
        let mut stiffness = vec![0.0; nl * nl];
        let mut mass = vec![0.0; nl * nl];
        let mut residual = vec![0.0; nl * nl];
        for q in &tables.interior {
            let l: Vec<f64> = q.shapes.iter().map(|s| -s.lap() - k * k * s.v).collect();
            for i in 0..nl {
                for j in 0..nl {
                    let (a, b) = (&q.shapes[i], &q.shapes[j]);
                    stiffness[i * nl + j] += q.weight * grad_dot(a, b);
                    mass[i * nl + j] += q.weight * a.v * b.v;
                    residual[i * nl + j] += q.weight * l[i] * l[j];
                }
            }
        }
        let mut face_mass = Vec::new();
        let mut face_grad = Vec::new();
        let mut face_imp = Vec::new();
        for (o, nodes) in tables.faces.iter().enumerate() {
            let n = face_normal(o);
            let mut fm = vec![0.0; nl * nl];
            let mut fg = vec![0.0; nl * nl];
            let mut fi = vec![C64::new(0.0, 0.0); nl * nl];
            for q in nodes {
                let r: Vec<C64> = q
                    .shapes
                    .iter()
                    .map(|s| normal_derivative(s, &n) - I * k * s.v)
                    .collect();
                for i in 0..nl {
                    for j in 0..nl {
                        let (a, b) = (&q.shapes[i], &q.shapes[j]);
                        fm[i * nl + j] += q.weight * a.v * b.v;
                        fg[i * nl + j] += q.weight * grad_dot(a, b);
                        fi[i * nl + j] += q.weight * r[j] * r[i].conj();
                    }
                }
            }
            face_mass.push(fm);
            face_grad.push(fg);
            face_imp.push(fi);
        }
        Self {
            stiffness,
            mass,
            residual,
            face_mass,
            face_grad,
            face_imp,
        }
    }
}

/// Sums the element bulk matrix over all elements and each face matrix over
/// the boundary faces of that orientation.
fn stamp(space: &FemSpace, bulk: &[C64], faces: &[Vec<C64>]) -> CsrMatrix {
    let nl = space.kind().local_dofs();
    let mut trip = Vec::with_capacity(space.n_elements() * nl * nl);
    for e in 0..space.n_elements() {
        let dofs = space.element_dofs(e);
        for i in 0..nl {
            for j in 0..nl {
                trip.push((dofs[i], dofs[j], bulk[i * nl + j]));
            }
        }
    }
    for face in space.boundary_faces() {
        let dofs = space.element_dofs(face.element);
        let m = &faces[face.orientation()];
        for i in 0..nl {
            for j in 0..nl {
                trip.push((dofs[i], dofs[j], m[i * nl + j]));
            }
        }
    }
    CsrMatrix::from_triplets(space.n_dofs(), trip)
}

fn to_complex(v: &[f64], s: f64) -> Vec<C64> {
    v.iter().map(|x| C64::new(x * s, 0.0)).collect()
}

/// Assembled Hermitian system `M x = b` with `Mᵢⱼ = 𝒜_WBC(φⱼ, φᵢ)`.
#[derive(Clone, Debug)]
pub struct FemSystem {
    pub space: FemSpace,
    pub params: EnergyParams,
    pub matrix: CsrMatrix,
    pub rhs: Vec<C64>,
    pub mode: PenaltyMode,
    pub boundary_weight: f64,
    pub quad_order: usize,
    /// Whether `params` pass the weak-BC coercivity certificate.
    pub certified: bool,
}

/// Options shared by all assembly entry points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyOptions {
    pub mode: PenaltyMode,
    /// Gauss points per axis and element; `None` selects the element default.
    pub quad_order: Option<usize>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            mode: PenaltyMode::Energy,
            quad_order: None,
        }
    }
}

/// Matrix and load for `𝒜_WBC(u_h, v_h) = ∫ f conj(v_h + 2γ₁ℒv_h)`.
pub fn assemble(
    space: &FemSpace,
    params: &EnergyParams,
    f: &dyn SourceField,
    options: AssemblyOptions,
) -> Result<FemSystem> {
    assemble_generalised(space, params, f, None, options)
}

/// As [`assemble`] with an extra boundary load `B ∮ η conj(∂ₙv - ikv)`, where
/// `B` is the penalty weight.
pub fn assemble_generalised(
    space: &FemSpace,
    params: &EnergyParams,
    zeta: &dyn SourceField,
    eta: Option<&dyn BoundarySource>,
    options: AssemblyOptions,
) -> Result<FemSystem> {
    params.validate()?;
    let certified = coercivity_coefficients_weak(params)?.is_coercive();
    let order = options.quad_order.unwrap_or(space.kind().default_quad_order());
    let tables = ReferenceTables::new(space, order);
    let nl = space.kind().local_dofs();
    let k = params.k;
    let local = LocalMatrices::new(&tables, nl, k);
    let bw = options.mode.boundary_weight(params, space.mesh_size());
    let bulk: Vec<C64> = (0..nl * nl)
        .map(|i| {
            C64::new(
                local.stiffness[i] - k * k * local.mass[i] + 2.0 * params.gamma1 * local.residual[i],
                0.0,
            )
        })
        .collect();
    let faces: Vec<Vec<C64>> = local
        .face_imp
        .iter()
        .map(|m| m.iter().map(|v| v * bw).collect())
        .collect();
    let matrix = stamp(space, &bulk, &faces);
    let rhs = load_vector(space, &tables, params, bw, zeta, eta);
    Ok(FemSystem {
        space: space.clone(),
        params: *params,
        matrix,
        rhs,
        mode: options.mode,
        boundary_weight: bw,
        quad_order: order,
        certified,
    })
}

fn load_vector(
    space: &FemSpace,
    tables: &ReferenceTables,
    params: &EnergyParams,
    bw: f64,
    zeta: &dyn SourceField,
    eta: Option<&dyn BoundarySource>,
) -> Vec<C64> {
    let nl = space.kind().local_dofs();
    let k = params.k;
    let [hx, hy] = space.h();
    let physical = |e: usize, p: [f64; 2]| -> Point {
        let o = space.element_origin(e);
        [o[0] + p[0] * hx, o[1] + p[1] * hy, 0.0]
    };
    let local: Vec<Vec<C64>> = (0..space.n_elements())
        .into_par_iter()
        .map(|e| {
            let mut b = vec![C64::new(0.0, 0.0); nl];
            for q in &tables.interior {
                let fx = zeta.value(&physical(e, q.point)) * q.weight;
                if fx == C64::new(0.0, 0.0) {
                    continue;
                }
                for (bi, s) in b.iter_mut().zip(&q.shapes) {
                    *bi += fx * (s.v + 2.0 * params.gamma1 * (-s.lap() - k * k * s.v));
                }
            }
            b
        })
        .collect();
    let mut rhs = vec![C64::new(0.0, 0.0); space.n_dofs()];
    for (e, b) in local.iter().enumerate() {
        for (d, v) in space.element_dofs(e).into_iter().zip(b) {
            rhs[d] += v;
        }
    }
    if let Some(eta) = eta {
        for face in space.boundary_faces() {
            let n = face.normal();
            let dofs = space.element_dofs(face.element);
            for q in &tables.faces[face.orientation()] {
                let g = eta.value(&physical(face.element, q.point), &n) * (bw * q.weight);
                for (d, s) in dofs.iter().zip(&q.shapes) {
                    rhs[*d] += g * (normal_derivative(s, &n) + I * k * s.v);
                }
            }
        }
    }
    rhs
}

impl FemSystem {
    pub fn solve(&self) -> Result<Solution> {
        solve(&self.matrix, &self.rhs)
    }

    /// `½Re(x*Mx) - Re(x*b)`, equal to `F_γ` of the discrete function minus
    /// the constant `γ₁‖f‖²`.
    pub fn discrete_energy(&self, x: &[C64]) -> f64 {
        let xb: C64 = x.iter().zip(&self.rhs).map(|(a, b)| a.conj() * b).sum();
        0.5 * self.matrix.quadratic_form(x).re - xb.re
    }

    /// Hermitian defect relative to the largest entry.
    pub fn relative_hermitian_defect(&self) -> f64 {
        let m = self.matrix.max_abs();
        if m == 0.0 {
            0.0
        } else {
            self.matrix.hermitian_defect() / m
        }
    }
}

/// Gram matrices of the six squared seminorms of the 𝒱-norm.
#[derive(Clone, Debug)]
pub struct GramMatrices {
    pub grad: CsrMatrix,
    pub mass: CsrMatrix,
    pub residual: CsrMatrix,
    pub bmass: CsrMatrix,
    pub bgrad: CsrMatrix,
    pub bimp: CsrMatrix,
}

impl GramMatrices {
    pub fn assemble(space: &FemSpace, k: f64, quad_order: Option<usize>) -> Self {
        let order = quad_order.unwrap_or(space.kind().default_quad_order());
        let tables = ReferenceTables::new(space, order);
        let nl = space.kind().local_dofs();
        let l = LocalMatrices::new(&tables, nl, k);
        let zero_faces = vec![vec![C64::new(0.0, 0.0); nl * nl]; l.face_mass.len()];
        let zero_bulk = vec![C64::new(0.0, 0.0); nl * nl];
        let faces_of = |m: &[Vec<f64>], s: f64| -> Vec<Vec<C64>> {
            m.iter().map(|v| to_complex(v, s)).collect()
        };
        Self {
            grad: stamp(space, &to_complex(&l.stiffness, 1.0), &zero_faces),
            mass: stamp(space, &to_complex(&l.mass, k * k), &zero_faces),
            residual: stamp(space, &to_complex(&l.residual, 1.0), &zero_faces),
            bmass: stamp(space, &zero_bulk, &faces_of(&l.face_mass, k * k)),
            bgrad: stamp(space, &zero_bulk, &faces_of(&l.face_grad, 1.0)),
            bimp: stamp(space, &zero_bulk, &l.face_imp),
        }
    }

    pub fn terms(&self, x: &[C64]) -> SeminormTerms {
        SeminormTerms {
            grad: self.grad.quadratic_form(x).re,
            mass: self.mass.quadratic_form(x).re,
            residual: self.residual.quadratic_form(x).re,
            bmass: self.bmass.quadratic_form(x).re,
            bgrad: self.bgrad.quadratic_form(x).re,
            bimp: self.bimp.quadratic_form(x).re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::default_params;
    use crate::fem::element::ElementKind;
    use crate::field::{Constant, Zero};
    use crate::geometry::Domain;

    #[test]
    fn single_element_moments() {
        let d = Domain::interval(0.0, 0.5).unwrap();
        let s = FemSpace::new(&d, 0.5, ElementKind::QuinticHermite1d).unwrap();
        let mut p = default_params(&d, 1.0).unwrap();
        p.gamma1 = 0.0;
        let sys = assemble(&s, &p, &Constant::real(1.0), AssemblyOptions::default()).unwrap();
        let h: f64 = 0.5;
        let want = [h / 2.0, h * h / 10.0, h.powi(3) / 120.0, h / 2.0, -h * h / 10.0, h.powi(3) / 120.0];
        for (b, w) in sys.rhs.iter().zip(want) {
            assert!((b.re - w).abs() < 1e-15 && b.im == 0.0, "{b} vs {w}");
        }
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let d = Domain::unit_square();
        let s = FemSpace::with_cells(&d, 4, ElementKind::BognerFoxSchmit2d).unwrap();
        let p = default_params(&d, 10.0).unwrap();
        let sys = assemble(&s, &p, &Zero, AssemblyOptions::default()).unwrap();
        assert!(sys.rhs.iter().all(|v| *v == C64::new(0.0, 0.0)));
        assert!(sys.solve().unwrap().x.iter().all(|v| v.norm() == 0.0));
        assert!(sys.relative_hermitian_defect() < 1e-12);
        assert!(sys.certified);
    }

    #[test]
    fn penalty_mode_matches_energy_mode() {
        let d = Domain::unit_square();
        let s = FemSpace::with_cells(&d, 4, ElementKind::BognerFoxSchmit2d).unwrap();
        let p = default_params(&d, 5.0).unwrap();
        let f = Constant::real(1.0);
        let a = assemble(&s, &p, &f, AssemblyOptions::default()).unwrap();
        let lambda = 2.0 * p.gamma2 * s.mesh_size();
        let b = assemble(
            &s,
            &p,
            &f,
            AssemblyOptions {
                mode: PenaltyMode::LambdaOverH { lambda },
                quad_order: None,
            },
        )
        .unwrap();
        assert!(a.matrix.max_abs_diff(&b.matrix) <= 1e-13 * a.matrix.max_abs());
    }
}
