//! 1D h-refinement studies of the weak-BC Galerkin method for constant
//! forcing, against either the analytic impedance solution or the analytic
//! minimiser of the continuous weak-BC energy.

use serde::{Deserialize, Serialize};

use crate::energy::{default_params, EnergyParams};
use crate::error::Result;
use crate::fem::{assemble, error_norms, AssemblyOptions, ElementKind, FemSpace, PenaltyMode};
use crate::field::{Constant, ExponentialSum1d, C64};
use crate::geometry::Domain;
use crate::oracle::{exact_1d_constant_forcing, minimiser_1d_constant_forcing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Solution of `ℒu = f` with `∂ₙu = iku`.
    Exact,
    /// Minimiser of the continuous weak-BC energy with the same weights.
    Minimiser,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub k: f64,
    /// `‖u - u_h‖_{𝒱,L}`.
    pub v_error: f64,
    /// `log₂` of the error ratio to the previous row when `h` halves.
    pub rate: Option<f64>,
    /// `‖u - I_h u‖_{𝒱,L}` for the Hermite interpolant.
    pub interpolation_error: f64,
    /// `v_error / interpolation_error`.
    pub ratio: f64,
    pub solve_residual: f64,
    pub backward_error: f64,
    pub hermitian_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub k: f64,
    pub f: f64,
    pub cells: Vec<usize>,
    pub reference: Reference,
    pub mode: PenaltyMode,
    pub quad_order: Option<usize>,
    /// Overrides the default parameter pack; `k` is taken from this spec.
    pub params: Option<EnergyParams>,
}

impl StudySpec {
    pub fn new(k: f64, cells: Vec<usize>, reference: Reference) -> Self {
        Self {
            k,
            f: 1.0,
            cells,
            reference,
            mode: PenaltyMode::Energy,
            quad_order: None,
            params: None,
        }
    }
}

pub fn reference_field(
    spec: &StudySpec,
    params: &EnergyParams,
    h: f64,
    domain: &Domain,
) -> Result<ExponentialSum1d> {
    let f = C64::new(spec.f, 0.0);
    match spec.reference {
        Reference::Exact => exact_1d_constant_forcing(spec.k, f, domain),
        Reference::Minimiser => minimiser_1d_constant_forcing(
            spec.k,
            f,
            params.gamma1,
            spec.mode.boundary_weight(params, h),
            domain,
        ),
    }
}

/// One row per entry of `spec.cells` on the unit interval.
pub fn convergence_study(spec: &StudySpec) -> Result<Vec<StudyRow>> {
    let domain = Domain::unit_interval();
    let params = match spec.params {
        Some(p) => p.with_k(spec.k),
        None => default_params(&domain, spec.k)?,
    };
    let kind = ElementKind::QuinticHermite1d;
    let order = spec.quad_order.unwrap_or(kind.default_quad_order()) + 4;
    let mut rows: Vec<StudyRow> = Vec::new();
    for &n in &spec.cells {
        let space = FemSpace::with_cells(&domain, n, kind)?;
        let h = space.mesh_size();
        let u = reference_field(spec, &params, h, &domain)?;
        let sys = assemble(
            &space,
            &params,
            &Constant::real(spec.f),
            AssemblyOptions {
                mode: spec.mode,
                quad_order: spec.quad_order,
            },
        )?;
        let sol = sys.solve()?;
        let err = error_norms(&space, &sol.x, &u, spec.k, order).v_norm_rescaled;
        let interp = error_norms(&space, &space.interpolate(&u), &u, spec.k, order).v_norm_rescaled;
        let rate = rows.last().map(|prev| (prev.v_error / err).ln() / (prev.h / h).ln());
        rows.push(StudyRow {
            h,
            k: spec.k,
            v_error: err,
            rate,
            interpolation_error: interp,
            ratio: err / interp,
            solve_residual: sol.relative_residual,
            backward_error: sol.backward_error,
            hermitian_defect: sys.relative_hermitian_defect(),
        });
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[StudyRow]) -> String {
    let mut s = String::from("h,k,v_error,rate,interpolation_error,ratio\n");
    for r in rows {
        let rate = r.rate.map(|v| format!("{v:.16e}")).unwrap_or_default();
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}\n",
            r.h, r.k, r.v_error, rate, r.interpolation_error, r.ratio
        ));
    }
    s
}
