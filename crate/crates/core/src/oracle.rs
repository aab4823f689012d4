//! Reference solutions: the analytic 1D impedance solution, the analytic 1D
//! minimiser of the weak-BC energy, manufactured generalised data and a
//! second-order finite-difference solver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::sparse::{solve, CsrMatrix};
use crate::fem::FieldGrid;
use crate::field::{BoundarySource, ClosedFormField, ExponentialSum1d, Point, SourceField, C64, I};
use crate::geometry::Domain;

/// `u(x) = (f/k²)((e^{ik(x-a)} + e^{ik(b-x)})/2 - 1)` on `(a, b)`: the solution
/// of `-u'' - k²u = f` with `∂ₙu = iku` at both ends.
pub fn exact_1d_constant_forcing(k: f64, f: C64, domain: &Domain) -> Result<ExponentialSum1d> {
    check_1d(k, domain)?;
    let (a, b) = domain.bounds()[0];
    let c = f / (k * k);
    let ek = C64::new(k, 0.0);
    Ok(ExponentialSum1d {
        constant: -c,
        terms: vec![
            (0.5 * c * (-I * k * a).exp(), ek),
            (0.5 * c * (I * k * b).exp(), -ek),
        ],
    })
}

fn check_1d(k: f64, domain: &Domain) -> Result<()> {
    if domain.dim() != 1 {
        return Err(Error::InvalidDomain("1D oracle needs an interval".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("k must be positive (got {k})")));
    }
    Ok(())
}

/// Exact minimiser over `H²(a, b)` of
/// `∫ ½(|u'|² - k²|u|²) - Re∫ f ū + γ₁∫|ℒu - f|² + (B/2)Σ_ends |∂ₙu - iku|²`
/// for constant `f`, where `B` is the boundary weight of the discrete form
/// (`2γ₂` or `λ/h`).
///
/// With `G = 2γ₁` the Euler–Lagrange equations give `w = ℒu - f` solving
/// `w'' + (k² - 1/G)w = 0`, so `u = -f/k² + a e^{ikx} + b e^{-ikx} + c e^{iμx}
/// + d e^{-iμx}` with `μ² = k² - 1/G`, and two natural conditions per end:
/// `∂ₙu + G∂ₙw + ikB r = 0` and `-Gw + B r = 0`, `r = ∂ₙu - iku`.
pub fn minimiser_1d_constant_forcing(
    k: f64,
    f: C64,
    gamma1: f64,
    boundary_weight: f64,
    domain: &Domain,
) -> Result<ExponentialSum1d> {
    check_1d(k, domain)?;
    let (a, b) = domain.bounds()[0];
    let g = 2.0 * gamma1;
    let bw = boundary_weight;
    let mut ms = vec![C64::new(k, 0.0), C64::new(-k, 0.0)];
    if g > 0.0 {
        let mu = (C64::new(k * k - 1.0 / g, 0.0)).sqrt();
        if mu.norm() < 1e-8 * k {
            return Err(Error::InvalidParams(
                "k² = 1/(2γ₁): degenerate minimiser ansatz".into(),
            ));
        }
        ms.extend([mu, -mu]);
    }
    let n = ms.len();
    let mut mat = DMatrix::<C64>::zeros(n, n);
    let mut rhs = DVector::<C64>::zeros(n);
    let c0 = -f / (k * k);
    // r of the constant part is -ik·c0
    let r0 = -I * k * c0;
    for (end, (x, nrm)) in [(a, -1.0), (b, 1.0)].into_iter().enumerate() {
        let rows = if g > 0.0 { [2 * end, 2 * end + 1] } else { [end, usize::MAX] };
        for (col, m) in ms.iter().enumerate() {
            let e = (I * m * x).exp();
            let dn = nrm * I * m * e;
            let r = dn - I * k * e;
            let oscillatory = col >= 2;
            // ∂ₙu + G∂ₙw cancels for the e^{±iμx} terms since G·w = -(those terms)
            let flux = if oscillatory { C64::new(0.0, 0.0) } else { dn };
            mat[(rows[0], col)] = flux + I * k * bw * r;
            if g > 0.0 {
                mat[(rows[1], col)] = if oscillatory { e } else { C64::new(0.0, 0.0) } + bw * r;
            }
        }
        rhs[rows[0]] = -(I * k * bw * r0);
        if g > 0.0 {
            rhs[rows[1]] = -(bw * r0);
        }
    }
    let coef = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolveFailure("singular minimiser boundary system".into()))?;
    Ok(ExponentialSum1d {
        constant: c0,
        terms: ms.iter().zip(coef.iter()).map(|(m, c)| (*c, *m)).collect(),
    })
}

/// Interior and boundary data of the generalised problem
/// `ℒw = ζ` in Ω, `∂ₙw - ikw = η` on ∂Ω, generated from a known field.
pub struct GeneralisedData<'a> {
    pub zeta: ManufacturedSource<'a>,
    pub eta: ManufacturedBoundary<'a>,
}

pub struct ManufacturedSource<'a> {
    pub u: &'a dyn ClosedFormField,
    pub k: f64,
}

impl SourceField for ManufacturedSource<'_> {
    fn value(&self, x: &Point) -> C64 {
        self.u.jet(x).helmholtz(self.k)
    }
}

pub struct ManufacturedBoundary<'a> {
    pub u: &'a dyn ClosedFormField,
    pub k: f64,
}

impl BoundarySource for ManufacturedBoundary<'_> {
    fn value(&self, x: &Point, n: &Point) -> C64 {
        self.u.jet(x).impedance_residual(n, self.k)
    }
}

pub fn manufactured_generalised(u_star: &dyn ClosedFormField, k: f64) -> GeneralisedData<'_> {
    GeneralisedData {
        zeta: ManufacturedSource { u: u_star, k },
        eta: ManufacturedBoundary { u: u_star, k },
    }
}

/// Centred second-order differences for `-u'' - k²u = f` with ghost-node
/// impedance closures `∂ₙu = iku`, on `n_nodes` equispaced nodes.
pub fn fd_reference_1d(
    k: f64,
    f: &dyn SourceField,
    n_nodes: usize,
    domain: &Domain,
) -> Result<FieldGrid> {
    check_1d(k, domain)?;
    if n_nodes < 3 {
        return Err(Error::InvalidParams("fd_reference_1d needs at least 3 nodes".into()));
    }
    let (a, b) = domain.bounds()[0];
    let n = n_nodes;
    let h = (b - a) / (n - 1) as f64;
    let h2 = h * h;
    let x = |i: usize| if i + 1 == n { b } else { a + i as f64 * h };
    let mut trip = Vec::with_capacity(3 * n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let diag = C64::new(2.0 / h2 - k * k, 0.0);
        if i == 0 || i + 1 == n {
            // ghost value u_{-1} = u_1 + 2ihk u_0, halved row keeps symmetry
            let nb = if i == 0 { 1 } else { n - 2 };
            trip.push((i, i, 0.5 * (diag - 2.0 * I * k / h)));
            trip.push((i, nb, C64::new(-1.0 / h2, 0.0)));
            rhs.push(0.5 * f.value(&[x(i), 0.0, 0.0]));
        } else {
            trip.push((i, i - 1, C64::new(-1.0 / h2, 0.0)));
            trip.push((i, i, diag));
            trip.push((i, i + 1, C64::new(-1.0 / h2, 0.0)));
            rhs.push(f.value(&[x(i), 0.0, 0.0]));
        }
    }
    let m = CsrMatrix::from_triplets(n, trip);
    let sol = solve(&m, &rhs)?;
    Ok(FieldGrid {
        shape: [n, 1],
        lower: [a, 0.0],
        spacing: [h, 0.0],
        dim: 1,
        values: sol.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, GaussianBump, PlaneWave, Zero};
    use std::f64::consts::PI;

    #[test]
    fn exact_solution_values() {
        let d = Domain::unit_interval();
        let u = exact_1d_constant_forcing(PI, C64::new(1.0, 0.0), &d).unwrap();
        let mid = u.jet(&[0.5, 0.0, 0.0]).value;
        let want = C64::new(-1.0, 1.0) / (PI * PI);
        assert!((mid - want).norm() < 1e-15);
        for x in [0.0, 0.3, 0.9, 1.0] {
            assert!((u.jet(&[x, 0.0, 0.0]).helmholtz(PI) - 1.0).norm() < 1e-12);
        }
        for (x, n) in [(0.0, -1.0), (1.0, 1.0)] {
            assert!(u.jet(&[x, 0.0, 0.0]).impedance_residual(&[n, 0.0, 0.0], PI).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_interval() {
        let d = Domain::interval(-0.3, 0.9).unwrap();
        let f = C64::new(0.5, -1.0);
        let u = exact_1d_constant_forcing(4.0, f, &d).unwrap();
        assert!((u.jet(&[0.2, 0.0, 0.0]).helmholtz(4.0) - f).norm() < 1e-12);
        assert!(u.jet(&[-0.3, 0.0, 0.0]).impedance_residual(&[-1.0, 0.0, 0.0], 4.0).norm() < 1e-12);
        assert!(u.jet(&[0.9, 0.0, 0.0]).impedance_residual(&[1.0, 0.0, 0.0], 4.0).norm() < 1e-12);
    }

    #[test]
    fn fd_reference_agrees_with_exact() {
        let d = Domain::unit_interval();
        let exact = exact_1d_constant_forcing(PI, C64::new(1.0, 0.0), &d).unwrap();
        let g = fd_reference_1d(PI, &Constant::real(1.0), 10_000, &d).unwrap();
        let want = FieldGrid::sample(&exact, &d, 10_000);
        assert!(g.max_diff(&want) < 1e-6);
        let zero = fd_reference_1d(PI, &Zero, 50, &d).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn fd_reference_is_second_order() {
        let d = Domain::unit_interval();
        let exact = exact_1d_constant_forcing(PI, C64::new(1.0, 0.0), &d).unwrap();
        let err = |n: usize| {
            let g = fd_reference_1d(PI, &Constant::real(1.0), n, &d).unwrap();
            g.max_diff(&FieldGrid::sample(&exact, &d, n))
        };
        let (e1, e2) = (err(101), err(201));
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn manufactured_data() {
        let k = 3.0;
        let w = PlaneWave::new(k, [0.6, 0.8, 0.0]);
        let g = manufactured_generalised(&w, k);
        let x = [0.2, 0.7, 0.0];
        assert!(g.zeta.value(&x).norm() < 1e-12);
        let n = [1.0, 0.0, 0.0];
        let want = I * k * (0.6 - 1.0) * w.jet(&x).value;
        assert!((g.eta.value(&x, &n) - want).norm() < 1e-12);
        let d = Domain::unit_interval();
        let u = exact_1d_constant_forcing(2.0, C64::new(1.0, 0.0), &d).unwrap();
        let g = manufactured_generalised(&u, 2.0);
        assert!((g.zeta.value(&[0.4, 0.0, 0.0]) - 1.0).norm() < 1e-12);
        assert!(g.eta.value(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).norm() < 1e-12);
        let b = GaussianBump::new(2, [0.5, 0.5, 0.0], 0.1, 1.0);
        let g = manufactured_generalised(&b, 2.0);
        let j = b.jet(&x);
        assert!((g.zeta.value(&x) - (-j.lap - 4.0 * j.value)).norm() < 1e-14);
    }
}
