//! Rellich and low-order Morawetz integral identities evaluated by quadrature.
//! Both vanish for any smooth field; the report lists each term so a non-zero
//! residual can be traced to its source.

use serde::{Deserialize, Serialize};

use crate::field::{ClosedFormField, Point, C64, I};
use crate::geometry::{Domain, QuadSpec, Quadratures};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub bulk_terms: Vec<(String, f64)>,
    pub boundary_terms: Vec<(String, f64)>,
    pub residual: f64,
    pub relative_residual: f64,
}

impl IdentityReport {
    fn new(bulk_terms: Vec<(String, f64)>, boundary_terms: Vec<(String, f64)>) -> Self {
        let all = bulk_terms.iter().chain(&boundary_terms);
        let residual: f64 = all.clone().map(|(_, v)| v).sum();
        let scale = all.map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let relative_residual = if scale > 0.0 {
            residual.abs() / scale
        } else {
            residual.abs()
        };
        Self {
            bulk_terms,
            boundary_terms,
            residual,
            relative_residual,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.bulk_terms
            .iter()
            .chain(&self.boundary_terms)
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

fn offset(x: &Point, origin: &Point) -> Point {
    [x[0] - origin[0], x[1] - origin[1], x[2] - origin[2]]
}

fn dot_re(y: &Point, n: &Point) -> f64 {
    y[0] * n[0] + y[1] * n[1] + y[2] * n[2]
}

fn dot_c(y: &Point, g: &[C64; 3]) -> C64 {
    g[0] * y[0] + g[1] * y[1] + g[2] * y[2]
}

/// Rellich identity with multiplier `(x - x₀)·∇u`, where `x₀` is the domain
/// centre. Terms: `mixed = ∫ 2Re((y·∇u) conj(ℒu))`,
/// `bulk = ∫ (ν-2)|∇u|² - νk²|u|²`, and the boundary term
/// `∮ 2Re((y·∇ū) ∂ₙu) - |∇u|²(y·n) + k²|u|²(y·n)`.
pub fn rellich_residual(
    u: &dyn ClosedFormField,
    k: f64,
    domain: &Domain,
    quad: impl Into<QuadSpec>,
) -> IdentityReport {
    let q = Quadratures::new(domain, quad);
    rellich_with(u, k, domain, &q)
}

pub fn rellich_with(
    u: &dyn ClosedFormField,
    k: f64,
    domain: &Domain,
    q: &Quadratures,
) -> IdentityReport {
    let nu = domain.dim() as f64;
    let origin = *domain.origin();
    let k2 = k * k;
    let [mixed, bulk] = q.interior.integrate(|x| {
        let j = u.jet(x);
        let y = offset(x, &origin);
        let mixed = 2.0 * (dot_c(&y, &j.grad) * j.helmholtz(k).conj()).re;
        let bulk = (nu - 2.0) * j.grad_norm_sqr() - nu * k2 * j.value.norm_sqr();
        [mixed, bulk]
    });
    let [cross, grad, mass] = q.boundary.integrate(|x, n| {
        let j = u.jet(x);
        let y = offset(x, &origin);
        let yn = dot_re(&y, n);
        let cross = 2.0 * (dot_c(&y, &j.grad).conj() * j.normal_derivative(n)).re;
        [cross, -j.grad_norm_sqr() * yn, k2 * j.value.norm_sqr() * yn]
    });
    IdentityReport::new(
        vec![("mixed".into(), mixed), ("bulk".into(), bulk)],
        vec![("boundary".into(), cross + grad + mass)],
    )
}

/// Low-order Morawetz identity with multiplier `M₀u = -ikβu`. Terms:
/// `∫ 2Re(conj(M₀u) ℒu)`, `-2k²β∮|u|²`, `2Re∮ ikβ ū (∂ₙu - iku)`.
pub fn low_order_morawetz_residual(
    u: &dyn ClosedFormField,
    k: f64,
    beta: f64,
    domain: &Domain,
    quad: impl Into<QuadSpec>,
) -> IdentityReport {
    let q = Quadratures::new(domain, quad);
    low_order_morawetz_with(u, k, beta, &q)
}

pub fn low_order_morawetz_with(
    u: &dyn ClosedFormField,
    k: f64,
    beta: f64,
    q: &Quadratures,
) -> IdentityReport {
    let [bulk] = q.interior.integrate(|x| {
        let j = u.jet(x);
        [2.0 * (I * k * beta * j.value.conj() * j.helmholtz(k)).re]
    });
    let [mass, imp] = q.boundary.integrate(|x, n| {
        let j = u.jet(x);
        [
            -2.0 * k * k * beta * j.value.norm_sqr(),
            2.0 * (I * k * beta * j.value.conj() * j.impedance_residual(n, k)).re,
        ]
    });
    IdentityReport::new(
        vec![("multiplier".into(), bulk)],
        vec![("mass".into(), mass), ("impedance".into(), imp)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Constant, GaussianBump, PlaneWave, Polynomial, Zero};
    use approx::assert_relative_eq;

    #[test]
    fn constant_field_rellich_terms() {
        let d = Domain::unit_square();
        let c = C64::new(0.3, -0.4);
        let r = rellich_residual(&Constant(c), 2.0, &d, 6);
        let expect = 2.0 * 4.0 * c.norm_sqr();
        assert_relative_eq!(r.term("mixed").unwrap(), 0.0);
        assert_relative_eq!(r.term("bulk").unwrap(), -expect, max_relative = 1e-13);
        assert_relative_eq!(r.term("boundary").unwrap(), expect, max_relative = 1e-13);
        assert!(r.relative_residual < 1e-13);
    }

    #[test]
    fn linear_field_rellich_terms() {
        let d = Domain::centred_unit_box(2).unwrap();
        let u = Polynomial::new(vec![(C64::new(1.0, 0.0), [1, 0, 0])]);
        let r = rellich_residual(&u, 1.0, &d, 8);
        assert_relative_eq!(r.term("mixed").unwrap(), -1.0 / 6.0, max_relative = 1e-13);
        assert_relative_eq!(r.term("bulk").unwrap(), -1.0 / 6.0, max_relative = 1e-13);
        assert_relative_eq!(r.term("boundary").unwrap(), 1.0 / 3.0, max_relative = 1e-13);
        assert!(r.relative_residual < 1e-13);
    }

    #[test]
    fn plane_wave_rellich() {
        let d = Domain::unit_square();
        let k = 10.0;
        let r = rellich_residual(&PlaneWave::new(k, [0.6, 0.8, 0.0]), k, &d, 24);
        assert!(r.term("mixed").unwrap().abs() < 1e-10);
        assert!(r.relative_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn morawetz_constant_terms() {
        let d = Domain::unit_square();
        let r = low_order_morawetz_residual(&Constant::real(1.0), 1.0, 1.0, &d, 4);
        assert!(r.term("multiplier").unwrap().abs() < 1e-15);
        assert_relative_eq!(r.term("mass").unwrap(), -8.0, max_relative = 1e-13);
        assert_relative_eq!(r.term("impedance").unwrap(), 8.0, max_relative = 1e-13);
        let z = low_order_morawetz_residual(&Zero, 3.0, 2.0, &d, 4);
        assert_eq!(z.residual, 0.0);
        assert_eq!(z.relative_residual, 0.0);
    }

    #[test]
    fn morawetz_plane_wave_and_bump() {
        let d = Domain::unit_square();
        let r = low_order_morawetz_residual(&PlaneWave::new(5.0, [1.0, 0.0, 0.0]), 5.0, 2.0, &d, 24);
        assert!(r.relative_residual < 1e-10);
        let b = GaussianBump::new(2, [0.4, 0.6, 0.0], 0.05, 1.0);
        let r = low_order_morawetz_residual(&b, 7.0, 1.5, &d, 24);
        assert!(r.relative_residual < 1e-9, "{r:?}");
    }

    #[test]
    fn one_dimensional_identities() {
        let d = Domain::unit_interval();
        let u = PlaneWave::new(3.0, [1.0, 0.0, 0.0]);
        assert!(rellich_residual(&u, 3.0, &d, 24).relative_residual < 1e-12);
        let p = Polynomial::new(vec![(C64::new(1.0, 2.0), [4, 0, 0]), (C64::new(0.5, 0.0), [1, 0, 0])]);
        assert!(rellich_residual(&p, 2.0, &d, 24).relative_residual < 1e-12);
        assert!(low_order_morawetz_residual(&p, 2.0, 0.7, &d, 24).relative_residual < 1e-12);
    }
}
