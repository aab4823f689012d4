//! Complex fields with analytic value, gradient and Laplacian.
//!
//! Points are always `[f64; 3]`; components beyond the working dimension are
//! zero and gradient entries beyond it are ignored.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type Point = [f64; 3];

pub const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Value, gradient and Laplacian of a field at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: C64,
    pub grad: [C64; 3],
    pub lap: C64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: ZERO,
        grad: [ZERO; 3],
        lap: ZERO,
    };

    /// `L u = -Δu - k² u`.
    pub fn helmholtz(&self, k: f64) -> C64 {
        -self.lap - k * k * self.value
    }

    pub fn normal_derivative(&self, n: &Point) -> C64 {
        self.grad[0] * n[0] + self.grad[1] * n[1] + self.grad[2] * n[2]
    }

    /// `∂ₙu - i k u`.
    pub fn impedance_residual(&self, n: &Point, k: f64) -> C64 {
        self.normal_derivative(n) - I * k * self.value
    }

    pub fn grad_norm_sqr(&self) -> f64 {
        self.grad.iter().map(|g| g.norm_sqr()).sum()
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet {
            value: self.value * s,
            grad: self.grad.map(|g| g * s),
            lap: self.lap * s,
        }
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: [
                self.grad[0] + o.grad[0],
                self.grad[1] + o.grad[1],
                self.grad[2] + o.grad[2],
            ],
            lap: self.lap + o.lap,
        }
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

/// A field whose value, gradient and Laplacian are known in closed form.
pub trait ClosedFormField: Sync {
    fn jet(&self, x: &Point) -> Jet;

    /// `∂²u/∂x∂y`, needed for bicubic Hermite interpolation. The default is a
    /// centred difference of the analytic gradient.
    fn mixed_xy(&self, x: &Point) -> C64 {
        let step = 1e-6;
        let mut xp = *x;
        let mut xm = *x;
        xp[1] += step;
        xm[1] -= step;
        (self.jet(&xp).grad[0] - self.jet(&xm).grad[0]) / (2.0 * step)
    }
}

/// Anything that can be sampled pointwise; used for source terms, which never
/// need derivatives.
pub trait SourceField: Sync {
    fn value(&self, x: &Point) -> C64;
}

impl<T: ClosedFormField + ?Sized> SourceField for T {
    fn value(&self, x: &Point) -> C64 {
        self.jet(x).value
    }
}

/// Boundary data that depends on the position and the outward normal.
pub trait BoundarySource: Sync {
    fn value(&self, x: &Point, n: &Point) -> C64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl ClosedFormField for Zero {
    fn jet(&self, _x: &Point) -> Jet {
        Jet::ZERO
    }

    fn mixed_xy(&self, _x: &Point) -> C64 {
        ZERO
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Constant(pub C64);

impl Constant {
    pub fn real(c: f64) -> Self {
        Constant(C64::new(c, 0.0))
    }
}

impl ClosedFormField for Constant {
    fn jet(&self, _x: &Point) -> Jet {
        Jet {
            value: self.0,
            ..Jet::ZERO
        }
    }

    fn mixed_xy(&self, _x: &Point) -> C64 {
        ZERO
    }
}

/// Sum of complex-weighted monomials `c · x^a y^b z^c`.
#[derive(Clone, Debug, Default)]
pub struct Polynomial {
    pub terms: Vec<(C64, [u32; 3])>,
}

impl Polynomial {
    pub fn new(terms: Vec<(C64, [u32; 3])>) -> Self {
        Self { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }
}

fn powi(x: f64, e: u32) -> f64 {
    if e == 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

impl ClosedFormField for Polynomial {
    fn jet(&self, x: &Point) -> Jet {
        let mut jet = Jet::ZERO;
        for (c, e) in &self.terms {
            let p = [powi(x[0], e[0]), powi(x[1], e[1]), powi(x[2], e[2])];
            jet.value += c * (p[0] * p[1] * p[2]);
            for a in 0..3 {
                if e[a] == 0 {
                    continue;
                }
                let mut d = e[a] as f64 * powi(x[a], e[a] - 1);
                let mut dd = if e[a] >= 2 {
                    (e[a] * (e[a] - 1)) as f64 * powi(x[a], e[a] - 2)
                } else {
                    0.0
                };
                for b in 0..3 {
                    if b != a {
                        d *= p[b];
                        dd *= p[b];
                    }
                }
                jet.grad[a] += c * d;
                jet.lap += c * dd;
            }
        }
        jet
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        let mut out = ZERO;
        for (c, e) in &self.terms {
            if e[0] == 0 || e[1] == 0 {
                continue;
            }
            out += c
                * (e[0] as f64 * powi(x[0], e[0] - 1))
                * (e[1] as f64 * powi(x[1], e[1] - 1))
                * powi(x[2], e[2]);
        }
        out
    }
}

/// `A · exp(i κ d·x)`. On-shell for the Helmholtz operator when `κ|d| = k`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub wavenumber: f64,
    pub direction: Point,
    pub amplitude: C64,
}

impl PlaneWave {
    pub fn new(wavenumber: f64, direction: Point) -> Self {
        Self {
            wavenumber,
            direction,
            amplitude: C64::new(1.0, 0.0),
        }
    }
}

impl ClosedFormField for PlaneWave {
    fn jet(&self, x: &Point) -> Jet {
        let d = &self.direction;
        let phase = self.wavenumber * (d[0] * x[0] + d[1] * x[1] + d[2] * x[2]);
        let u = self.amplitude * C64::from_polar(1.0, phase);
        let iku = I * self.wavenumber * u;
        let d2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        Jet {
            value: u,
            grad: [iku * d[0], iku * d[1], iku * d[2]],
            lap: -self.wavenumber * self.wavenumber * d2 * u,
        }
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        let u = self.jet(x).value;
        -self.wavenumber * self.wavenumber * self.direction[0] * self.direction[1] * u
    }
}

/// `A · exp(-|x - c|² / width)` in `dim` dimensions.
#[derive(Clone, Copy, Debug)]
pub struct GaussianBump {
    pub centre: Point,
    pub width: f64,
    pub amplitude: C64,
    pub dim: usize,
}

impl GaussianBump {
    pub fn new(dim: usize, centre: Point, width: f64, amplitude: f64) -> Self {
        Self {
            centre,
            width,
            amplitude: C64::new(amplitude, 0.0),
            dim,
        }
    }
}

impl ClosedFormField for GaussianBump {
    fn jet(&self, x: &Point) -> Jet {
        let mut r2 = 0.0;
        let mut diff = [0.0; 3];
        for a in 0..self.dim {
            diff[a] = x[a] - self.centre[a];
            r2 += diff[a] * diff[a];
        }
        let u = self.amplitude * (-r2 / self.width).exp();
        let s = -2.0 / self.width;
        Jet {
            value: u,
            grad: diff.map(|d| u * (s * d)),
            lap: u * (4.0 * r2 / (self.width * self.width) - 2.0 * self.dim as f64 / self.width),
        }
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        if self.dim < 2 {
            return ZERO;
        }
        let u = self.jet(x).value;
        let s = -2.0 / self.width;
        u * (s * s * (x[0] - self.centre[0]) * (x[1] - self.centre[1]))
    }
}

/// Finite sum of exponentials `c₀ + Σ cⱼ exp(i mⱼ x)` in one variable, with
/// complex `mⱼ`.
#[derive(Clone, Debug)]
pub struct ExponentialSum1d {
    pub constant: C64,
    pub terms: Vec<(C64, C64)>,
}

impl ClosedFormField for ExponentialSum1d {
    fn jet(&self, x: &Point) -> Jet {
        let mut jet = Jet {
            value: self.constant,
            ..Jet::ZERO
        };
        for &(c, m) in &self.terms {
            let e = c * (I * m * x[0]).exp();
            jet.value += e;
            jet.grad[0] += I * m * e;
            jet.lap += -(m * m) * e;
        }
        jet
    }
}

/// `a·u + b·v`.
pub struct Combination<'a> {
    pub terms: Vec<(C64, &'a dyn ClosedFormField)>,
}

impl<'a> Combination<'a> {
    pub fn difference(u: &'a dyn ClosedFormField, v: &'a dyn ClosedFormField) -> Self {
        Self {
            terms: vec![(C64::new(1.0, 0.0), u), (C64::new(-1.0, 0.0), v)],
        }
    }
}

impl ClosedFormField for Combination<'_> {
    fn jet(&self, x: &Point) -> Jet {
        self.terms
            .iter()
            .fold(Jet::ZERO, |acc, (c, f)| acc + f.jet(x).scale(*c))
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        self.terms.iter().map(|(c, f)| c * f.mixed_xy(x)).sum()
    }
}

/// Owned sum of boxed fields, used for composite sources.
#[derive(Default)]
pub struct FieldSum {
    pub parts: Vec<Box<dyn ClosedFormField + Send>>,
}

impl std::fmt::Debug for FieldSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSum").field("parts", &self.parts.len()).finish()
    }
}

impl ClosedFormField for FieldSum {
    fn jet(&self, x: &Point) -> Jet {
        self.parts.iter().fold(Jet::ZERO, |acc, f| acc + f.jet(x))
    }

    fn mixed_xy(&self, x: &Point) -> C64 {
        self.parts.iter().map(|f| f.mixed_xy(x)).sum()
    }
}

/// Central-difference check of a field's analytic derivatives: the gradient
/// against differences of the value, the Laplacian against differences of the
/// gradient. Returns the largest relative discrepancy over the points.
pub fn finite_difference_discrepancy(
    field: &dyn ClosedFormField,
    dim: usize,
    points: &[Point],
    step: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for x in points {
        let jet = field.jet(x);
        let scale = jet.value.norm() + jet.grad_norm_sqr().sqrt() + jet.lap.norm() + 1e-300;
        let mut lap_fd = C64::new(0.0, 0.0);
        for a in 0..dim {
            let mut xp = *x;
            let mut xm = *x;
            xp[a] += step;
            xm[a] -= step;
            let jp = field.jet(&xp);
            let jm = field.jet(&xm);
            let g = (jp.value - jm.value) / (2.0 * step);
            worst = worst.max((g - jet.grad[a]).norm() / scale);
            lap_fd += (jp.grad[a] - jm.grad[a]) / (2.0 * step);
        }
        worst = worst.max((lap_fd - jet.lap).norm() / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_points(dim: usize, n: usize) -> Vec<Point> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        (0..n)
            .map(|_| {
                let mut p = [0.0; 3];
                for v in p.iter_mut().take(dim) {
                    *v = rng.random_range(0.1..0.9);
                }
                p
            })
            .collect()
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let pts = random_points(2, 40);
        let poly = Polynomial::new(vec![
            (C64::new(1.0, 0.5), [2, 1, 0]),
            (C64::new(-0.3, 0.0), [0, 4, 0]),
            (C64::new(0.0, 2.0), [1, 0, 0]),
        ]);
        let wave = PlaneWave::new(5.0, [0.6, 0.8, 0.0]);
        let bump = GaussianBump::new(2, [0.5, 0.4, 0.0], 0.1, 2.0);
        for f in [&poly as &dyn ClosedFormField, &wave, &bump] {
            // step 1e-5 * L with L = 1 for the unit square
            let err = finite_difference_discrepancy(f, 2, &pts, 1e-5);
            assert!(err < 1e-6, "discrepancy {err}");
        }
    }

    #[test]
    fn exact_mixed_derivatives_match_default() {
        struct Wrapped<'a>(&'a dyn ClosedFormField);
        impl ClosedFormField for Wrapped<'_> {
            fn jet(&self, x: &Point) -> Jet {
                self.0.jet(x)
            }
        }
        let poly = Polynomial::new(vec![(C64::new(1.0, 0.5), [2, 3, 0])]);
        let wave = PlaneWave::new(5.0, [0.6, 0.8, 0.0]);
        let bump = GaussianBump::new(2, [0.5, 0.4, 0.0], 0.1, 2.0);
        for f in [&poly as &dyn ClosedFormField, &wave, &bump] {
            for x in random_points(2, 10) {
                let exact = f.mixed_xy(&x);
                let fd = Wrapped(f).mixed_xy(&x);
                assert!((exact - fd).norm() < 1e-7 * (1.0 + exact.norm()));
            }
        }
    }

    #[test]
    fn exponential_sum_derivatives() {
        let f = ExponentialSum1d {
            constant: C64::new(0.2, 0.0),
            terms: vec![(C64::new(1.0, -1.0), C64::new(3.0, 0.1))],
        };
        let err = finite_difference_discrepancy(&f, 1, &random_points(1, 20), 1e-5);
        assert!(err < 1e-6);
    }

    #[test]
    fn on_shell_plane_wave_has_zero_helmholtz_residual() {
        let k = 7.0;
        let w = PlaneWave::new(k, [0.0, 1.0, 0.0]);
        for x in random_points(2, 10) {
            assert!(w.jet(&x).helmholtz(k).norm() < 1e-10);
        }
    }
}
