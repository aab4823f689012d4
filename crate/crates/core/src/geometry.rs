//! Intervals and axis-aligned boxes, their diameter and star-shape constant,
//! and composite Gauss–Legendre quadrature on the interior and the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Rectangle,
    Box,
}

/// An interval, rectangle or box together with the centre `x₀` used in the
/// Rellich/Morawetz multipliers `x - x₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    bounds: Vec<(f64, f64)>,
    origin: Point,
}

impl Domain {
    /// Box with the multiplier centre at its midpoint.
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > 3 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be 1, 2 or 3 (got {})",
                bounds.len()
            )));
        }
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!(
                    "axis {a}: need lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        let mut origin = [0.0; 3];
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            origin[a] = 0.5 * (lo + hi);
        }
        Ok(Self {
            bounds: bounds.to_vec(),
            origin,
        })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[(lo, hi)])
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0).unwrap()
    }

    pub fn unit_square() -> Self {
        Self::new(&[(0.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    pub fn unit_cube() -> Self {
        Self::new(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    /// Hypercube of side 1 centred at the coordinate origin.
    pub fn centred_unit_box(dim: usize) -> Result<Self> {
        Self::new(&vec![(-0.5, 0.5); dim])
    }

    /// Moves the multiplier centre. Any finite point is accepted; a centre on
    /// or outside the boundary is reported by [`Domain::star_shape_constant`].
    pub fn with_origin(mut self, origin: &[f64]) -> Result<Self> {
        if origin.len() != self.dim() || origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "origin must have {} finite coordinates",
                self.dim()
            )));
        }
        self.origin = [0.0; 3];
        self.origin[..origin.len()].copy_from_slice(origin);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn kind(&self) -> DomainKind {
        match self.dim() {
            1 => DomainKind::Interval,
            2 => DomainKind::Rectangle,
            _ => DomainKind::Box,
        }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.bounds[axis].1 - self.bounds[axis].0
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim()).map(|a| self.extent(a)).product()
    }

    /// Length of the boundary in 2D, area in 3D, and the endpoint count in 1D.
    pub fn boundary_measure(&self) -> f64 {
        match self.dim() {
            1 => 2.0,
            _ => (0..self.dim())
                .map(|a| 2.0 * self.measure() / self.extent(a))
                .sum(),
        }
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.extent(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `L₀ = min over ∂Ω of (x - x₀)·n`: the distance from the centre to the
    /// nearest face plane.
    pub fn star_shape_constant(&self) -> Result<f64> {
        let l0 = self
            .bounds
            .iter()
            .enumerate()
            .map(|(a, &(lo, hi))| (self.origin[a] - lo).min(hi - self.origin[a]))
            .fold(f64::INFINITY, f64::min);
        if l0 <= 0.0 {
            return Err(Error::NonStarShaped(l0));
        }
        Ok(l0)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.bounds
            .iter()
            .enumerate()
            .all(|(a, &(lo, hi))| x[a] >= lo && x[a] <= hi)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Points per axis (`order`) and uniform subcells per axis (`cells`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub order: usize,
    pub cells: usize,
}

impl QuadSpec {
    pub fn new(order: usize, cells: usize) -> Self {
        Self { order, cells }
    }
}

impl From<usize> for QuadSpec {
    fn from(order: usize) -> Self {
        Self { order, cells: 1 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct InteriorQuadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryQuadrature {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Fixed chunk length for reductions; sums are formed per chunk and then
/// combined in chunk order, so results do not depend on the thread count.
pub(crate) const CHUNK: usize = 256;

/// Folds `0..len` in fixed chunks of [`CHUNK`] indices, possibly in parallel,
/// and merges the chunk results in chunk order.
pub(crate) fn chunked_fold<T: Send>(
    len: usize,
    init: impl Fn() -> T + Sync,
    body: impl Fn(&mut T, usize) + Sync,
    mut merge: impl FnMut(&mut T, T),
) -> T {
    use rayon::prelude::*;
    let n_chunks = len.div_ceil(CHUNK);
    let partial: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                body(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partial {
        merge(&mut total, p);
    }
    total
}

pub(crate) fn chunked_sum<const N: usize>(len: usize, term: impl Fn(usize) -> [f64; N] + Sync) -> [f64; N] {
    use rayon::prelude::*;
    let n_chunks = len.div_ceil(CHUNK);
    let partial: Vec<[f64; N]> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; N];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                let t = term(i);
                for j in 0..N {
                    acc[j] += t[j];
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; N];
    for p in partial {
        for j in 0..N {
            total[j] += p[j];
        }
    }
    total
}

impl InteriorQuadrature {
    /// Weighted sum of a vector-valued integrand.
    pub fn integrate<const N: usize>(&self, f: impl Fn(&Point) -> [f64; N] + Sync) -> [f64; N] {
        chunked_sum(self.points.len(), |i| {
            let v = f(&self.points[i]);
            v.map(|x| x * self.weights[i])
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl BoundaryQuadrature {
    /// Weighted sum of a vector-valued integrand of position and outward normal.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(&Point, &Point) -> [f64; N] + Sync,
    ) -> [f64; N] {
        chunked_sum(self.points.len(), |i| {
            let v = f(&self.points[i], &self.normals[i]);
            v.map(|x| x * self.weights[i])
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Interior and boundary rules for one domain.
#[derive(Clone, Debug)]
pub struct Quadratures {
    pub interior: InteriorQuadrature,
    pub boundary: BoundaryQuadrature,
}

impl Quadratures {
    pub fn new(domain: &Domain, spec: impl Into<QuadSpec>) -> Self {
        let spec = spec.into();
        Self {
            interior: interior_quadrature(domain, spec),
            boundary: boundary_quadrature(domain, spec),
        }
    }
}

fn composite_axis(lo: f64, hi: f64, spec: QuadSpec) -> (Vec<f64>, Vec<f64>) {
    let cells = spec.cells.max(1);
    let h = (hi - lo) / cells as f64;
    let mut xs = Vec::with_capacity(cells * spec.order);
    let mut ws = Vec::with_capacity(cells * spec.order);
    for c in 0..cells {
        let a = lo + c as f64 * h;
        let b = if c + 1 == cells { hi } else { a + h };
        let (x, w) = gauss_legendre_on(spec.order, a, b);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

fn tensor(axes: &[(Vec<f64>, Vec<f64>)], fixed: Option<(usize, f64)>) -> (Vec<Point>, Vec<f64>) {
    let mut points = vec![[0.0; 3]];
    let mut weights = vec![1.0];
    let dim = axes.len() + usize::from(fixed.is_some());
    let mut free = axes.iter();
    for a in 0..dim {
        if let Some((fa, v)) = fixed {
            if fa == a {
                for p in &mut points {
                    p[a] = v;
                }
                continue;
            }
        }
        let (xs, ws) = free.next().unwrap();
        let mut np = Vec::with_capacity(points.len() * xs.len());
        let mut nw = Vec::with_capacity(points.len() * xs.len());
        for (p, w) in points.iter().zip(&weights) {
            for (x, wx) in xs.iter().zip(ws) {
                let mut q = *p;
                q[a] = *x;
                np.push(q);
                nw.push(w * wx);
            }
        }
        points = np;
        weights = nw;
    }
    (points, weights)
}

pub fn interior_quadrature(domain: &Domain, spec: impl Into<QuadSpec>) -> InteriorQuadrature {
    let spec = spec.into();
    let axes: Vec<_> = domain
        .bounds()
        .iter()
        .map(|&(lo, hi)| composite_axis(lo, hi, spec))
        .collect();
    let (points, weights) = tensor(&axes, None);
    InteriorQuadrature { points, weights }
}

/// Per-face Gauss–Legendre rule with constant outward normals. In 1D the
/// boundary is the two endpoints with unit weight.
pub fn boundary_quadrature(domain: &Domain, spec: impl Into<QuadSpec>) -> BoundaryQuadrature {
    let spec = spec.into();
    let dim = domain.dim();
    let mut q = BoundaryQuadrature::default();
    for a in 0..dim {
        let (lo, hi) = domain.bounds()[a];
        for (value, sign) in [(lo, -1.0), (hi, 1.0)] {
            let axes: Vec<_> = (0..dim)
                .filter(|&b| b != a)
                .map(|b| composite_axis(domain.bounds()[b].0, domain.bounds()[b].1, spec))
                .collect();
            let (points, weights) = tensor(&axes, Some((a, value)));
            let mut n = [0.0; 3];
            n[a] = sign;
            q.normals.extend(std::iter::repeat_n(n, points.len()));
            q.points.extend(points);
            q.weights.extend(weights);
        }
    }
    q
}
