//! Plane-wave features `cos(κ_r d_p·x)` and `sin(κ_r d_p·x)` with their
//! gradients and Laplacians.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveFeatures {
    pub dim: usize,
    pub k: f64,
    pub directions: Vec<Point>,
    /// `κ₀ = k`, then `k(1 + spread·r/R)`.
    pub ring_wavenumbers: Vec<f64>,
}

/// Values, gradients (`dim` per feature, row-major) and Laplacians of all
/// features at one point.
#[derive(Clone, Debug, Default)]
pub struct FeatureJets {
    pub v: Vec<f64>,
    pub g: Vec<f64>,
    pub l: Vec<f64>,
}

/// `P` equispaced directions on the circle in 2D, `±1` in 1D and a Fibonacci
/// set on the sphere in 3D; `R` rings with `κ₀ = k`.
pub fn build_features(dim: usize, p: usize, r: usize, k: f64, spread: f64) -> Result<PlaneWaveFeatures> {
    if p == 0 || r == 0 {
        return Err(Error::InvalidParams("need at least one direction and one ring".into()));
    }
    if !(k > 0.0 && k.is_finite() && spread.is_finite()) {
        return Err(Error::InvalidParams(format!("k = {k}, spread = {spread}")));
    }
    let directions: Vec<Point> = match dim {
        1 => {
            if p > 2 {
                return Err(Error::InvalidParams("1D admits at most two directions".into()));
            }
            (0..p).map(|i| [if i == 0 { 1.0 } else { -1.0 }, 0.0, 0.0]).collect()
        }
        2 => (0..p)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / p as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..p)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / p as f64;
                    let rho = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    [rho * t.cos(), rho * t.sin(), z]
                })
                .collect()
        }
        _ => return Err(Error::InvalidParams(format!("dimension {dim}"))),
    };
    let ring_wavenumbers = (0..r)
        .map(|i| if i == 0 { k } else { k * (1.0 + spread * i as f64 / r as f64) })
        .collect();
    Ok(PlaneWaveFeatures {
        dim,
        k,
        directions,
        ring_wavenumbers,
    })
}

impl PlaneWaveFeatures {
    /// `D = 2PR`.
    pub fn count(&self) -> usize {
        2 * self.directions.len() * self.ring_wavenumbers.len()
    }

    /// Index of the cosine (`sin = false`) or sine feature of ring `r` and
    /// direction `p`.
    pub fn index(&self, r: usize, p: usize, sin: bool) -> usize {
        2 * (r * self.directions.len() + p) + usize::from(sin)
    }

    /// Wavenumber of feature `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.ring_wavenumbers[j / 2 / self.directions.len()]
    }

    /// `κ² - k²` for feature `j`, so that `ℒΦⱼ = (κ² - k²)Φⱼ`.
    pub fn helmholtz_factor(&self, j: usize) -> f64 {
        let kap = self.wavenumber(j);
        kap * kap - self.k * self.k
    }

    pub fn eval(&self, x: &Point) -> FeatureJets {
        let mut out = FeatureJets::default();
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &Point, out: &mut FeatureJets) {
        let d = self.count();
        let dim = self.dim;
        out.v.resize(d, 0.0);
        out.g.resize(d * dim, 0.0);
        out.l.resize(d, 0.0);
        let np = self.directions.len();
        for (r, &kap) in self.ring_wavenumbers.iter().enumerate() {
            for (p, dir) in self.directions.iter().enumerate() {
                let phase: f64 = (0..dim).map(|a| dir[a] * x[a]).sum::<f64>() * kap;
                let (s, c) = phase.sin_cos();
                let j = 2 * (r * np + p);
                out.v[j] = c;
                out.v[j + 1] = s;
                out.l[j] = -kap * kap * c;
                out.l[j + 1] = -kap * kap * s;
                for a in 0..dim {
                    out.g[j * dim + a] = -kap * dir[a] * s;
                    out.g[(j + 1) * dim + a] = kap * dir[a] * c;
                }
            }
        }
    }
}
