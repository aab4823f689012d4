//! Least-squares initialisation of the linear plane-wave coefficients from
//! streamed normal equations.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::PlaneWaveFeatures;
use super::sampling::{draw_samples, Samples};
use crate::error::{Error, Result};
use crate::field::SourceField;
use crate::geometry::{chunked_fold, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Ridge {
    Absolute(f64),
    /// Multiple of the mean diagonal entry of the normal matrix.
    Relative(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Relative(1e-8)
    }
}

/// Normal matrix and right-hand side of the unregularised problem in the
/// unknowns `θ = vec(W)` (row-major `D × 2`).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalEquations {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// `Σ |target|²`, so that the objective is `θᵀNθ - 2θᵀb + c`.
    pub constant: f64,
}

impl NormalEquations {
    pub fn ridge_value(&self, ridge: Ridge) -> f64 {
        match ridge {
            Ridge::Absolute(r) => r,
            Ridge::Relative(r) => r * self.matrix.trace() / self.matrix.nrows() as f64,
        }
    }

    /// Gradient `2((N + ρI)θ - b)` of the regularised objective.
    pub fn gradient(&self, theta: &[f64], ridge: f64) -> Vec<f64> {
        let t = DVector::from_column_slice(theta);
        let g = (&self.matrix * &t + ridge * &t - &self.rhs) * 2.0;
        g.as_slice().to_vec()
    }

    /// Minimiser of the ridge-regularised objective by Cholesky.
    pub fn solve(&self, ridge: f64) -> Result<Vec<f64>> {
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::InvalidParams(format!("ridge must be positive (got {ridge})")));
        }
        let n = self.matrix.nrows();
        let a = &self.matrix + DMatrix::<f64>::identity(n, n) * ridge;
        let chol = a.cholesky().ok_or(Error::SingularSystem)?;
        let x = chol.solve(&self.rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok(x.as_slice().to_vec())
    }
}

/// Rows of the least-squares problem at one sample, each with its target,
/// already multiplied by the square root of its weight. Unknown `(j, c)`
/// sits at `2j + c`.
pub fn sample_rows(
    features: &PlaneWaveFeatures,
    f: &dyn SourceField,
    k: f64,
    boundary_weight: f64,
    samples: &Samples,
    index: usize,
) -> Vec<(Vec<f64>, f64)> {
    let d = features.count();
    let n_int = samples.interior.len();
    if index < n_int {
        let x = &samples.interior[index];
        let jets = features.eval(x);
        let fx = f.value(x);
        let mut re = vec![0.0; 2 * d];
        let mut im = vec![0.0; 2 * d];
        for j in 0..d {
            let lphi = features.helmholtz_factor(j) * jets.v[j];
            re[2 * j] = lphi;
            im[2 * j + 1] = lphi;
        }
        vec![(re, fx.re), (im, fx.im)]
    } else {
        let (x, n) = &samples.boundary[index - n_int];
        let jets = features.eval(x);
        let dim = features.dim;
        let s = boundary_weight.sqrt();
        let mut r1 = vec![0.0; 2 * d];
        let mut r2 = vec![0.0; 2 * d];
        for j in 0..d {
            let dn: f64 = (0..dim).map(|a| jets.g[j * dim + a] * n[a]).sum();
            r1[2 * j] = s * dn;
            r1[2 * j + 1] = s * k * jets.v[j];
            r2[2 * j] = -s * k * jets.v[j];
            r2[2 * j + 1] = s * dn;
        }
        vec![(r1, 0.0), (r2, 0.0)]
    }
}

/// Accumulates `Σ aaᵀ` and `Σ a·t` over interior and boundary samples one row
/// at a time, in fixed chunks merged in order.
pub fn normal_equations(
    features: &PlaneWaveFeatures,
    f: &dyn SourceField,
    k: f64,
    boundary_weight: f64,
    samples: &Samples,
) -> NormalEquations {
    let n = 2 * features.count();
    let total = samples.interior.len() + samples.boundary.len();
    let (mut upper, rhs, constant) = chunked_fold(
        total,
        || (vec![0.0; n * n], vec![0.0; n], 0.0),
        |acc, i| {
            for (a, t) in sample_rows(features, f, k, boundary_weight, samples, i) {
                let nz: Vec<usize> = (0..n).filter(|&p| a[p] != 0.0).collect();
                for (ip, &p) in nz.iter().enumerate() {
                    let ap = a[p];
                    let row = &mut acc.0[p * n..(p + 1) * n];
                    for &q in &nz[ip..] {
                        row[q] += ap * a[q];
                    }
                    acc.1[p] += ap * t;
                }
                acc.2 += t * t;
            }
        },
        |a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                *x += y;
            }
            for (x, y) in a.1.iter_mut().zip(b.1) {
                *x += y;
            }
            a.2 += b.2;
        },
    );
    for p in 0..n {
        for q in 0..p {
            upper[p * n + q] = upper[q * n + p];
        }
    }
    NormalEquations {
        matrix: DMatrix::from_row_slice(n, n, &upper),
        rhs: DVector::from_vec(rhs),
        constant,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LsInitConfig {
    /// Weight of the boundary rows, `ϖ/h`.
    pub boundary_weight: f64,
    #[serde(default)]
    pub ridge: Ridge,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LsInit {
    /// Row-major `D × 2`.
    pub w: Vec<f64>,
    pub ridge: f64,
    pub system: NormalEquations,
    pub samples: Samples,
}

/// `W` minimising `Σ|ℒ(ΦW) - f|² + (ϖ/h)Σ|∂ₙ(ΦW) - ikΦW|² + ρ‖W‖²_F` over
/// seeded samples.
pub fn ls_init(
    features: &PlaneWaveFeatures,
    f: &dyn SourceField,
    domain: &Domain,
    k: f64,
    cfg: &LsInitConfig,
) -> Result<LsInit> {
    if domain.dim() != features.dim {
        return Err(Error::InvalidDomain(format!(
            "features are {}D, domain is {}D",
            features.dim,
            domain.dim()
        )));
    }
    if !(cfg.boundary_weight >= 0.0 && cfg.boundary_weight.is_finite()) {
        return Err(Error::InvalidParams(format!("boundary weight {}", cfg.boundary_weight)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = draw_samples(domain, cfg.n_interior, cfg.n_boundary, &mut rng);
    let system = normal_equations(features, f, k, cfg.boundary_weight, &samples);
    let ridge = system.ridge_value(cfg.ridge);
    let w = system.solve(ridge)?;
    Ok(LsInit {
        w,
        ridge,
        system,
        samples,
    })
}

/// Default boundary weight `ϖ/h` with `h` the mean interior sample spacing
/// `(|Ω|/N)^{1/dim}`.
pub fn default_boundary_weight(domain: &Domain, varpi: f64, n_interior: usize) -> f64 {
    let h = (domain.measure() / n_interior.max(1) as f64).powf(1.0 / domain.dim() as f64);
    varpi / h
}
