//! The Monte-Carlo energy `Ĵ` and its exact gradient with respect to the
//! network parameters.

use serde::{Deserialize, Serialize};

use super::model::{OutputJet, PlaneWaveModel, Tape, TrainMask};
use super::sampling::Samples;
use crate::field::{SourceField, C64};
use crate::geometry::chunked_fold;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    pub k: f64,
    pub gamma1: f64,
    pub gamma_bnd: f64,
    /// Weight of the physical bulk and source terms; `0` leaves the pure
    /// least-squares residual objective.
    #[serde(default = "one")]
    pub physical: f64,
}

impl ObjectiveWeights {
    pub fn new(k: f64, gamma1: f64, gamma_bnd: f64) -> Self {
        Self {
            k,
            gamma1,
            gamma_bnd,
            physical: 1.0,
        }
    }
}

/// Sample estimate of the weak-BC energy, measure-weighted so that it
/// converges to the integral form. `value` is the sum of the four terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Standard error of `value` from the sample variances.
    pub std_error: f64,
    /// `γ₁|Ω| mean|ℒu - f|²`.
    pub residual: f64,
    /// `γ_bnd|∂Ω| mean|∂ₙu - iku|²`.
    pub boundary: f64,
    /// `½|Ω| mean(|∇u|² - k²|u|²)`, times the physical weight.
    pub bulk: f64,
    /// `-|Ω| mean Re(f ū)`, times the physical weight.
    pub source: f64,
    /// `mean|ℒu - f|²`.
    pub mean_sq_residual: f64,
}

/// Interior sample: per-sample objective density, its parts, and the
/// derivative with respect to the output jets scaled by `scale`.
fn interior_density(o: &OutputJet, f: C64, w: &ObjectiveWeights, scale: f64, dout: Option<&mut [f64]>) -> [f64; 3] {
    let dim = o.dim;
    let jl = dim + 2;
    let k2 = w.k * w.k;
    let fc = [f.re, f.im];
    let mut res = 0.0;
    let mut bulk = 0.0;
    let mut src = 0.0;
    let mut rho = [0.0; 2];
    for c in 0..2 {
        rho[c] = -o.lap(c) - k2 * o.value(c) - fc[c];
        res += rho[c] * rho[c];
        let g2: f64 = (0..dim).map(|a| o.grad(c, a).powi(2)).sum();
        bulk += 0.5 * (g2 - k2 * o.value(c).powi(2));
        src -= fc[c] * o.value(c);
    }
    if let Some(d) = dout {
        for c in 0..2 {
            let base = c * jl;
            let r = 2.0 * w.gamma1 * rho[c];
            d[base] = scale * (-k2 * r + w.physical * (-k2 * o.value(c) - fc[c]));
            for a in 0..dim {
                d[base + 1 + a] = scale * w.physical * o.grad(c, a);
            }
            d[base + dim + 1] = scale * (-r);
        }
    }
    [res, bulk, src]
}

/// Boundary sample: `|∂ₙu - iku|²` and its output-jet derivative.
fn boundary_density(o: &OutputJet, n: &[f64; 3], k: f64, scale: f64, dout: Option<&mut [f64]>) -> f64 {
    let dim = o.dim;
    let jl = dim + 2;
    let dn = |c: usize| (0..dim).map(|a| o.grad(c, a) * n[a]).sum::<f64>();
    let qr = dn(0) + k * o.value(1);
    let qi = dn(1) - k * o.value(0);
    if let Some(d) = dout {
        d.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..dim {
            d[1 + a] = scale * 2.0 * qr * n[a];
            d[jl + 1 + a] = scale * 2.0 * qi * n[a];
        }
        d[jl] = scale * 2.0 * qr * k;
        d[0] = -scale * 2.0 * qi * k;
    }
    qr * qr + qi * qi
}

struct Acc {
    sums: [f64; 5],
    grad: Vec<f64>,
}

fn evaluate(
    model: &PlaneWaveModel,
    f: &dyn SourceField,
    w: &ObjectiveWeights,
    samples: &Samples,
    mask: Option<TrainMask>,
) -> (McEstimate, Option<Vec<f64>>) {
    let np = model.layout.total();
    let jl = model.dim() + 2;
    let want = mask.is_some();
    let mask = mask.unwrap_or(TrainMask::ALL);
    let n_int = samples.interior.len();
    let n_bnd = samples.boundary.len();
    let init = || Acc {
        sums: [0.0; 5],
        grad: if want { vec![0.0; np] } else { Vec::new() },
    };
    let merge = |a: &mut Acc, b: Acc| {
        for i in 0..5 {
            a.sums[i] += b.sums[i];
        }
        for (x, y) in a.grad.iter_mut().zip(b.grad) {
            *x += y;
        }
    };
    let s_int = if n_int > 0 { samples.interior_measure / n_int as f64 } else { 0.0 };
    let s_bnd = if n_bnd > 0 { samples.boundary_measure / n_bnd as f64 } else { 0.0 };
    let interior = chunked_fold(
        n_int,
        init,
        |acc, i| {
            let x = &samples.interior[i];
            let mut tape = Tape::default();
            let o = model.forward(x, &mut tape);
            let mut dout = vec![0.0; 2 * jl];
            let [res, bulk, src] =
                interior_density(&o, f.value(x), w, s_int, want.then_some(dout.as_mut_slice()));
            let c = w.gamma1 * res + w.physical * (bulk + src);
            acc.sums[0] += c;
            acc.sums[1] += c * c;
            acc.sums[2] += res;
            acc.sums[3] += bulk;
            acc.sums[4] += src;
            if want {
                model.backward(&tape, &dout, mask, &mut acc.grad);
            }
        },
        merge,
    );
    let boundary = chunked_fold(
        n_bnd,
        init,
        |acc, i| {
            let (x, n) = &samples.boundary[i];
            let mut tape = Tape::default();
            let o = model.forward(x, &mut tape);
            let mut dout = vec![0.0; 2 * jl];
            let q = boundary_density(&o, n, w.k, w.gamma_bnd * s_bnd, want.then_some(dout.as_mut_slice()));
            acc.sums[0] += q;
            acc.sums[1] += q * q;
            if want {
                model.backward(&tape, &dout, mask, &mut acc.grad);
            }
        },
        merge,
    );
    let variance = |sum: f64, sq: f64, n: usize| {
        if n > 1 {
            ((sq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0)
        } else {
            0.0
        }
    };
    let mean = |sum: f64, n: usize| if n > 0 { sum / n as f64 } else { 0.0 };
    let om = samples.interior_measure;
    let bm = samples.boundary_measure;
    let residual = w.gamma1 * om * mean(interior.sums[2], n_int);
    let bulk = w.physical * om * mean(interior.sums[3], n_int);
    let source = w.physical * om * mean(interior.sums[4], n_int);
    let bnd = w.gamma_bnd * bm * mean(boundary.sums[0], n_bnd);
    let mut var = 0.0;
    if n_int > 0 {
        var += om * om * variance(interior.sums[0], interior.sums[1], n_int) / n_int as f64;
    }
    if n_bnd > 0 {
        let g = w.gamma_bnd * bm;
        var += g * g * variance(boundary.sums[0], boundary.sums[1], n_bnd) / n_bnd as f64;
    }
    let est = McEstimate {
        value: residual + bnd + bulk + source,
        std_error: var.sqrt(),
        residual,
        boundary: bnd,
        bulk,
        source,
        mean_sq_residual: mean(interior.sums[2], n_int),
    };
    let grad = want.then(|| {
        let mut g = interior.grad;
        for (a, b) in g.iter_mut().zip(boundary.grad) {
            *a += b;
        }
        mask.apply(&model.layout, &mut g);
        g
    });
    (est, grad)
}

pub fn mc_objective(model: &PlaneWaveModel, f: &dyn SourceField, w: &ObjectiveWeights, samples: &Samples) -> McEstimate {
    evaluate(model, f, w, samples, None).0
}

/// Objective and its gradient with respect to the flat parameter vector;
/// entries outside `mask` are zero.
pub fn gradient(
    model: &PlaneWaveModel,
    f: &dyn SourceField,
    w: &ObjectiveWeights,
    samples: &Samples,
    mask: TrainMask,
) -> (McEstimate, Vec<f64>) {
    let (e, g) = evaluate(model, f, w, samples, Some(mask));
    (e, g.expect("gradient requested"))
}
