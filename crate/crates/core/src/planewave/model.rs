//! The plane-wave network `u(x) = Φ(x)W + ℳ(Φ(x) ⊙ g(x))` with
//! `g(x) = 1 + α_g tanh(G₂σ(G₁x + c₁) + c₂)` and `ℳ(z) = M₂σ(M₁z + b₁) + b₂`,
//! `σ` the SiLU. Every intermediate carries a jet (value, spatial gradient,
//! Laplacian) so that `ℒu` is exact; the reverse pass differentiates the jets
//! with respect to all parameters.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::features::PlaneWaveFeatures;
use crate::error::{Error, Result};
use crate::field::{ClosedFormField, Jet, Point, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub h_g: usize,
    pub h_m: usize,
    pub alpha_g: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            h_g: 32,
            h_m: 64,
            alpha_g: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    W,
    G1,
    C1,
    G2,
    C2,
    M1,
    B1,
    M2,
    B2,
}

impl Block {
    pub const ALL: [Block; 9] = [
        Block::W,
        Block::G1,
        Block::C1,
        Block::G2,
        Block::C2,
        Block::M1,
        Block::B1,
        Block::M2,
        Block::B2,
    ];
}

/// Offsets of the parameter blocks in the flat parameter vector. Matrices are
/// row-major: `W` is `D × 2`, `G₁` is `h_g × dim`, `G₂` is `D × h_g`, `M₁` is
/// `h_m × D` and `M₂` is `2 × h_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub dim: usize,
    pub d: usize,
    pub h_g: usize,
    pub h_m: usize,
    offsets: [usize; 10],
}

impl Layout {
    pub fn new(dim: usize, d: usize, h_g: usize, h_m: usize) -> Self {
        let sizes = [d * 2, h_g * dim, h_g, d * h_g, d, h_m * d, h_m, 2 * h_m, 2];
        let mut offsets = [0; 10];
        for (i, s) in sizes.iter().enumerate() {
            offsets[i + 1] = offsets[i] + s;
        }
        Self {
            dim,
            d,
            h_g,
            h_m,
            offsets,
        }
    }

    pub fn range(&self, b: Block) -> Range<usize> {
        let i = b as usize;
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn total(&self) -> usize {
        self.offsets[9]
    }
}

/// Which parameter groups a training stage may change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainMask {
    /// `W`.
    pub linear: bool,
    /// `G₁, c₁, G₂, c₂`.
    pub gain: bool,
    /// `M₁, b₁, M₂, b₂`.
    pub mixer: bool,
}

impl TrainMask {
    pub const ALL: TrainMask = TrainMask {
        linear: true,
        gain: true,
        mixer: true,
    };
    pub const LINEAR: TrainMask = TrainMask {
        linear: true,
        gain: false,
        mixer: false,
    };
    pub const MIXER: TrainMask = TrainMask {
        linear: false,
        gain: false,
        mixer: true,
    };

    pub fn contains(&self, b: Block) -> bool {
        match b {
            Block::W => self.linear,
            Block::G1 | Block::C1 | Block::G2 | Block::C2 => self.gain,
            Block::M1 | Block::B1 | Block::M2 | Block::B2 => self.mixer,
        }
    }

    /// Zeroes the entries of `v` outside the mask.
    pub fn apply(&self, layout: &Layout, v: &mut [f64]) {
        for b in Block::ALL {
            if !self.contains(b) {
                v[layout.range(b)].iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveModel {
    pub features: PlaneWaveFeatures,
    pub net: NetConfig,
    pub layout: Layout,
    pub params: Vec<f64>,
}

/// `(u_R, u_I)` as jets: component `c` occupies `[c·J, (c+1)·J)` with
/// `J = dim + 2` laid out as value, gradient, Laplacian.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputJet {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl OutputJet {
    pub fn value(&self, c: usize) -> f64 {
        self.data[c * (self.dim + 2)]
    }

    pub fn grad(&self, c: usize, a: usize) -> f64 {
        self.data[c * (self.dim + 2) + 1 + a]
    }

    pub fn lap(&self, c: usize) -> f64 {
        self.data[c * (self.dim + 2) + self.dim + 1]
    }

    pub fn to_jet(&self) -> Jet {
        let mut grad = [C64::new(0.0, 0.0); 3];
        for (a, g) in grad.iter_mut().enumerate().take(self.dim) {
            *g = C64::new(self.grad(0, a), self.grad(1, a));
        }
        Jet {
            value: C64::new(self.value(0), self.value(1)),
            grad,
            lap: C64::new(self.lap(0), self.lap(1)),
        }
    }
}

/// Intermediate jets of one forward pass, kept for the reverse pass.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    x: Point,
    a1: Vec<f64>,
    s1: Vec<f64>,
    d1: Vec<[f64; 3]>,
    a2: Vec<f64>,
    d2: Vec<[f64; 3]>,
    gain: Vec<f64>,
    phi: Vec<f64>,
    z: Vec<f64>,
    a3: Vec<f64>,
    s3: Vec<f64>,
    d3: Vec<[f64; 3]>,
}

fn silu(a: f64) -> (f64, [f64; 3]) {
    let s = 1.0 / (1.0 + (-a).exp());
    let q = s * (1.0 - s);
    let t = 2.0 + a * (1.0 - 2.0 * s);
    let d1 = s * (1.0 + a * (1.0 - s));
    let d2 = q * t;
    let d3 = q * (1.0 - 2.0 * s) * t + q * ((1.0 - 2.0 * s) - 2.0 * a * q);
    (a * s, [d1, d2, d3])
}

fn tanh_derivs(a: f64) -> (f64, [f64; 3]) {
    let t = a.tanh();
    let d1 = 1.0 - t * t;
    (t, [d1, -2.0 * t * d1, d1 * (6.0 * t * t - 2.0)])
}

/// Applies a scalar function to each jet of `a` (length `n·J`).
fn act_forward(a: &[f64], dim: usize, f: fn(f64) -> (f64, [f64; 3]), y: &mut Vec<f64>, d: &mut Vec<[f64; 3]>) {
    let jl = dim + 2;
    let n = a.len() / jl;
    y.resize(a.len(), 0.0);
    d.resize(n, [0.0; 3]);
    for i in 0..n {
        let aj = &a[i * jl..(i + 1) * jl];
        let (v, ds) = f(aj[0]);
        let g2: f64 = aj[1..=dim].iter().map(|g| g * g).sum();
        let yj = &mut y[i * jl..(i + 1) * jl];
        yj[0] = v;
        for k in 1..=dim {
            yj[k] = ds[0] * aj[k];
        }
        yj[dim + 1] = ds[1] * g2 + ds[0] * aj[dim + 1];
        d[i] = ds;
    }
}

/// Reverse of [`act_forward`]: maps the adjoint of the output jets to the
/// adjoint of the input jets.
fn act_backward(ybar: &[f64], a: &[f64], d: &[[f64; 3]], dim: usize) -> Vec<f64> {
    let jl = dim + 2;
    let mut abar = vec![0.0; a.len()];
    for (i, ds) in d.iter().enumerate() {
        let aj = &a[i * jl..(i + 1) * jl];
        let yb = &ybar[i * jl..(i + 1) * jl];
        let out = &mut abar[i * jl..(i + 1) * jl];
        let mut g2 = 0.0;
        let mut ygag = 0.0;
        for k in 1..=dim {
            g2 += aj[k] * aj[k];
            ygag += yb[k] * aj[k];
        }
        let yl = yb[dim + 1];
        out[0] = yb[0] * ds[0] + ygag * ds[1] + yl * (ds[2] * g2 + ds[1] * aj[dim + 1]);
        for k in 1..=dim {
            out[k] = yb[k] * ds[0] + 2.0 * yl * ds[1] * aj[k];
        }
        out[dim + 1] = yl * ds[0];
    }
    abar
}

/// `y = A x` on jets, `A` row-major `m × n`, `x` of length `n·J`.
fn linear_jets(a: &[f64], m: usize, n: usize, x: &[f64], jl: usize, y: &mut Vec<f64>) {
    y.clear();
    y.resize(m * jl, 0.0);
    for i in 0..m {
        let row = &a[i * n..(i + 1) * n];
        let yi = &mut y[i * jl..(i + 1) * jl];
        for (j, &aij) in row.iter().enumerate() {
            if aij == 0.0 {
                continue;
            }
            let xj = &x[j * jl..(j + 1) * jl];
            for k in 0..jl {
                yi[k] += aij * xj[k];
            }
        }
    }
}

/// Adjoint of [`linear_jets`]: accumulates `Ā += ȳ·xᵀ` summed over jet
/// components into `abar` and returns `x̄ = Aᵀȳ`.
fn linear_jets_backward(
    a: &[f64],
    m: usize,
    n: usize,
    x: &[f64],
    ybar: &[f64],
    jl: usize,
    abar: &mut [f64],
    want_xbar: bool,
) -> Vec<f64> {
    let mut xbar = if want_xbar { vec![0.0; n * jl] } else { Vec::new() };
    for i in 0..m {
        let yi = &ybar[i * jl..(i + 1) * jl];
        if yi.iter().all(|&v| v == 0.0) {
            continue;
        }
        let arow = &mut abar[i * n..(i + 1) * n];
        for j in 0..n {
            let xj = &x[j * jl..(j + 1) * jl];
            let mut dot = 0.0;
            for k in 0..jl {
                dot += yi[k] * xj[k];
            }
            arow[j] += dot;
        }
        if want_xbar {
            let row = &a[i * n..(i + 1) * n];
            for (j, &aij) in row.iter().enumerate() {
                let xb = &mut xbar[j * jl..(j + 1) * jl];
                for k in 0..jl {
                    xb[k] += aij * yi[k];
                }
            }
        }
    }
    xbar
}

impl PlaneWaveModel {
    /// Random gain and mixer weights (scaled normal, seeded), zero biases,
    /// `W = 0` and `M₂ = 0`, so the initial field vanishes and `‖g - 1‖∞ ≤ α_g`.
    pub fn new(features: PlaneWaveFeatures, net: NetConfig, seed: u64) -> Result<Self> {
        if net.h_g == 0 || net.h_m == 0 || !(net.alpha_g >= 0.0 && net.alpha_g.is_finite()) {
            return Err(Error::InvalidParams(format!("net configuration {net:?}")));
        }
        let layout = Layout::new(features.dim, features.count(), net.h_g, net.h_m);
        let mut params = vec![0.0; layout.total()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |r: Range<usize>, fan_in: usize, params: &mut Vec<f64>| {
            let dist = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt()).unwrap();
            for p in &mut params[r] {
                *p = dist.sample(&mut rng);
            }
        };
        fill(layout.range(Block::G1), features.dim, &mut params);
        fill(layout.range(Block::G2), net.h_g, &mut params);
        fill(layout.range(Block::M1), layout.d, &mut params);
        Ok(Self {
            features,
            net,
            layout,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn block(&self, b: Block) -> &[f64] {
        &self.params[self.layout.range(b)]
    }

    pub fn block_mut(&mut self, b: Block) -> &mut [f64] {
        let r = self.layout.range(b);
        &mut self.params[r]
    }

    /// Gains `g(x)` (values only).
    pub fn gains(&self, x: &Point) -> Vec<f64> {
        let mut tape = Tape::default();
        self.forward(x, &mut tape);
        let jl = self.dim() + 2;
        (0..self.layout.d).map(|j| tape.gain[j * jl]).collect()
    }

    pub fn eval(&self, x: &Point) -> OutputJet {
        let mut tape = Tape::default();
        self.forward(x, &mut tape)
    }

    pub fn forward(&self, x: &Point, t: &mut Tape) -> OutputJet {
        let ly = &self.layout;
        let (dim, d, hg, hm) = (ly.dim, ly.d, ly.h_g, ly.h_m);
        let jl = dim + 2;
        t.x = *x;
        let g1 = self.block(Block::G1);
        let c1 = self.block(Block::C1);
        t.a1.clear();
        t.a1.resize(hg * jl, 0.0);
        for i in 0..hg {
            let aj = &mut t.a1[i * jl..(i + 1) * jl];
            aj[0] = c1[i] + (0..dim).map(|a| g1[i * dim + a] * x[a]).sum::<f64>();
            aj[1..=dim].copy_from_slice(&g1[i * dim..(i + 1) * dim]);
        }
        act_forward(&t.a1, dim, silu, &mut t.s1, &mut t.d1);
        linear_jets(self.block(Block::G2), d, hg, &t.s1, jl, &mut t.a2);
        for (j, c) in self.block(Block::C2).iter().enumerate() {
            t.a2[j * jl] += c;
        }
        let mut th = Vec::new();
        act_forward(&t.a2, dim, tanh_derivs, &mut th, &mut t.d2);
        let alpha = self.net.alpha_g;
        t.gain = th.iter().map(|v| alpha * v).collect();
        for j in 0..d {
            t.gain[j * jl] += 1.0;
        }
        let fj = self.features.eval(x);
        t.phi.clear();
        t.phi.resize(d * jl, 0.0);
        for j in 0..d {
            let p = &mut t.phi[j * jl..(j + 1) * jl];
            p[0] = fj.v[j];
            p[1..=dim].copy_from_slice(&fj.g[j * dim..(j + 1) * dim]);
            p[dim + 1] = fj.l[j];
        }
        t.z.clear();
        t.z.resize(d * jl, 0.0);
        for j in 0..d {
            let p = &t.phi[j * jl..(j + 1) * jl];
            let g = &t.gain[j * jl..(j + 1) * jl];
            let z = &mut t.z[j * jl..(j + 1) * jl];
            z[0] = p[0] * g[0];
            let mut cross = 0.0;
            for a in 1..=dim {
                z[a] = p[a] * g[0] + p[0] * g[a];
                cross += p[a] * g[a];
            }
            z[dim + 1] = p[dim + 1] * g[0] + 2.0 * cross + p[0] * g[dim + 1];
        }
        linear_jets(self.block(Block::M1), hm, d, &t.z, jl, &mut t.a3);
        for (i, b) in self.block(Block::B1).iter().enumerate() {
            t.a3[i * jl] += b;
        }
        act_forward(&t.a3, dim, silu, &mut t.s3, &mut t.d3);
        let mut out = Vec::new();
        linear_jets(self.block(Block::M2), 2, hm, &t.s3, jl, &mut out);
        let w = self.block(Block::W);
        for j in 0..d {
            let p = &t.phi[j * jl..(j + 1) * jl];
            for c in 0..2 {
                let wjc = w[j * 2 + c];
                if wjc != 0.0 {
                    for k in 0..jl {
                        out[c * jl + k] += wjc * p[k];
                    }
                }
            }
        }
        let b2 = self.block(Block::B2);
        out[0] += b2[0];
        out[jl] += b2[1];
        OutputJet { dim, data: out }
    }

    /// Accumulates into `grad` the parameter gradient of a scalar whose
    /// derivative with respect to the output jets is `dout` (same layout as
    /// [`OutputJet::data`]). Blocks outside `mask` are skipped where possible
    /// and left untouched.
    pub fn backward(&self, t: &Tape, dout: &[f64], mask: TrainMask, grad: &mut [f64]) {
        let ly = &self.layout;
        let (dim, d, hg, hm) = (ly.dim, ly.d, ly.h_g, ly.h_m);
        let jl = dim + 2;
        if mask.linear {
            let gw = &mut grad[ly.range(Block::W)];
            for j in 0..d {
                let p = &t.phi[j * jl..(j + 1) * jl];
                for c in 0..2 {
                    let oc = &dout[c * jl..(c + 1) * jl];
                    gw[j * 2 + c] += (0..jl).map(|k| oc[k] * p[k]).sum::<f64>();
                }
            }
        }
        if !(mask.mixer || mask.gain) {
            return;
        }
        let mut m2bar = vec![0.0; 2 * hm];
        let s3bar = linear_jets_backward(self.block(Block::M2), 2, hm, &t.s3, dout, jl, &mut m2bar, true);
        if mask.mixer {
            add_into(&mut grad[ly.range(Block::M2)], &m2bar);
            let gb2 = &mut grad[ly.range(Block::B2)];
            gb2[0] += dout[0];
            gb2[1] += dout[jl];
        }
        let a3bar = act_backward(&s3bar, &t.a3, &t.d3, dim);
        let mut m1bar = vec![0.0; hm * d];
        let zbar = linear_jets_backward(self.block(Block::M1), hm, d, &t.z, &a3bar, jl, &mut m1bar, mask.gain);
        if mask.mixer {
            add_into(&mut grad[ly.range(Block::M1)], &m1bar);
            let gb1 = &mut grad[ly.range(Block::B1)];
            for i in 0..hm {
                gb1[i] += a3bar[i * jl];
            }
        }
        if !mask.gain {
            return;
        }
        let alpha = self.net.alpha_g;
        let mut tbar = vec![0.0; d * jl];
        for j in 0..d {
            let p = &t.phi[j * jl..(j + 1) * jl];
            let zb = &zbar[j * jl..(j + 1) * jl];
            let gb = &mut tbar[j * jl..(j + 1) * jl];
            let zl = zb[dim + 1];
            let mut v = zb[0] * p[0] + zl * p[dim + 1];
            for a in 1..=dim {
                v += zb[a] * p[a];
                gb[a] = alpha * (zb[a] * p[0] + 2.0 * zl * p[a]);
            }
            gb[0] = alpha * v;
            gb[dim + 1] = alpha * zl * p[0];
        }
        let a2bar = act_backward(&tbar, &t.a2, &t.d2, dim);
        let gc2 = &mut grad[ly.range(Block::C2)];
        for j in 0..d {
            gc2[j] += a2bar[j * jl];
        }
        let mut g2bar = vec![0.0; d * hg];
        let s1bar = linear_jets_backward(self.block(Block::G2), d, hg, &t.s1, &a2bar, jl, &mut g2bar, true);
        add_into(&mut grad[ly.range(Block::G2)], &g2bar);
        let a1bar = act_backward(&s1bar, &t.a1, &t.d1, dim);
        let r1 = ly.range(Block::G1);
        let rc1 = ly.range(Block::C1);
        for i in 0..hg {
            let ab = &a1bar[i * jl..(i + 1) * jl];
            grad[rc1.start + i] += ab[0];
            for a in 0..dim {
                grad[r1.start + i * dim + a] += ab[0] * t.x[a] + ab[1 + a];
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

impl ClosedFormField for PlaneWaveModel {
    fn jet(&self, x: &Point) -> Jet {
        self.eval(x).to_jet()
    }
}
