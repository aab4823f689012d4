//! Stochastic training: Adam with a cosine-annealed step size on fresh
//! samples per iteration, then an optional limited-memory quasi-Newton pass
//! over the mixer on a frozen batch.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{PlaneWaveModel, TrainMask};
use super::objective::{gradient, mc_objective, McEstimate, ObjectiveWeights};
use super::sampling::{draw_samples, Samples};
use crate::error::{Error, Result};
use crate::field::SourceField;
use crate::geometry::Domain;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbfgsConfig {
    pub iterations: usize,
    pub memory: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            iterations: 20,
            memory: 10,
            n_interior: 8192,
            n_boundary: 2048,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    pub iterations: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub lr: f64,
    pub lr_min: f64,
    /// Annealing horizon in iterations; the iteration count when absent.
    pub horizon: Option<usize>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub mask: TrainMask,
    pub lbfgs: Option<LbfgsConfig>,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            iterations: 2000,
            n_interior: 4096,
            n_boundary: 1024,
            lr: 1e-3,
            lr_min: 1e-5,
            horizon: None,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            mask: TrainMask::ALL,
            lbfgs: Some(LbfgsConfig::default()),
        }
    }
}

impl Schedule {
    /// Cosine annealing from `lr` at `t = 0` to `lr_min` at the horizon.
    pub fn learning_rate(&self, t: usize) -> f64 {
        let h = self.horizon.unwrap_or(self.iterations).max(1);
        let s = t.min(h) as f64 / h as f64;
        self.lr_min + 0.5 * (self.lr - self.lr_min) * (1.0 + (std::f64::consts::PI * s).cos())
    }

    fn validate(&self) -> Result<()> {
        let ok = self.n_interior > 0
            && self.lr > 0.0
            && self.lr_min >= 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("schedule {self:?}")))
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainState {
    pub model: PlaneWaveModel,
    pub iteration: usize,
    pub seed: u64,
    /// Sampled objective at each Adam iteration, before its update.
    pub loss_history: Vec<f64>,
    /// `mean|ℒu - f|²` at each Adam iteration.
    pub residual_history: Vec<f64>,
    /// Frozen-batch objective after each quasi-Newton iteration.
    pub lbfgs_history: Vec<f64>,
    adam_m: Vec<f64>,
    adam_v: Vec<f64>,
    #[serde(skip, default = "fresh_rng")]
    rng: ChaCha8Rng,
}

fn fresh_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

impl TrainState {
    pub fn new(model: PlaneWaveModel, seed: u64) -> Self {
        let n = model.layout.total();
        Self {
            model,
            iteration: 0,
            seed,
            loss_history: Vec::new(),
            residual_history: Vec::new(),
            lbfgs_history: Vec::new(),
            adam_m: vec![0.0; n],
            adam_v: vec![0.0; n],
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Trailing mean of the loss over `window` iterations ending at
    /// iteration `i` (1-based).
    pub fn smoothed_loss(&self, i: usize, window: usize) -> f64 {
        smoothed(&self.loss_history, i, window)
    }
}

/// Trailing mean of `values[i - window .. i]` (1-based `i`, shorter window at
/// the start).
pub fn smoothed(values: &[f64], i: usize, window: usize) -> f64 {
    let end = i.min(values.len());
    let start = end.saturating_sub(window.max(1));
    values[start..end].iter().sum::<f64>() / (end - start).max(1) as f64
}

/// Runs the schedule; `on_iteration` sees the state after every Adam step.
pub fn train_with(
    state: &mut TrainState,
    f: &dyn SourceField,
    domain: &Domain,
    w: &ObjectiveWeights,
    schedule: &Schedule,
    mut on_iteration: impl FnMut(&TrainState, &McEstimate),
) -> Result<()> {
    schedule.validate()?;
    if domain.dim() != state.model.dim() {
        return Err(Error::InvalidDomain("model and domain dimensions differ".into()));
    }
    let layout = state.model.layout.clone();
    let mut initial: Option<f64> = state.loss_history.first().copied();
    for _ in 0..schedule.iterations {
        let t = state.iteration;
        let samples = draw_samples(domain, schedule.n_interior, schedule.n_boundary, &mut state.rng);
        let (est, mut g) = gradient(&state.model, f, w, &samples, schedule.mask);
        let first = *initial.get_or_insert(est.value);
        if !est.value.is_finite() || (first != 0.0 && est.value.abs() > 1e3 * first.abs()) {
            return Err(Error::Diverged {
                iteration: t + 1,
                loss: est.value,
            });
        }
        state.loss_history.push(est.value);
        state.residual_history.push(est.mean_sq_residual);
        let lr = schedule.learning_rate(t);
        let (b1, b2) = (schedule.beta1, schedule.beta2);
        let c1 = 1.0 - b1.powi(t as i32 + 1);
        let c2 = 1.0 - b2.powi(t as i32 + 1);
        schedule.mask.apply(&layout, &mut g);
        for i in 0..g.len() {
            let gi = g[i];
            state.adam_m[i] = b1 * state.adam_m[i] + (1.0 - b1) * gi;
            state.adam_v[i] = b2 * state.adam_v[i] + (1.0 - b2) * gi * gi;
            let mh = state.adam_m[i] / c1;
            let vh = state.adam_v[i] / c2;
            state.model.params[i] -= lr * mh / (vh.sqrt() + schedule.eps);
        }
        state.iteration += 1;
        on_iteration(state, &est);
    }
    if let Some(cfg) = schedule.lbfgs {
        if cfg.iterations > 0 {
            let batch = draw_samples(domain, cfg.n_interior, cfg.n_boundary, &mut state.rng);
            let hist = lbfgs(&mut state.model, f, w, &batch, &cfg);
            state.lbfgs_history.extend(hist);
        }
    }
    Ok(())
}

/// Seeded training from a fresh state.
pub fn train(
    model: PlaneWaveModel,
    f: &dyn SourceField,
    domain: &Domain,
    w: &ObjectiveWeights,
    schedule: &Schedule,
    seed: u64,
) -> Result<TrainState> {
    let mut state = TrainState::new(model, seed);
    train_with(&mut state, f, domain, w, schedule, |_, _| {})?;
    Ok(state)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS over the mixer parameters with Armijo backtracking.
/// Returns the objective after each accepted step.
pub fn lbfgs(
    model: &mut PlaneWaveModel,
    f: &dyn SourceField,
    w: &ObjectiveWeights,
    batch: &Samples,
    cfg: &LbfgsConfig,
) -> Vec<f64> {
    let mask = TrainMask::MIXER;
    let mut history = Vec::new();
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let (mut est, mut g) = gradient(model, f, w, batch, mask);
    for it in 0..cfg.iterations {
        let gn = dot(&g, &g).sqrt();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        let gamma = pairs
            .back()
            .map(|(s, y, _)| dot(s, y) / dot(y, y))
            .unwrap_or(1.0 / gn);
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let slope = dot(&g, &dir);
        if slope >= 0.0 {
            pairs.clear();
            if it + 1 == cfg.iterations {
                break;
            }
            continue;
        }
        let base = model.params.clone();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            for i in 0..base.len() {
                model.params[i] = base[i] + step * dir[i];
            }
            let trial = mc_objective(model, f, w, batch);
            if trial.value.is_finite() && trial.value <= est.value + 1e-4 * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            model.params = base;
            break;
        }
        let (e2, g2) = gradient(model, f, w, batch, mask);
        let s: Vec<f64> = model.params.iter().zip(&base).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g2.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > cfg.memory.max(1) {
                pairs.pop_front();
            }
        }
        est = e2;
        g = g2;
        history.push(est.value);
    }
    history
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planewave::features::build_features;
    use crate::planewave::model::NetConfig;

    #[test]
    fn cosine_schedule_endpoints() {
        let s = Schedule {
            iterations: 100,
            ..Schedule::default()
        };
        assert_eq!(s.learning_rate(0), 1e-3);
        assert!((s.learning_rate(100) - 1e-5).abs() < 1e-18);
        assert!((s.learning_rate(50) - (1e-5 + 0.5 * (1e-3 - 1e-5))).abs() < 1e-15);
        assert!((s.learning_rate(500) - 1e-5).abs() < 1e-18);
    }

    #[test]
    fn smoothing_window() {
        let v = [4.0, 2.0, 6.0, 8.0];
        assert_eq!(smoothed(&v, 1, 50), 4.0);
        assert_eq!(smoothed(&v, 4, 2), 7.0);
        assert_eq!(smoothed(&v, 3, 50), 4.0);
    }

    fn tiny() -> PlaneWaveModel {
        let f = build_features(2, 4, 2, 3.0, 0.2).unwrap();
        PlaneWaveModel::new(f, NetConfig { h_g: 4, h_m: 4, alpha_g: 0.05 }, 2).unwrap()
    }

    #[test]
    fn equal_seeds_give_identical_histories() {
        let d = Domain::unit_square();
        let src = crate::field::GaussianBump::new(2, [0.5, 0.5, 0.0], 0.05, 1.0);
        let w = ObjectiveWeights::new(3.0, 2.0, 5.0);
        let s = Schedule {
            iterations: 15,
            n_interior: 300,
            n_boundary: 100,
            lbfgs: Some(LbfgsConfig {
                iterations: 3,
                memory: 3,
                n_interior: 400,
                n_boundary: 100,
            }),
            ..Schedule::default()
        };
        let a = train(tiny(), &src, &d, &w, &s, 17).unwrap();
        let b = train(tiny(), &src, &d, &w, &s, 17).unwrap();
        assert_eq!(a.loss_history.len(), 15);
        assert_eq!(
            a.loss_history.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.loss_history.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.model.params, b.model.params);
        let c = train(tiny(), &src, &d, &w, &s, 18).unwrap();
        assert_ne!(a.loss_history, c.loss_history);
    }

    #[test]
    fn lbfgs_decreases_frozen_objective() {
        let d = Domain::unit_square();
        let src = crate::field::GaussianBump::new(2, [0.5, 0.5, 0.0], 0.05, 1.0);
        let w = ObjectiveWeights::new(3.0, 2.0, 5.0);
        let mut m = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = draw_samples(&d, 300, 100, &mut rng);
        let before = mc_objective(&m, &src, &w, &batch).value;
        let w_before = m.block(super::super::model::Block::W).to_vec();
        let hist = lbfgs(&mut m, &src, &w, &batch, &LbfgsConfig { iterations: 10, ..Default::default() });
        assert!(!hist.is_empty());
        assert!(*hist.last().unwrap() < before);
        assert!(hist.windows(2).all(|p| p[1] <= p[0]));
        assert_eq!(m.block(super::super::model::Block::W), w_before.as_slice());
    }
}
