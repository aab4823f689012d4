//! Plane-wave neural network trained on a Monte-Carlo estimate of the weak-BC
//! energy.

pub mod features;
pub mod lsinit;
pub mod model;
pub mod objective;
pub mod sampling;
pub mod train;

pub use features::{build_features, FeatureJets, PlaneWaveFeatures};
pub use lsinit::{default_boundary_weight, ls_init, normal_equations, LsInit, LsInitConfig, NormalEquations, Ridge};
pub use model::{Block, Layout, NetConfig, OutputJet, PlaneWaveModel, Tape, TrainMask};
pub use objective::{gradient, mc_objective, McEstimate, ObjectiveWeights};
pub use sampling::{draw_samples, Samples};
pub use train::{lbfgs, smoothed, train, train_with, LbfgsConfig, Schedule, TrainState};

use crate::field::{FieldSum, GaussianBump, Point, SourceField, C64};

/// `exp(-|x - (½, ½)|²/ε)` on the unit square.
pub fn centred_gaussian(eps: f64) -> GaussianBump {
    GaussianBump::new(2, [0.5, 0.5, 0.0], eps, 1.0)
}

/// `k²[exp(-|x - (½, ½)|²/ε) + ⅘ exp(-|x - (¾, ¼)|²/ε)]`.
pub fn two_source(k: f64, eps: f64) -> FieldSum {
    FieldSum {
        parts: vec![
            Box::new(GaussianBump::new(2, [0.5, 0.5, 0.0], eps, k * k)),
            Box::new(GaussianBump::new(2, [0.75, 0.25, 0.0], eps, 0.8 * k * k)),
        ],
    }
}

/// `a(κ² - k²)Φⱼ(x)`, the source whose field in the feature span is `aΦⱼ`.
pub struct FeatureSource {
    pub features: PlaneWaveFeatures,
    pub index: usize,
    pub amplitude: f64,
}

impl SourceField for FeatureSource {
    fn value(&self, x: &Point) -> C64 {
        let f = &self.features;
        let j = self.index;
        let p = (j / 2) % f.directions.len();
        let d = &f.directions[p];
        let phase: f64 = (0..f.dim).map(|a| d[a] * x[a]).sum::<f64>() * f.wavenumber(j);
        let phi = if j % 2 == 0 { phase.cos() } else { phase.sin() };
        C64::new(self.amplitude * f.helmholtz_factor(j) * phi, 0.0)
    }
}
