//! Plane-wave training on targets inside the feature span.

use hvp_core::planewave::{
    build_features, train, FeatureSource, NetConfig, ObjectiveWeights, PlaneWaveModel, Schedule, TrainMask,
};
use hvp_core::{ClosedFormField, Domain};

#[test]
fn linear_training_recovers_a_representable_target() {
    let k = 5.0;
    let features = build_features(2, 4, 2, k, 0.4).unwrap();
    let target = FeatureSource {
        features: features.clone(),
        index: features.index(1, 2, true),
        amplitude: 0.7,
    };
    let net = NetConfig { h_g: 4, h_m: 4, alpha_g: 0.0 };
    let model = PlaneWaveModel::new(features.clone(), net, 1).unwrap();
    let w = ObjectiveWeights { k, gamma1: 1.0, gamma_bnd: 0.0, physical: 0.0 };
    let schedule = Schedule {
        iterations: 600,
        n_interior: 256,
        n_boundary: 0,
        lr: 1e-2,
        mask: TrainMask::LINEAR,
        lbfgs: None,
        ..Schedule::default()
    };
    let state = train(model, &target, &Domain::unit_square(), &w, &schedule, 9).unwrap();
    let r = *state.residual_history.last().unwrap();
    assert!(r < 1e-8 * state.residual_history[0], "residual {r:e}");
    // opposite directions give sine features of opposite sign, so only the field is unique
    let j = target.index;
    for t in 0..20 {
        let x = [0.05 * t as f64, 1.0 - 0.04 * t as f64, 0.0];
        let want = 0.7 * features.eval(&x).v[j];
        let got = state.model.jet(&x).value;
        assert!((got.re - want).abs() < 1e-4 && got.im.abs() < 1e-4, "{got} vs {want}");
    }
}
