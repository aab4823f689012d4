//! Subcommand bodies. Each returns a JSON report and whether its checks
//! passed.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    CoercivityConfig, ConvergenceConfig, FemSolveConfig, FieldCase, IdentitiesConfig, NnTrainConfig, OracleCase,
    OracleConfig,
};
use crate::energy::{
    coercivity_coefficients_strong, coercivity_coefficients_weak, default_params, gamma_thresholds,
    select_parameters, weak_bc_energy,
};
use crate::error::{Error, Result};
use crate::fem::{assemble, AssemblyOptions, ElementKind, FemSpace, FieldGrid};
use crate::field::{ClosedFormField, Constant, GaussianBump, PlaneWave, Polynomial, C64};
use crate::geometry::Quadratures;
use crate::identities::{low_order_morawetz_residual, rellich_residual};
use crate::oracle::{exact_1d_constant_forcing, minimiser_1d_constant_forcing};
use crate::planewave::{
    build_features, default_boundary_weight, ls_init, Block, LsInitConfig, ObjectiveWeights, PlaneWaveModel,
    TrainState,
};
use crate::study::{convergence_study, rows_to_csv, StudySpec};

pub struct Report {
    pub body: Value,
    pub passed: bool,
}

impl Report {
    fn ok(body: Value) -> Self {
        Self { body, passed: true }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialise")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be positive (got {v})")))
    }
}

type Case = (&'static str, Box<dyn ClosedFormField + Send>);

/// Closed-form test fields for a dimension.
pub fn identity_fields(case: FieldCase, dim: usize, k: f64) -> Vec<Case> {
    let c = C64::new;
    let x = |p: u32| [p, 0, 0];
    let mut out: Vec<Case> = Vec::new();
    let want = |f: FieldCase| case == FieldCase::All || case == f;
    if want(FieldCase::Constant) {
        out.push(("constant", Box::new(Constant(c(1.0, -2.0)))));
    }
    if want(FieldCase::Linear) {
        let mut t = vec![(c(0.5, 0.0), [0, 0, 0]), (c(1.0, 1.0), x(1))];
        if dim >= 2 {
            t.push((c(2.0, 0.0), [0, 1, 0]));
        }
        if dim >= 3 {
            t.push((c(0.0, -1.0), [0, 0, 1]));
        }
        out.push(("linear", Box::new(Polynomial::new(t))));
    }
    if want(FieldCase::Polynomial) {
        let mut t = vec![(c(1.0, 0.0), x(4)), (c(0.0, -3.0), x(2)), (c(0.5, 0.5), x(3))];
        if dim >= 2 {
            t.push((c(1.0, 0.5), [2, 2, 0]));
            t.push((c(-1.0, 0.0), [0, 3, 0]));
        }
        if dim >= 3 {
            t.push((c(0.0, 2.0), [1, 1, 2]));
        }
        out.push(("polynomial", Box::new(Polynomial::new(t))));
    }
    if want(FieldCase::PlaneWave) {
        let s = 1.0 / (dim as f64).sqrt();
        let mut d = [0.0; 3];
        d[..dim].fill(s);
        out.push(("plane-wave", Box::new(PlaneWave::new(k, d))));
    }
    if want(FieldCase::Gaussian) {
        let mut centre = [0.0; 3];
        for (a, v) in centre.iter_mut().take(dim).enumerate() {
            *v = 0.4 + 0.1 * a as f64;
        }
        out.push(("gaussian", Box::new(GaussianBump::new(dim, centre, 0.05, 2.0))));
    }
    out
}

pub fn verify_identities(cfg: &IdentitiesConfig) -> Result<Report> {
    positive("k", cfg.k)?;
    let domain = cfg.domain.build()?;
    let beta = match cfg.beta {
        Some(b) => b,
        None => default_params(&domain, cfg.k)?.beta,
    };
    let order = cfg.quad_order.unwrap_or(24);
    let mut cases = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, u) in identity_fields(cfg.case, domain.dim(), cfg.k) {
        let r = rellich_residual(u.as_ref(), cfg.k, &domain, order);
        let m = low_order_morawetz_residual(u.as_ref(), cfg.k, beta, &domain, order);
        worst = worst.max(r.relative_residual).max(m.relative_residual);
        cases.push(json!({ "case": name, "rellich": r, "morawetz": m }));
    }
    let passed = worst < cfg.tolerance;
    Ok(Report {
        body: json!({
            "config": cfg,
            "beta": beta,
            "cases": cases,
            "max_relative_residual": worst,
            "pass": passed,
        }),
        passed,
    })
}

pub fn coercivity_report(cfg: &CoercivityConfig) -> Result<Report> {
    let domain = cfg.domain.build()?;
    let p = match cfg.params {
        Some(p) => p,
        None => select_parameters(
            domain.dim(),
            cfg.k,
            domain.diameter(),
            domain.star_shape_constant()?,
            cfg.strategy,
        )?,
    };
    let weak = coercivity_coefficients_weak(&p)?;
    let strong = coercivity_coefficients_strong(&p)?;
    let nu = p.nu as f64;
    let passed = weak.is_coercive();
    Ok(Report {
        body: json!({
            "config": cfg,
            "params": p,
            "coefficients": weak,
            "coefficients_times_nu": weak.scaled(nu),
            "strong_coefficients": strong,
            "theta": weak.theta(p.l),
            "thresholds": gamma_thresholds(&p)?,
            "coercive": passed,
        }),
        passed,
    })
}

pub fn fem_solve(cfg: &FemSolveConfig) -> Result<Report> {
    positive("k", cfg.k)?;
    positive("h", cfg.h)?;
    let domain = cfg.domain.build()?;
    let kind = ElementKind::for_dim(domain.dim())
        .ok_or_else(|| Error::InvalidDomain("the Galerkin solver supports 1D and 2D".into()))?;
    let mut params = default_params(&domain, cfg.k)?;
    if let Some(g) = cfg.gamma1 {
        params.gamma1 = g;
    }
    if let Some(g) = cfg.gamma2 {
        params.gamma2 = g;
    }
    params.validate()?;
    let f = cfg.f.build(&domain, cfg.k)?;
    let space = FemSpace::new(&domain, cfg.h, kind)?;
    let options = AssemblyOptions {
        mode: cfg.penalty_mode(),
        quad_order: cfg.quad_order,
    };
    let sys = assemble(&space, &params, &f, options)?;
    let sol = sys.solve()?;
    let u = space.function(&sol.x);
    let grid = FieldGrid::sample(&u, &domain, cfg.grid_points);
    if let Some(path) = &cfg.export {
        grid.save_csv(path)?;
    }
    Ok(Report::ok(json!({
        "config": cfg,
        "params": params,
        "certified": sys.certified,
        "boundary_weight": sys.boundary_weight,
        "n_dofs": space.n_dofs(),
        "mesh_size": space.mesh_size(),
        "relative_residual": sol.relative_residual,
        "backward_error": sol.backward_error,
        "hermitian_defect": sys.relative_hermitian_defect(),
        "discrete_energy": sys.discrete_energy(&sol.x),
        "max_abs_u": grid.max_abs(),
    })))
}

/// `path` with `_NNNNNN` inserted before the extension.
pub fn snapshot_path(path: &Path, iteration: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{iteration:06}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{iteration:06}"),
    };
    path.with_file_name(name)
}

pub fn nn_train(cfg: &NnTrainConfig) -> Result<Report> {
    positive("k", cfg.k)?;
    let domain = cfg.domain.build()?;
    let f = cfg.f.build(&domain, cfg.k)?;
    let fc = cfg.features;
    let features = build_features(domain.dim(), fc.p, fc.r, cfg.k, fc.spread)?;
    let mut model = PlaneWaveModel::new(features.clone(), cfg.net, cfg.seed)?;
    let sched = &cfg.schedule;
    let mut ridge = None;
    if cfg.ls_init {
        let init_cfg = LsInitConfig {
            boundary_weight: cfg
                .weights
                .boundary_weight
                .unwrap_or_else(|| default_boundary_weight(&domain, 50.0, sched.n_interior)),
            ridge: cfg.weights.ridge,
            n_interior: sched.n_interior,
            n_boundary: sched.n_boundary,
            seed: cfg.seed,
        };
        let init = ls_init(&features, &f, &domain, cfg.k, &init_cfg)?;
        model.block_mut(Block::W).copy_from_slice(&init.w);
        ridge = Some(init.ridge);
    }
    let w = ObjectiveWeights {
        k: cfg.k,
        gamma1: cfg.weights.gamma1,
        gamma_bnd: cfg.weights.gamma_bnd,
        physical: cfg.weights.physical,
    };
    let mut state = TrainState::new(model, cfg.seed);
    let mut snapshots = Vec::new();
    let mut export_error = None;
    let every = cfg.export_every.filter(|&n| n > 0);
    crate::planewave::train_with(&mut state, &f, &domain, &w, sched, |s, _| {
        if let (Some(n), Some(path)) = (every, &cfg.export) {
            if s.iteration % n == 0 && export_error.is_none() {
                let p = snapshot_path(path, s.iteration);
                match FieldGrid::sample(&s.model, &domain, cfg.grid_points).save_csv(&p) {
                    Ok(()) => snapshots.push(p),
                    Err(e) => export_error = Some(e),
                }
            }
        }
    })?;
    if let Some(e) = export_error {
        return Err(e);
    }
    if let Some(path) = &cfg.export {
        FieldGrid::sample(&state.model, &domain, cfg.grid_points).save_csv(path)?;
    }
    let energy = match cfg.quad_order {
        Some(order) => {
            let mut p = default_params(&domain, cfg.k)?;
            p.gamma1 = w.gamma1;
            p.gamma2 = w.gamma_bnd;
            Some(weak_bc_energy(&state.model, &f, &p, &Quadratures::new(&domain, order)))
        }
        None => None,
    };
    let n = state.loss_history.len();
    Ok(Report::ok(json!({
        "config": cfg,
        "parameters": state.model.params.len(),
        "ls_init_ridge": ridge,
        "iterations": state.iteration,
        "final_loss": state.loss_history.last(),
        "smoothed_final_loss": if n > 0 { Some(state.smoothed_loss(n, 50)) } else { None },
        "loss_history": state.loss_history,
        "residual_history": state.residual_history,
        "lbfgs_history": state.lbfgs_history,
        "quadrature_energy": energy,
        "snapshots": snapshots,
    })))
}

pub fn oracle(cfg: &OracleConfig) -> Result<Report> {
    let domain = cfg.domain.build()?;
    let f = C64::new(cfg.f, 0.0);
    let u = match cfg.case {
        OracleCase::Constant1d => exact_1d_constant_forcing(cfg.k, f, &domain)?,
        OracleCase::Minimiser1d => {
            let mut p = default_params(&domain, cfg.k)?;
            if let Some(g) = cfg.gamma1 {
                p.gamma1 = g;
            }
            if let Some(g) = cfg.gamma2 {
                p.gamma2 = g;
            }
            minimiser_1d_constant_forcing(cfg.k, f, p.gamma1, 2.0 * p.gamma2, &domain)?
        }
    };
    let grid = FieldGrid::sample(&u, &domain, cfg.points);
    if let Some(path) = &cfg.export {
        grid.save_csv(path)?;
    }
    let (a, b) = domain.bounds()[0];
    let pde = (0..grid.len())
        .map(|i| (u.jet(&grid.point(i, 0)).helmholtz(cfg.k) - f).norm())
        .fold(0.0, f64::max);
    let bc = [(a, -1.0), (b, 1.0)]
        .iter()
        .map(|&(x, n)| u.jet(&[x, 0.0, 0.0]).impedance_residual(&[n, 0.0, 0.0], cfg.k).norm())
        .fold(0.0, f64::max);
    Ok(Report::ok(json!({
        "config": cfg,
        "max_abs_u": grid.max_abs(),
        "max_pde_residual": pde,
        "max_impedance_residual": bc,
    })))
}

pub fn convergence(cfg: &ConvergenceConfig) -> Result<Report> {
    let spec = StudySpec {
        k: cfg.k,
        f: cfg.f,
        cells: cfg.cells.clone(),
        reference: cfg.reference,
        mode: cfg.mode,
        quad_order: cfg.quad_order,
        params: cfg.params,
    };
    positive("k", cfg.k)?;
    if cfg.cells.is_empty() || cfg.cells.contains(&0) {
        return Err(Error::InvalidParams("cells must be a non-empty list of positive counts".into()));
    }
    let rows = convergence_study(&spec)?;
    if let Some(path) = &cfg.csv {
        std::fs::write(path, rows_to_csv(&rows))?;
    }
    Ok(Report::ok(json!({ "config": cfg, "rows": to_value(&rows) })))
}
