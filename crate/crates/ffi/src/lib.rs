//! C interface to `hvp-core`.
//!
//! Objects with internal state are opaque handles created by `*_new` or
//! `*_solve` functions and released with the matching `*_free`. Plain data
//! (parameter packs, coefficients, solve statistics) crosses the boundary as
//! `#[repr(C)]` structs. Every fallible function returns an [`HvpStatus`];
//! the message of the last failure on the calling thread is available from
//! [`hvp_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hvp_core::energy::{coercivity_coefficients_weak, default_params, EnergyParams};
use hvp_core::fem::{assemble, AssemblyOptions, ElementKind, FemSpace};
use hvp_core::field::{ClosedFormField, Constant, FieldSum, GaussianBump, C64};
use hvp_core::planewave::{build_features, train, NetConfig, ObjectiveWeights, PlaneWaveModel, Schedule};
use hvp_core::{Domain, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HvpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    InvalidParams = 4,
    SolveFailure = 5,
    SingularSystem = 6,
    Diverged = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for HvpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidDomain(_) | Error::NonStarShaped(_) | Error::IncompatibleMesh { .. } => Self::InvalidDomain,
            Error::InvalidParams(_) | Error::NoAdmissibleAlpha(_) => Self::InvalidParams,
            Error::SolveFailure(_) => Self::SolveFailure,
            Error::SingularSystem => Self::SingularSystem,
            Error::Diverged { .. } => Self::Diverged,
            Error::Config(_) | Error::Io(_) | Error::Json(_) => Self::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: HvpStatus, msg: impl Into<String>) -> HvpStatus {
    set_error(msg);
    status
}

/// Runs `body`, mapping errors and panics to status codes.
fn guard(body: impl FnOnce() -> Result<(), HvpStatus>) -> HvpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            HvpStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(HvpStatus::Panic, "internal panic"),
    }
}

fn core<T>(r: hvp_core::Result<T>) -> Result<T, HvpStatus> {
    r.map_err(|e| fail(HvpStatus::from(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), HvpStatus> {
    if p.is_null() {
        Err(fail(HvpStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated)
/// and returns its length without the terminator. With a null `buf` or a
/// too-small `len`, only the length is returned.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hvp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > bytes.len() {
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
            *buf.add(bytes.len()) = 0;
        }
        bytes.len()
    })
}

/// NUL-terminated crate version; static storage.
#[no_mangle]
pub extern "C" fn hvp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque interval, rectangle or box.
pub struct HvpDomain(Domain);

/// Creates a box from `dim` pairs `(lo, hi)` stored consecutively in `bounds`.
///
/// # Safety
/// `bounds` must be valid for `2 * dim` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_domain_new(dim: usize, bounds: *const f64, out: *mut *mut HvpDomain) -> HvpStatus {
    guard(|| {
        non_null(bounds, "bounds")?;
        non_null(out, "out")?;
        if !(1..=3).contains(&dim) {
            return Err(fail(HvpStatus::InvalidDomain, format!("dimension must be 1, 2 or 3 (got {dim})")));
        }
        let b = std::slice::from_raw_parts(bounds, 2 * dim);
        let pairs: Vec<(f64, f64)> = b.chunks(2).map(|c| (c[0], c[1])).collect();
        let d = core(Domain::new(&pairs))?;
        *out = Box::into_raw(Box::new(HvpDomain(d)));
        Ok(())
    })
}

/// # Safety
/// `domain` must be null or a pointer returned by [`hvp_domain_new`].
#[no_mangle]
pub unsafe extern "C" fn hvp_domain_free(domain: *mut HvpDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Diameter `L` and star-shape constant `L₀` about the centre.
///
/// # Safety
/// `domain` must come from [`hvp_domain_new`]; `l` and `l0` must be valid
/// for one write each.
#[no_mangle]
pub unsafe extern "C" fn hvp_domain_geometry(domain: *const HvpDomain, l: *mut f64, l0: *mut f64) -> HvpStatus {
    guard(|| {
        non_null(domain, "domain")?;
        non_null(l, "l")?;
        non_null(l0, "l0")?;
        let d = &(*domain).0;
        *l = d.diameter();
        *l0 = core(d.star_shape_constant())?;
        Ok(())
    })
}

/// Energy parameter pack.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HvpEnergyParams {
    pub k: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub l: f64,
    pub l0: f64,
    pub nu: usize,
}

impl From<EnergyParams> for HvpEnergyParams {
    fn from(p: EnergyParams) -> Self {
        Self {
            k: p.k,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            alpha: p.alpha,
            beta: p.beta,
            eps1: p.eps1,
            eps2: p.eps2,
            eps3: p.eps3,
            l: p.l,
            l0: p.l0,
            nu: p.nu,
        }
    }
}

impl From<HvpEnergyParams> for EnergyParams {
    fn from(p: HvpEnergyParams) -> Self {
        Self {
            k: p.k,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            alpha: p.alpha,
            beta: p.beta,
            eps1: p.eps1,
            eps2: p.eps2,
            eps3: p.eps3,
            l: p.l,
            l0: p.l0,
            nu: p.nu,
        }
    }
}

/// Coefficients of `F_γ ≥ Σ cᵢ·termᵢ`, divided by the dimension.
/// `bimp` is the impedance coefficient.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HvpCoefficients {
    pub residual: f64,
    pub grad: f64,
    pub mass: f64,
    pub bgrad: f64,
    pub bmass: f64,
    pub bimp: f64,
    pub coercive: bool,
}

/// Default parameter pack for a domain.
///
/// # Safety
/// `domain` must come from [`hvp_domain_new`]; `out` must be valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn hvp_default_params(
    domain: *const HvpDomain,
    k: f64,
    out: *mut HvpEnergyParams,
) -> HvpStatus {
    guard(|| {
        non_null(domain, "domain")?;
        non_null(out, "out")?;
        *out = core(default_params(&(*domain).0, k))?.into();
        Ok(())
    })
}

/// Weak-BC coercivity coefficients of a parameter pack.
///
/// # Safety
/// `params` must be valid for one read and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_coercivity_weak(
    params: *const HvpEnergyParams,
    out: *mut HvpCoefficients,
) -> HvpStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let c = core(coercivity_coefficients_weak(&(*params).into()))?;
        *out = HvpCoefficients {
            residual: c.residual,
            grad: c.grad,
            mass: c.mass,
            bgrad: c.bgrad,
            bmass: c.bmass,
            bimp: c.bimp.unwrap_or(0.0),
            coercive: c.is_coercive(),
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HvpSourceKind {
    /// `amplitude` everywhere.
    Constant = 0,
    /// `amplitude·exp(-|x - centre|²/eps)`.
    Gaussian = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HvpSource {
    pub kind: HvpSourceKind,
    pub centre: [f64; 3],
    pub eps: f64,
    pub amplitude: f64,
}

fn source(s: &HvpSource, dim: usize) -> Result<FieldSum, HvpStatus> {
    let part: Box<dyn ClosedFormField + Send> = match s.kind {
        HvpSourceKind::Constant => Box::new(Constant(C64::new(s.amplitude, 0.0))),
        HvpSourceKind::Gaussian => {
            if !(s.eps > 0.0) {
                return Err(fail(HvpStatus::InvalidArgument, "eps must be positive"));
            }
            Box::new(GaussianBump::new(dim, s.centre, s.eps, s.amplitude))
        }
    };
    Ok(FieldSum { parts: vec![part] })
}

/// Opaque Galerkin solution.
pub struct HvpFemSolution {
    space: FemSpace,
    coeffs: Vec<C64>,
    info: HvpSolveInfo,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HvpSolveInfo {
    pub n_dofs: usize,
    pub relative_residual: f64,
    pub backward_error: f64,
    pub hermitian_defect: f64,
    pub discrete_energy: f64,
}

/// Assembles and solves the weak-BC Galerkin system on a uniform mesh of
/// size `h` (1D quintic Hermite or 2D Bogner–Fox–Schmit).
///
/// # Safety
/// `domain` must come from [`hvp_domain_new`]; `params` and `f` must be valid
/// for one read; `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_fem_solve(
    domain: *const HvpDomain,
    params: *const HvpEnergyParams,
    h: f64,
    f: *const HvpSource,
    out: *mut *mut HvpFemSolution,
) -> HvpStatus {
    guard(|| {
        non_null(domain, "domain")?;
        non_null(params, "params")?;
        non_null(f, "f")?;
        non_null(out, "out")?;
        let d = &(*domain).0;
        let kind = ElementKind::for_dim(d.dim())
            .ok_or_else(|| fail(HvpStatus::InvalidDomain, "the Galerkin solver supports 1D and 2D"))?;
        if !(h > 0.0) {
            return Err(fail(HvpStatus::InvalidArgument, "h must be positive"));
        }
        let p: EnergyParams = (*params).into();
        let src = source(&*f, d.dim())?;
        let space = core(FemSpace::new(d, h, kind))?;
        let sys = core(assemble(&space, &p, &src, AssemblyOptions::default()))?;
        let sol = core(sys.solve())?;
        let info = HvpSolveInfo {
            n_dofs: space.n_dofs(),
            relative_residual: sol.relative_residual,
            backward_error: sol.backward_error,
            hermitian_defect: sys.relative_hermitian_defect(),
            discrete_energy: sys.discrete_energy(&sol.x),
        };
        *out = Box::into_raw(Box::new(HvpFemSolution {
            space,
            coeffs: sol.x,
            info,
        }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`hvp_fem_solve`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_fem_solution_info(sol: *const HvpFemSolution, out: *mut HvpSolveInfo) -> HvpStatus {
    guard(|| {
        non_null(sol, "sol")?;
        non_null(out, "out")?;
        *out = (*sol).info;
        Ok(())
    })
}

/// Evaluates the discrete field at `x` (three coordinates; unused ones ignored).
///
/// # Safety
/// `sol` must come from [`hvp_fem_solve`]; `x` must be valid for three reads;
/// `re` and `im` for one write each.
#[no_mangle]
pub unsafe extern "C" fn hvp_fem_solution_eval(
    sol: *const HvpFemSolution,
    x: *const f64,
    re: *mut f64,
    im: *mut f64,
) -> HvpStatus {
    guard(|| {
        non_null(sol, "sol")?;
        non_null(x, "x")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let s = &*sol;
        let p = [*x, *x.add(1), *x.add(2)];
        if !s.space.domain().contains(&p) {
            return Err(fail(HvpStatus::InvalidArgument, "point outside the domain"));
        }
        let v = s.space.function(&s.coeffs).jet(&p).value;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a pointer returned by [`hvp_fem_solve`].
#[no_mangle]
pub unsafe extern "C" fn hvp_fem_solution_free(sol: *mut HvpFemSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Opaque plane-wave network.
pub struct HvpModel(PlaneWaveModel);

/// Plane-wave model with `p` directions, `r` rings, hidden widths `h_g` and
/// `h_m`, gain scale `alpha_g`, seeded initialisation.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_model_new(
    dim: usize,
    p: usize,
    r: usize,
    k: f64,
    spread: f64,
    h_g: usize,
    h_m: usize,
    alpha_g: f64,
    seed: u64,
    out: *mut *mut HvpModel,
) -> HvpStatus {
    guard(|| {
        non_null(out, "out")?;
        let f = core(build_features(dim, p, r, k, spread))?;
        let m = core(PlaneWaveModel::new(f, NetConfig { h_g, h_m, alpha_g }, seed))?;
        *out = Box::into_raw(Box::new(HvpModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`hvp_model_new`].
#[no_mangle]
pub unsafe extern "C" fn hvp_model_param_count(model: *const HvpModel) -> usize {
    if model.is_null() {
        0
    } else {
        (*model).0.params.len()
    }
}

/// Copies the flat parameter vector into `buf`.
///
/// # Safety
/// `model` must come from [`hvp_model_new`]; `buf` must be valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn hvp_model_get_params(model: *const HvpModel, buf: *mut f64, len: usize) -> HvpStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(buf, "buf")?;
        let p = &(*model).0.params;
        if len < p.len() {
            return Err(fail(HvpStatus::BufferTooSmall, format!("need {} entries", p.len())));
        }
        ptr::copy_nonoverlapping(p.as_ptr(), buf, p.len());
        Ok(())
    })
}

/// Replaces the flat parameter vector; `len` must equal the parameter count.
///
/// # Safety
/// `model` must come from [`hvp_model_new`]; `buf` must be valid for `len`
/// reads.
#[no_mangle]
pub unsafe extern "C" fn hvp_model_set_params(model: *mut HvpModel, buf: *const f64, len: usize) -> HvpStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(buf, "buf")?;
        let p = &mut (*model).0.params;
        if len != p.len() {
            return Err(fail(HvpStatus::InvalidArgument, format!("expected {} entries", p.len())));
        }
        p.copy_from_slice(std::slice::from_raw_parts(buf, len));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`hvp_model_new`]; `x` must be valid for three
/// reads; `re` and `im` for one write each.
#[no_mangle]
pub unsafe extern "C" fn hvp_model_eval(model: *const HvpModel, x: *const f64, re: *mut f64, im: *mut f64) -> HvpStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(x, "x")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let v = (*model).0.jet(&[*x, *x.add(1), *x.add(2)]).value;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Training weights and schedule size; other schedule settings take their
/// defaults without the quasi-Newton pass.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HvpTrainOptions {
    pub gamma1: f64,
    pub gamma_bnd: f64,
    pub iterations: usize,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub lr: f64,
    pub seed: u64,
}

/// Trains `model` in place on the domain and writes the last sampled loss.
///
/// # Safety
/// `model` and `domain` must come from their constructors; `f` and `opts`
/// must be valid for one read; `final_loss` for one write.
#[no_mangle]
pub unsafe extern "C" fn hvp_model_train(
    model: *mut HvpModel,
    domain: *const HvpDomain,
    f: *const HvpSource,
    opts: *const HvpTrainOptions,
    final_loss: *mut f64,
) -> HvpStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(domain, "domain")?;
        non_null(f, "f")?;
        non_null(opts, "opts")?;
        non_null(final_loss, "final_loss")?;
        let d = &(*domain).0;
        let o = &*opts;
        let m = &mut (*model).0;
        let src = source(&*f, d.dim())?;
        let w = ObjectiveWeights::new(m.features.k, o.gamma1, o.gamma_bnd);
        let schedule = Schedule {
            iterations: o.iterations,
            n_interior: o.n_interior,
            n_boundary: o.n_boundary,
            lr: o.lr,
            lbfgs: None,
            ..Schedule::default()
        };
        let state = core(train(m.clone(), &src, d, &w, &schedule, o.seed))?;
        *final_loss = state.loss_history.last().copied().unwrap_or(f64::NAN);
        *m = state.model;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a pointer returned by [`hvp_model_new`].
#[no_mangle]
pub unsafe extern "C" fn hvp_model_free(model: *mut HvpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs the `hvp` command line with `argc` arguments (including the program
/// name) and returns its exit code.
///
/// # Safety
/// `argv` must hold `argc` valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn hvp_cli_run(argc: c_int, argv: *const *const c_char) -> c_int {
    if argv.is_null() || argc < 1 {
        return hvp_core::cli::EXIT_USAGE;
    }
    let args: Vec<String> = (0..argc as usize)
        .map(|i| std::ffi::CStr::from_ptr(*argv.add(i)).to_string_lossy().into_owned())
        .collect();
    catch_unwind(|| hvp_core::cli::run(args)).unwrap_or(hvp_core::cli::EXIT_NUMERICAL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> *mut HvpDomain {
        let mut d = ptr::null_mut();
        let b = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(unsafe { hvp_domain_new(2, b.as_ptr(), &mut d) }, HvpStatus::Ok);
        d
    }

    #[test]
    fn null_pointers_are_reported() {
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { hvp_domain_new(2, ptr::null(), &mut out) }, HvpStatus::NullPointer);
        let n = unsafe { hvp_last_error_message(ptr::null_mut(), 0) };
        let mut buf = vec![0 as c_char; n + 1];
        unsafe { hvp_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert_eq!(msg, "bounds is null");
    }

    #[test]
    fn invalid_domain() {
        let mut out = ptr::null_mut();
        let b = [1.0, 0.0];
        assert_eq!(unsafe { hvp_domain_new(1, b.as_ptr(), &mut out) }, HvpStatus::InvalidDomain);
        assert!(out.is_null());
    }

    #[test]
    fn square_coefficients() {
        let d = square();
        let mut p = HvpEnergyParams::default();
        let mut c = HvpCoefficients::default();
        unsafe {
            assert_eq!(hvp_default_params(d, 1.0, &mut p), HvpStatus::Ok);
            assert_eq!(hvp_coercivity_weak(&p, &mut c), HvpStatus::Ok);
            hvp_domain_free(d);
        }
        assert!(c.coercive);
        assert!((2.0 * c.residual - 0.12 * p.l * p.l).abs() < 1e-12);
    }

    #[test]
    fn zero_source_solution_is_zero() {
        let d = square();
        let mut p = HvpEnergyParams::default();
        let f = HvpSource {
            kind: HvpSourceKind::Constant,
            centre: [0.0; 3],
            eps: 0.0,
            amplitude: 0.0,
        };
        let mut sol = ptr::null_mut();
        let mut info = HvpSolveInfo::default();
        let (mut re, mut im) = (1.0, 1.0);
        unsafe {
            hvp_default_params(d, 5.0, &mut p);
            assert_eq!(hvp_fem_solve(d, &p, 0.25, &f, &mut sol), HvpStatus::Ok);
            assert_eq!(hvp_fem_solution_info(sol, &mut info), HvpStatus::Ok);
            assert_eq!(hvp_fem_solution_eval(sol, [0.3, 0.6, 0.0].as_ptr(), &mut re, &mut im), HvpStatus::Ok);
            assert_eq!(
                hvp_fem_solution_eval(sol, [2.0, 0.0, 0.0].as_ptr(), &mut re, &mut im),
                HvpStatus::InvalidArgument
            );
            hvp_fem_solution_free(sol);
            hvp_domain_free(d);
        }
        assert_eq!(info.n_dofs, 100);
        assert_eq!((re, im), (0.0, 0.0));
    }

    #[test]
    fn bad_mesh_maps_to_invalid_domain() {
        let d = square();
        let mut p = HvpEnergyParams::default();
        let f = HvpSource {
            kind: HvpSourceKind::Constant,
            centre: [0.0; 3],
            eps: 0.0,
            amplitude: 1.0,
        };
        let mut sol = ptr::null_mut();
        unsafe {
            hvp_default_params(d, 5.0, &mut p);
            assert_eq!(hvp_fem_solve(d, &p, 0.3, &f, &mut sol), HvpStatus::InvalidDomain);
            hvp_domain_free(d);
        }
        assert!(sol.is_null());
    }

    #[test]
    fn model_round_trip_and_training() {
        let d = square();
        let mut m = ptr::null_mut();
        unsafe {
            assert_eq!(hvp_model_new(2, 4, 2, 3.0, 0.3, 4, 4, 0.05, 7, &mut m), HvpStatus::Ok);
            let n = hvp_model_param_count(m);
            let mut buf = vec![0.0; n];
            assert_eq!(hvp_model_get_params(m, buf.as_mut_ptr(), n - 1), HvpStatus::BufferTooSmall);
            assert_eq!(hvp_model_get_params(m, buf.as_mut_ptr(), n), HvpStatus::Ok);
            buf[0] = 0.5;
            assert_eq!(hvp_model_set_params(m, buf.as_ptr(), n), HvpStatus::Ok);
            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(hvp_model_eval(m, [0.0, 0.0, 0.0].as_ptr(), &mut re, &mut im), HvpStatus::Ok);
            assert!((re - 0.5).abs() < 1e-12);
            let f = HvpSource {
                kind: HvpSourceKind::Gaussian,
                centre: [0.5, 0.5, 0.0],
                eps: 0.05,
                amplitude: 1.0,
            };
            let o = HvpTrainOptions {
                gamma1: 1.0,
                gamma_bnd: 5.0,
                iterations: 5,
                n_interior: 64,
                n_boundary: 32,
                lr: 1e-3,
                seed: 1,
            };
            let mut loss = f64::NAN;
            assert_eq!(hvp_model_train(m, d, &f, &o, &mut loss), HvpStatus::Ok);
            assert!(loss.is_finite());
            hvp_model_free(m);
            hvp_domain_free(d);
        }
    }

    #[test]
    fn cli_entry_point() {
        let args = [c"hvp".as_ptr(), c"coercivity-report".as_ptr(), c"--dim".as_ptr(), c"2".as_ptr()];
        assert_eq!(unsafe { hvp_cli_run(4, args.as_ptr()) }, 0);
        let args = [c"hvp".as_ptr(), c"nonsense".as_ptr()];
        assert_eq!(unsafe { hvp_cli_run(2, args.as_ptr()) }, 64);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { std::ffi::CStr::from_ptr(hvp_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
