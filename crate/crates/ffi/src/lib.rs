//! C interface to the indicvex toolkit.
//!
//! Every call returns an [`IvxStatus`]. Results go through out-pointers;
//! objects are opaque handles released with the matching `*_free`. After a
//! failure, [`ivx_last_error`] describes it on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use indicvex::convex::UnivariateConvex;
use indicvex::disjunctive::{build_conic_quadratic, ExtendedFormulation};
use indicvex::envelope::{envelope, EnvelopePoint, RankOneInstance};
use indicvex::instances::{compute_metrics, export, generate_denoising, import_json, DenoisingFormulation, DenoisingOverrides, ExportFormat, MetricInputs};
use indicvex::solver::{branch_and_bound, solve_relaxation, BnbOptions, SolveOptions};
use indicvex::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    SizeLimit = 4,
    Infeasible = 5,
    Solver = 6,
    Parse = 7,
    Mismatch = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvxFormat {
    Lp = 0,
    Mps = 1,
    Json = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IvxDenoisingKind {
    Basic = 0,
    RankOne = 1,
    RankTwo = 2,
}

/// Parameters of a generated denoising formulation. Negative counts mean the
/// size-derived default.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IvxDenoisingParams {
    pub n: usize,
    pub ell: usize,
    pub omega: f64,
    pub seed: u64,
    pub k1: i64,
    pub k2: i64,
    pub spikes: i64,
    pub kind: IvxDenoisingKind,
}

/// Metric percentages; NaN marks an undefined value. Inputs use NaN for absent.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IvxMetrics {
    pub igap: f64,
    pub egap: f64,
    pub ri_basic: f64,
    pub ri_rankone: f64,
}

/// A univariate convex function.
pub struct IvxFunction(UnivariateConvex);

/// An extended formulation.
pub struct IvxFormulation(ExtendedFormulation);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IvxStatus {
    match e {
        Error::Unsupported(_) => IvxStatus::Unsupported,
        Error::SizeLimit { .. } | Error::Dimension(_) => IvxStatus::SizeLimit,
        Error::Infeasible | Error::InfeasiblePartition(_) => IvxStatus::Infeasible,
        Error::Solver(_) => IvxStatus::Solver,
        Error::Parse(_) | Error::Json(_) => IvxStatus::Parse,
        Error::Mismatch(_) => IvxStatus::Mismatch,
        Error::Io(_) => IvxStatus::Internal,
        _ => IvxStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), IvxStatus>) -> IvxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IvxStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            IvxStatus::Internal
        }
    }
}

fn lift<T>(r: indicvex::Result<T>) -> Result<T, IvxStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null() -> IvxStatus {
    set_error("null pointer argument");
    IvxStatus::NullPointer
}

unsafe fn array<'a, T>(p: *const T, len: usize) -> Result<&'a [T], IvxStatus> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null())
    } else {
        Ok(slice::from_raw_parts(p, len))
    }
}

unsafe fn out<T>(p: *mut T, v: T) -> Result<(), IvxStatus> {
    if p.is_null() {
        return Err(null());
    }
    p.write(v);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ivx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ivx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Kind 0: `param·s²`; 1: `|s|`; 2: `|s|^param`; 3: Huber with threshold `param`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ivx_function_new(kind: u32, param: f64, out_fn: *mut *mut IvxFunction) -> IvxStatus {
    guard(|| {
        let g = match kind {
            0 => lift(UnivariateConvex::quadratic(param))?,
            1 => UnivariateConvex::AbsoluteValue,
            2 => lift(UnivariateConvex::power_abs(param))?,
            3 => lift(UnivariateConvex::huber(param))?,
            _ => {
                set_error(&format!("unknown function kind {kind}"));
                return Err(IvxStatus::InvalidArgument);
            }
        };
        out(out_fn, boxed(IvxFunction(g)))
    })
}

/// # Safety
/// `f` must come from [`ivx_function_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ivx_function_free(f: *mut IvxFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_function_eval(f: *const IvxFunction, s: f64, value: *mut f64) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        out(value, f.0.eval(s))
    })
}

/// `λ·g(v/λ)`, with the recession function at `λ = 0`; may be `+∞`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_function_perspective(f: *const IvxFunction, v: f64, lambda: f64, value: *mut f64) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        out(value, lift(f.0.perspective(v, lambda))?.to_f64())
    })
}

/// Envelope of `g(aᵀx)` with indicators at `(x, z)`. `nonneg` lists
/// zero-based indices constrained to `x_i ≥ 0`. The value may be `+∞`.
///
/// # Safety
/// `a`, `x`, `z` must hold `n` values; `nonneg` must hold `n_nonneg`.
#[no_mangle]
pub unsafe extern "C" fn ivx_envelope(
    g: *const IvxFunction,
    a: *const f64,
    n: usize,
    nonneg: *const usize,
    n_nonneg: usize,
    x: *const f64,
    z: *const f64,
    value: *mut f64,
) -> IvxStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(null)?;
        let inst = lift(RankOneInstance::homogeneous(array(a, n)?.to_vec(), array(nonneg, n_nonneg)?.to_vec(), g.0.clone()))?;
        let p = lift(EnvelopePoint::new(array(x, n)?.to_vec(), array(z, n)?.to_vec()))?;
        out(value, lift(envelope(&inst, &p))?.to_f64())
    })
}

/// Rotated-cone hull formulation of `(aᵀx)²` with indicators.
///
/// # Safety
/// `a` must hold `n` values, `nonneg` `n_nonneg`; `out_form` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_rank1_conic(
    a: *const f64,
    n: usize,
    nonneg: *const usize,
    n_nonneg: usize,
    out_form: *mut *mut IvxFormulation,
) -> IvxStatus {
    guard(|| {
        let g = lift(UnivariateConvex::quadratic(1.0))?;
        let inst = lift(RankOneInstance::homogeneous(array(a, n)?.to_vec(), array(nonneg, n_nonneg)?.to_vec(), g))?;
        let f = lift(build_conic_quadratic(&inst))?;
        out(out_form, boxed(IvxFormulation(f)))
    })
}

/// Seeded denoising instance and one of its formulations.
///
/// # Safety
/// `params` and `out_form` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_denoising_build(params: *const IvxDenoisingParams, out_form: *mut *mut IvxFormulation) -> IvxStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(null)?;
        let opt = |v: i64| usize::try_from(v).ok();
        let over = DenoisingOverrides { spikes: opt(p.spikes), k1: opt(p.k1), k2: opt(p.k2), ..Default::default() };
        let inst = lift(generate_denoising(p.n, p.ell, p.omega, p.seed, over))?;
        let kind = match p.kind {
            IvxDenoisingKind::Basic => DenoisingFormulation::Basic,
            IvxDenoisingKind::RankOne => DenoisingFormulation::RankOne,
            IvxDenoisingKind::RankTwo => DenoisingFormulation::RankTwo,
        };
        out(out_form, boxed(IvxFormulation(lift(kind.build(&inst))?)))
    })
}

/// Reads a JSON formulation.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_form` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_from_json(json: *const c_char, out_form: *mut *mut IvxFormulation) -> IvxStatus {
    guard(|| {
        if json.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("input is not UTF-8");
            IvxStatus::Parse
        })?;
        out(out_form, boxed(IvxFormulation(lift(import_json(text))?)))
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_free(f: *mut IvxFormulation) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_counts(f: *const IvxFormulation, vars: *mut usize, binaries: *mut usize) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        out(vars, f.0.num_vars())?;
        out(binaries, f.0.binaries().len())
    })
}

/// Writes the formulation as text; release it with [`ivx_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_export(f: *const IvxFormulation, format: IvxFormat, text: *mut *mut c_char) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        let fmt = match format {
            IvxFormat::Lp => ExportFormat::Lp,
            IvxFormat::Mps => ExportFormat::Mps,
            IvxFormat::Json => ExportFormat::Json,
        };
        let s = lift(export(&f.0, fmt))?;
        out(text, CString::new(s).map_err(|_| IvxStatus::Internal)?.into_raw())
    })
}

/// Continuous relaxation value.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_relax(f: *const IvxFormulation, tol: f64, value: *mut f64) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        let r = lift(solve_relaxation(&f.0.relaxed(), &SolveOptions::with_tol(tol)))?;
        out(value, r.value)
    })
}

/// Branch and bound; `value` is the incumbent, `bound` the proven lower bound.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_formulation_bnb(
    f: *const IvxFormulation,
    rel_gap: f64,
    node_limit: usize,
    value: *mut f64,
    bound: *mut f64,
    nodes: *mut usize,
) -> IvxStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(null)?;
        let opts = BnbOptions { rel_gap, node_limit, ..Default::default() };
        let r = lift(branch_and_bound(&f.0, &opts))?;
        out(value, r.value)?;
        out(bound, r.bound)?;
        out(nodes, r.nodes)
    })
}

/// Gap percentages. Pass NaN for any absent input.
///
/// # Safety
/// `report` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ivx_metrics(
    best: f64,
    cont: f64,
    basic: f64,
    rankone: f64,
    ranktwo: f64,
    bound: f64,
    report: *mut IvxMetrics,
) -> IvxStatus {
    guard(|| {
        let some = |v: f64| (!v.is_nan()).then_some(v);
        let m = compute_metrics(&MetricInputs {
            best,
            cont,
            basic: some(basic),
            rankone: some(rankone),
            ranktwo: some(ranktwo),
            bound: some(bound),
            ..Default::default()
        });
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        out(report, IvxMetrics { igap: nan(m.igap), egap: nan(m.egap), ri_basic: nan(m.ri_basic), ri_rankone: nan(m.ri_rankone) })
    })
}
