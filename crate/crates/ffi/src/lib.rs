//! C ABI for `alexot`.
//!
//! Conventions shared by every function:
//!
//! * Fallible calls return an [`AlexotStatus`]; results go through out
//!   pointers, which are written only on success (and on
//!   [`AlexotStatus::VerificationFailed`], where the report is still produced).
//! * On any other status a message is stored per thread and can be read with
//!   [`alexot_last_error`] until the next failing call on that thread.
//! * Handles are opaque and owned by the caller once returned; release them
//!   with the matching `_free` function. Strings returned through `char **`
//!   are released with [`alexot_string_free`].
//! * Panics never cross the boundary; they surface as [`AlexotStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use alexot::comparison::check_triangle_comparison;
use alexot::costs::CostMatrix;
use alexot::duality::PotentialPair;
use alexot::instance::Instance;
use alexot::monge::{default_fd_step, default_tol, verify_graph_and_formula, verify_uniqueness};
use alexot::solver::{duality_gap, slackness_residual, solve_exact, TransportPlan};
use alexot::{Error, Point, Space};
use serde::Serialize;

/// Result of an FFI call. The first four values match the exit codes of
/// the `alexot` command line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlexotStatus {
    Ok = 0,
    /// The computation ran but a check did not pass; the report is valid.
    VerificationFailed = 1,
    InvalidInput = 2,
    /// The request exceeds what the implementation supports.
    Unsupported = 3,
    NullPointer = 4,
    /// A point was singular, tied or not differentiable where it had to be.
    Numerical = 5,
    Internal = 6,
}

/// A validated transport instance.
pub struct AlexotInstance {
    inner: Instance,
}

/// An optimal plan with its centred dual potentials.
pub struct AlexotSolution {
    plan: TransportPlan,
    pair: PotentialPair,
    cost: CostMatrix,
    gap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> AlexotStatus {
    match e {
        Error::Size(_) => AlexotStatus::Unsupported,
        Error::Singular(_) | Error::NotDifferentiable(_) | Error::Degenerate(_) | Error::Chart(_) => AlexotStatus::Numerical,
        Error::Validation(_) | Error::Domain(_) | Error::Io(_) | Error::Json(_) => AlexotStatus::InvalidInput,
    }
}

struct Failure(AlexotStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AlexotStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last error message.
fn guard(f: impl FnOnce() -> Result<AlexotStatus, Failure>) -> AlexotStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            AlexotStatus::Internal
        }
    }
}

/// # Safety
/// `s` is null or a NUL-terminated string valid for the call.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(AlexotStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `p` is null or valid for reads for the call.
unsafe fn read_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_json<T: Serialize>(value: &T) -> Result<*mut c_char, Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure(AlexotStatus::Internal, e.to_string()))?;
    CString::new(text).map(CString::into_raw).map_err(|_| Failure(AlexotStatus::Internal, "report contains a NUL byte".into()))
}

fn parse_space(text: &str) -> Result<Space, Failure> {
    serde_json::from_str(text).map_err(|e| Failure(AlexotStatus::InvalidInput, format!("space: {e}")))
}

/// Message describing the most recent failure on this thread, or null.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn alexot_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn alexot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or was returned through a `char **` out parameter of this
/// library and has not been freed.
#[no_mangle]
pub unsafe extern "C" fn alexot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates an instance from JSON.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_instance_from_json(json: *const c_char, out: *mut *mut AlexotInstance) -> AlexotStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Instance::from_json(text)?;
        *out = Box::into_raw(Box::new(AlexotInstance { inner }));
        Ok(AlexotStatus::Ok)
    })
}

/// Serialises an instance back to JSON.
///
/// # Safety
/// `instance` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_instance_to_json(instance: *const AlexotInstance, out: *mut *mut c_char) -> AlexotStatus {
    guard(|| {
        let inst = read_ref(instance, "instance")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_json(&inst.inner)?;
        Ok(AlexotStatus::Ok)
    })
}

/// Number of source atoms, or 0 for a null handle.
///
/// # Safety
/// `instance` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alexot_instance_source_len(instance: *const AlexotInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.source.len())
}

/// Number of target atoms, or 0 for a null handle.
///
/// # Safety
/// `instance` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alexot_instance_target_len(instance: *const AlexotInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.target.len())
}

/// # Safety
/// `instance` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn alexot_instance_free(instance: *mut AlexotInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Solves the discrete transport problem exactly.
///
/// # Safety
/// `instance` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_solve(instance: *const AlexotInstance, out: *mut *mut AlexotSolution) -> AlexotStatus {
    guard(|| {
        let inst = &read_ref(instance, "instance")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let cost = inst.cost.matrix(&inst.space, &inst.source.points(), &inst.target.points())?;
        let (plan, pair) = solve_exact(&cost, &inst.source.weights(), &inst.target.weights())?;
        let gap = duality_gap(&plan, &pair, &inst.source, &inst.target)?;
        *out = Box::into_raw(Box::new(AlexotSolution { plan, pair, cost, gap }));
        Ok(AlexotStatus::Ok)
    })
}

/// Optimal total cost, or NaN for a null handle.
///
/// # Safety
/// `solution` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_cost(solution: *const AlexotSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.plan.cost_total())
}

/// Primal cost minus dual objective, or NaN for a null handle.
///
/// # Safety
/// `solution` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_gap(solution: *const AlexotSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.gap)
}

/// Number of cells in the support of the plan, or 0 for a null handle.
///
/// # Safety
/// `solution` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_support_len(solution: *const AlexotSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.plan.entries().len())
}

/// Copies the support of the plan into three caller arrays of length `len`,
/// which must equal [`alexot_solution_support_len`].
///
/// # Safety
/// `solution` is a live handle; each array is valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_plan(
    solution: *const AlexotSolution,
    sources: *mut usize,
    targets: *mut usize,
    masses: *mut f64,
    len: usize,
) -> AlexotStatus {
    guard(|| {
        let s = read_ref(solution, "solution")?;
        if sources.is_null() || targets.is_null() || masses.is_null() {
            return Err(null("output array"));
        }
        let entries = s.plan.entries();
        if len != entries.len() {
            return Err(Failure(AlexotStatus::InvalidInput, format!("plan has {} cells, buffers hold {len}", entries.len())));
        }
        for (k, e) in entries.iter().enumerate() {
            *sources.add(k) = e.source;
            *targets.add(k) = e.target;
            *masses.add(k) = e.mass;
        }
        Ok(AlexotStatus::Ok)
    })
}

/// Copies `φ` (length `n`, the source count) and `φᶜ` (length `m`, the
/// target count) into caller arrays.
///
/// # Safety
/// `solution` is a live handle; `phi` is valid for `n` writes and `phi_c`
/// for `m` writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_potentials(
    solution: *const AlexotSolution,
    phi: *mut f64,
    n: usize,
    phi_c: *mut f64,
    m: usize,
) -> AlexotStatus {
    guard(|| {
        let s = read_ref(solution, "solution")?;
        if phi.is_null() || phi_c.is_null() {
            return Err(null("output array"));
        }
        if n != s.pair.phi.len() || m != s.pair.phi_c.len() {
            return Err(Failure(
                AlexotStatus::InvalidInput,
                format!("potentials have lengths {}/{}, buffers hold {n}/{m}", s.pair.phi.len(), s.pair.phi_c.len()),
            ));
        }
        ptr::copy_nonoverlapping(s.pair.phi.as_ptr(), phi, n);
        ptr::copy_nonoverlapping(s.pair.phi_c.as_ptr(), phi_c, m);
        Ok(AlexotStatus::Ok)
    })
}

/// The solution as `{"plan": [[i, j, mass], ...], "cost", "phi", "phi_c",
/// "gap", "slackness_residual"}`.
///
/// # Safety
/// `solution` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_to_json(solution: *const AlexotSolution, out: *mut *mut c_char) -> AlexotStatus {
    guard(|| {
        let s = read_ref(solution, "solution")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = to_json(&serde_json::json!({
            "plan": s.plan.entries(),
            "cost": s.plan.cost_total(),
            "phi": s.pair.phi,
            "phi_c": s.pair.phi_c,
            "gap": s.gap,
            "slackness_residual": slackness_residual(&s.cost, &s.plan, &s.pair),
        }))?;
        Ok(AlexotStatus::Ok)
    })
}

/// # Safety
/// `solution` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn alexot_solution_free(solution: *mut AlexotSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Geodesic distance between two points given by `dim` coordinates each
/// (2 for the plane and cones in polar form, 3 for the sphere).
///
/// # Safety
/// `space_json` is a NUL-terminated string; `x` and `y` are valid for `dim`
/// reads; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_distance(
    space_json: *const c_char,
    x: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> AlexotStatus {
    guard(|| {
        let space = parse_space(read_str(space_json, "space_json")?)?;
        if x.is_null() || y.is_null() {
            return Err(null("point"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = Point::from_slice(std::slice::from_raw_parts(x, dim))?;
        let q = Point::from_slice(std::slice::from_raw_parts(y, dim))?;
        *out = space.distance(&p, &q)?;
        Ok(AlexotStatus::Ok)
    })
}

/// Sampled triangle comparison of `space_json` against curvature `k`.
/// Writes the JSON report and returns `Ok` or `VerificationFailed`.
///
/// # Safety
/// `space_json` is a NUL-terminated string; `report` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_verify_curvature(
    space_json: *const c_char,
    k: f64,
    samples: usize,
    seed: u64,
    tol: f64,
    report: *mut *mut c_char,
) -> AlexotStatus {
    guard(|| {
        let space = parse_space(read_str(space_json, "space_json")?)?;
        if report.is_null() {
            return Err(null("report"));
        }
        let r = check_triangle_comparison(&space, k, samples, seed, tol)?;
        *report = to_json(&r)?;
        Ok(if r.passed { AlexotStatus::Ok } else { AlexotStatus::VerificationFailed })
    })
}

/// Graph concentration and map formula check on the instance. Non-positive
/// `fd_step` or `tol` select the defaults.
///
/// # Safety
/// `instance` is a live handle; `report` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_verify_map(
    instance: *const AlexotInstance,
    fd_step: f64,
    tol: f64,
    report: *mut *mut c_char,
) -> AlexotStatus {
    guard(|| {
        let inst = &read_ref(instance, "instance")?.inner;
        if report.is_null() {
            return Err(null("report"));
        }
        let h = if fd_step > 0.0 {
            fd_step
        } else {
            let mut all = inst.source.points();
            all.extend(inst.target.points());
            default_fd_step(&inst.space, &all)
        };
        let tol = if tol > 0.0 { tol } else { default_tol(&inst.space) };
        let r = verify_graph_and_formula(&inst.space, &inst.cost, &inst.source, &inst.target, h, tol)?;
        *report = to_json(&r)?;
        Ok(if r.passed { AlexotStatus::Ok } else { AlexotStatus::VerificationFailed })
    })
}

/// Compares optimal assignments across pivot rules and `trials` random
/// cost perturbations of size at most `perturbation`.
///
/// # Safety
/// `instance` is a live handle; `report` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn alexot_verify_uniqueness(
    instance: *const AlexotInstance,
    perturbation: f64,
    trials: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> AlexotStatus {
    guard(|| {
        let inst = &read_ref(instance, "instance")?.inner;
        if report.is_null() {
            return Err(null("report"));
        }
        let r = verify_uniqueness(&inst.space, &inst.cost, &inst.source, &inst.target, perturbation, trials, seed)?;
        *report = to_json(&r)?;
        Ok(if r.passed { AlexotStatus::Ok } else { AlexotStatus::VerificationFailed })
    })
}
