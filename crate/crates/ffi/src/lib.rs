//! C ABI for glasscert.
//!
//! Models live behind opaque [`GcNetwork`] handles; simulation results behind
//! [`GcSamples`]. Every fallible call returns a [`GcStatus`]; on failure the
//! message is available from [`gc_last_error_message`] on the same thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`gc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use glasscert::cli::{analyze, model_digest, resolve_cycle};
use glasscert::graph::{build_graph, find_deterministic_cycles};
use glasscert::model::parse_network;
use glasscert::return_map::certify;
use glasscert::simulate::{run, sample, DEFAULT_MAX_EVENTS};
use glasscert::{DomainIndex, Error, Network, Tolerances};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed model, bad argument or violated precondition.
    InvalidInput = 3,
    /// The cycle violates a hypothesis of the return-map theorem.
    AssumptionViolated = 4,
    /// A numerical degeneracy or non-convergence.
    Numerical = 5,
    /// An output buffer is too short.
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// Opaque model handle.
pub struct GcNetwork {
    net: Network,
    digest: String,
}

/// Opaque sampled trajectory.
pub struct GcSamples {
    samples: Vec<(f64, Vec<f64>)>,
    dimension: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: GcStatus, message: &str) -> GcStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> GcStatus {
    match e {
        Error::AssumptionViolated(_) => GcStatus::AssumptionViolated,
        Error::Codimension2Exit { .. }
        | Error::WallNormalDegeneracy { .. }
        | Error::OrbitLeavesCycle { .. }
        | Error::MaxIterations(_)
        | Error::InteriorEquilibrium(_) => GcStatus::Numerical,
        _ => GcStatus::InvalidInput,
    }
}

fn from_error(e: Error) -> GcStatus {
    fail(status_of(&e), &e.to_string())
}

/// Runs `f`, turning panics into [`GcStatus::Internal`].
fn guard(f: impl FnOnce() -> GcStatus) -> GcStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(GcStatus::Internal, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, GcStatus> {
    if s.is_null() {
        return Err(fail(GcStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(GcStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(text: String, out: *mut *mut c_char) -> GcStatus {
    match CString::new(text) {
        Ok(c) => {
            *out = c.into_raw();
            GcStatus::Ok
        }
        Err(_) => fail(GcStatus::Internal, "output contains a nul byte"),
    }
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON model into a new handle stored in `*out`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_network_from_json(json: *const c_char, out: *mut *mut GcNetwork) -> GcStatus {
    guard(|| {
        if out.is_null() {
            return fail(GcStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_network(text) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(GcNetwork {
                    net,
                    digest: model_digest(text),
                }));
                GcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `net` must come from [`gc_network_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gc_network_free(net: *mut GcNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of variables; 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_network_dimension(net: *const GcNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.net.dim())
}

/// Writes the focal point of the domain with 0-based segment indices
/// `domain[0..len]` into `out[0..out_len]`.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn gc_focal_point(
    net: *const GcNetwork,
    domain: *const usize,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> GcStatus {
    guard(|| {
        let Some(h) = net.as_ref() else {
            return fail(GcStatus::NullPointer, "null network");
        };
        if domain.is_null() || out.is_null() {
            return fail(GcStatus::NullPointer, "null buffer");
        }
        let a = DomainIndex(std::slice::from_raw_parts(domain, len).to_vec());
        if let Err(e) = h.net.check_domain(&a) {
            return from_error(e);
        }
        let phi = h.net.focal_point(&a);
        if out_len < phi.len() {
            return fail(GcStatus::BufferTooSmall, "output buffer shorter than the dimension");
        }
        std::slice::from_raw_parts_mut(out, phi.len()).copy_from_slice(&phi);
        GcStatus::Ok
    })
}

fn tolerances() -> Result<Tolerances, GcStatus> {
    Tolerances::from_env().map_err(from_error)
}

/// Full analysis report as JSON in `*out`.
///
/// # Safety
/// `net` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gc_analyze_json(net: *const GcNetwork, out: *mut *mut c_char) -> GcStatus {
    guard(|| {
        let (Some(h), false) = (net.as_ref(), out.is_null()) else {
            return fail(GcStatus::NullPointer, "null argument");
        };
        let tol = match tolerances() {
            Ok(t) => t,
            Err(s) => return s,
        };
        let report = analyze(&h.net, &h.digest, &tol);
        write_string(serde_json::to_string(&report).expect("report serializes"), out)
    })
}

/// Certification of one cycle as JSON in `*out`. `cycle` is an id or a
/// comma-separated domain list, or null when the model has a single
/// deterministic cycle.
///
/// # Safety
/// `net` must be a live handle, `cycle` null or nul-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gc_certify_json(
    net: *const GcNetwork,
    cycle: *const c_char,
    out: *mut *mut c_char,
) -> GcStatus {
    guard(|| {
        let (Some(h), false) = (net.as_ref(), out.is_null()) else {
            return fail(GcStatus::NullPointer, "null argument");
        };
        let tol = match tolerances() {
            Ok(t) => t,
            Err(s) => return s,
        };
        let cycles = find_deterministic_cycles(&build_graph(&h.net));
        let chosen = if cycle.is_null() {
            match cycles.as_slice() {
                [only] => only,
                _ => {
                    return fail(
                        GcStatus::InvalidInput,
                        &format!("model has {} deterministic cycles; name one", cycles.len()),
                    )
                }
            }
        } else {
            let key = match read_str(cycle) {
                Ok(k) => k,
                Err(s) => return s,
            };
            match resolve_cycle(&cycles, key) {
                Ok(c) => c,
                Err(e) => return fail(GcStatus::InvalidInput, &e.message),
            }
        };
        match certify(&h.net, chosen, &tol) {
            Ok(a) => write_string(serde_json::to_string(&a).expect("analysis serializes"), out),
            Err(e) => from_error(e),
        }
    })
}

/// Simulates from `x0[0..len]` until `t_max` and samples every `dt`.
///
/// # Safety
/// `net` must be a live handle, `x0` valid for `len` reads, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gc_simulate(
    net: *const GcNetwork,
    x0: *const f64,
    len: usize,
    t_max: f64,
    dt: f64,
    out: *mut *mut GcSamples,
) -> GcStatus {
    guard(|| {
        let (Some(h), false, false) = (net.as_ref(), x0.is_null(), out.is_null()) else {
            return fail(GcStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        if !(dt.is_finite() && dt > 0.0) {
            return fail(GcStatus::InvalidInput, "dt must be positive");
        }
        let tol = match tolerances() {
            Ok(t) => t,
            Err(s) => return s,
        };
        let x = std::slice::from_raw_parts(x0, len);
        match run(&h.net, x, t_max, DEFAULT_MAX_EVENTS, &tol) {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(GcSamples {
                    samples: sample(&traj, &h.net, dt),
                    dimension: h.net.dim(),
                }));
                GcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_samples_len(s: *const GcSamples) -> usize {
    s.as_ref().map_or(0, |s| s.samples.len())
}

/// State dimension of each sample; 0 for null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gc_samples_dimension(s: *const GcSamples) -> usize {
    s.as_ref().map_or(0, |s| s.dimension)
}

/// Copies sample `index` into `*t` and `x[0..x_len]`.
///
/// # Safety
/// `s` must be a live handle, `t` valid, `x` valid for `x_len` writes.
#[no_mangle]
pub unsafe extern "C" fn gc_samples_get(
    s: *const GcSamples,
    index: usize,
    t: *mut f64,
    x: *mut f64,
    x_len: usize,
) -> GcStatus {
    guard(|| {
        let (Some(s), false, false) = (s.as_ref(), t.is_null(), x.is_null()) else {
            return fail(GcStatus::NullPointer, "null argument");
        };
        let Some((ts, xs)) = s.samples.get(index) else {
            return fail(GcStatus::InvalidInput, "sample index out of range");
        };
        if x_len < xs.len() {
            return fail(GcStatus::BufferTooSmall, "state buffer shorter than the dimension");
        }
        *t = *ts;
        std::slice::from_raw_parts_mut(x, xs.len()).copy_from_slice(xs);
        GcStatus::Ok
    })
}

/// Releases samples; null is ignored.
///
/// # Safety
/// `s` must come from [`gc_simulate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gc_samples_free(s: *mut GcSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
