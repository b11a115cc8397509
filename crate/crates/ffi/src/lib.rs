//! C ABI for `matchvol`.
//!
//! Every fallible call returns an [`MvStatus`] whose values match the CLI exit
//! codes; on failure `mv_last_error_message` describes the error on the calling
//! thread. Handles are opaque and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use matchvol::expansion::{approximate_volume, validate_plan, PlanOptions, VolumeApproximation};
use matchvol::geometry::DEFAULT_DIMENSION_CAP;
use matchvol::oracle::volume_bruteforce_with_cap;
use matchvol::polymer::Mode;
use matchvol::rational::{decimal_string, fraction_string, parse_fraction};
use matchvol::{Error, Hypergraph};

/// Significant digits of the decimal volume string.
const DIGITS: usize = 20;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvStatus {
    Ok = 0,
    /// Malformed input, bad argument or null pointer.
    InvalidInput = 2,
    /// δ outside the certified range and `force` not set.
    Inadmissible = 3,
    /// A size or dimension cap was exceeded.
    ResourceLimit = 4,
    /// Internal invariant violation or panic.
    Internal = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvMode {
    Auto = 0,
    Graph = 1,
    Mcs = 2,
}

/// Zero-valued fields select the defaults.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MvOptions {
    pub mode: MvMode,
    pub max_cluster_size: usize,
    pub dimension_cap: usize,
    pub force: bool,
}

/// Opaque hypergraph handle.
pub struct MvHypergraph(Hypergraph);

/// Opaque result handle.
pub struct MvResult {
    approx: VolumeApproximation,
    truncation_depth: usize,
    log_xi: CString,
    volume: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn fail(status: MvStatus, message: String) -> MvStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> MvStatus {
    let status = match e.exit_code() {
        3 => MvStatus::Inadmissible,
        4 => MvStatus::ResourceLimit,
        5 => MvStatus::Internal,
        _ => MvStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> MvStatus) -> MvStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(MvStatus::Internal, "panic inside matchvol".into()))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, MvStatus> {
    if p.is_null() {
        return Err(fail(MvStatus::InvalidInput, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MvStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Options with every field at its default.
#[no_mangle]
pub extern "C" fn mv_options_default() -> MvOptions {
    MvOptions {
        mode: MvMode::Auto,
        max_cluster_size: 0,
        dimension_cap: 0,
        force: false,
    }
}

/// Parses the instance text format (one hyperedge per line, `#` comments).
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_parse(text: *const c_char, out: *mut *mut MvHypergraph) -> MvStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MvStatus::InvalidInput, "out is null".into());
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Hypergraph::parse(text) {
            Ok(h) => {
                *out = Box::into_raw(Box::new(MvHypergraph(h)));
                MvStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a hypergraph from edges in compressed form: edge `i` is
/// `vertices[offsets[i] .. offsets[i+1]]`, so `offsets` has `edge_count + 1`
/// entries.
///
/// # Safety
/// `vertices` must hold `offsets[edge_count]` entries, `offsets` must hold
/// `edge_count + 1` entries, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_from_edges(
    vertices: *const u32,
    offsets: *const usize,
    edge_count: usize,
    out: *mut *mut MvHypergraph,
) -> MvStatus {
    guarded(|| {
        if out.is_null() || offsets.is_null() || (vertices.is_null() && edge_count > 0) {
            return fail(MvStatus::InvalidInput, "null pointer argument".into());
        }
        let offsets = std::slice::from_raw_parts(offsets, edge_count + 1);
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return fail(MvStatus::InvalidInput, "offsets must be nondecreasing".into());
        }
        let vertices = if edge_count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(vertices, offsets[edge_count])
        };
        let edges: Vec<Vec<u32>> = offsets
            .windows(2)
            .map(|w| vertices[w[0]..w[1]].to_vec())
            .collect();
        if edges.is_empty() {
            return fail(MvStatus::InvalidInput, "at least one hyperedge is required".into());
        }
        match Hypergraph::from_edges(edges) {
            Ok(h) => {
                *out = Box::into_raw(Box::new(MvHypergraph(h)));
                MvStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `h` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_free(h: *mut MvHypergraph) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_num_vertices(h: *const MvHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.0.num_vertices())
}

/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_num_edges(h: *const MvHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.0.num_edges())
}

/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_hypergraph_max_degree(h: *const MvHypergraph) -> usize {
    h.as_ref().map_or(0, |h| h.0.max_degree())
}

fn plan_options(options: Option<&MvOptions>) -> PlanOptions {
    let mut out = PlanOptions::default();
    if let Some(o) = options {
        out.mode = match o.mode {
            MvMode::Auto => None,
            MvMode::Graph => Some(Mode::Graph),
            MvMode::Mcs => Some(Mode::Mcs),
        };
        out.max_cluster_size = (o.max_cluster_size > 0).then_some(o.max_cluster_size);
        if o.dimension_cap > 0 {
            out.dimension_cap = o.dimension_cap;
        }
        out.force = o.force;
    }
    out
}

/// Runs the cluster-expansion approximation. `delta` is a rational literal
/// such as `"1/250"`; `options` may be null.
///
/// # Safety
/// `h` must be a live handle, `delta` nul-terminated, `options` null or valid,
/// and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mv_approximate_volume(
    h: *const MvHypergraph,
    delta: *const c_char,
    epsilon: f64,
    options: *const MvOptions,
    out: *mut *mut MvResult,
) -> MvStatus {
    guarded(|| {
        let Some(h) = h.as_ref() else {
            return fail(MvStatus::InvalidInput, "hypergraph is null".into());
        };
        if out.is_null() {
            return fail(MvStatus::InvalidInput, "out is null".into());
        }
        let delta = match read_str(delta, "delta") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let run = || -> matchvol::Result<MvResult> {
            let delta = parse_fraction(delta)?;
            let plan = validate_plan(&h.0, &delta, epsilon, &plan_options(options.as_ref()))?;
            let approx = approximate_volume(&h.0, &plan)?;
            Ok(MvResult {
                truncation_depth: plan.truncation_depth,
                log_xi: CString::new(fraction_string(&approx.log_xi)).expect("no nul"),
                volume: CString::new(decimal_string(&approx.volume, DIGITS)).expect("no nul"),
                approx,
            })
        };
        match run() {
            Ok(r) => {
                *out = Box::into_raw(Box::new(r));
                MvStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `r` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mv_result_free(r: *mut MvResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Natural log of the volume estimate; NaN for a null handle.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_log_volume(r: *const MvResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.approx.log_volume.to_f64().value())
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_volume(r: *const MvResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.approx.volume.to_f64().value())
}

/// Volume as a 20-digit decimal string owned by the result.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_volume_string(r: *const MvResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.volume.as_ptr())
}

/// The truncated `log Ξ` as an exact fraction `p/q`, owned by the result.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_log_xi(r: *const MvResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.log_xi.as_ptr())
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_truncation_depth(r: *const MvResult) -> usize {
    r.as_ref().map_or(0, |r| r.truncation_depth)
}

/// Bound on the discarded part of `log Ξ`.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_tail_bound(r: *const MvResult) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.approx.diagnostics.tail_bound)
}

/// False for forced runs outside the certified range.
///
/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_guarantee(r: *const MvResult) -> bool {
    r.as_ref().is_some_and(|r| r.approx.diagnostics.guarantee)
}

/// # Safety
/// `r` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mv_result_cluster_count(r: *const MvResult) -> usize {
    r.as_ref().map_or(0, |r| r.approx.diagnostics.support_count)
}

/// Exact volume of the truncated polytope as a fraction string; release it
/// with `mv_string_free`.
///
/// # Safety
/// `h` must be a live handle, `delta` nul-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mv_volume_exact(
    h: *const MvHypergraph,
    delta: *const c_char,
    dimension_cap: usize,
    out: *mut *mut c_char,
) -> MvStatus {
    guarded(|| {
        let Some(h) = h.as_ref() else {
            return fail(MvStatus::InvalidInput, "hypergraph is null".into());
        };
        if out.is_null() {
            return fail(MvStatus::InvalidInput, "out is null".into());
        }
        let delta = match read_str(delta, "delta") {
            Ok(d) => d,
            Err(s) => return s,
        };
        let cap = if dimension_cap == 0 { DEFAULT_DIMENSION_CAP } else { dimension_cap };
        match parse_fraction(delta).and_then(|d| volume_bruteforce_with_cap(&h.0, &d, cap)) {
            Ok(v) => {
                *out = CString::new(fraction_string(&v)).expect("no nul").into_raw();
                MvStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn mv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn mv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
