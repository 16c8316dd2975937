//! C ABI over the sturmkit pipeline. Handles are opaque pointers created and
//! destroyed here; every fallible call returns a status code and leaves a
//! thread-local message retrievable with `sturm_last_error_message`.
//!
//! The generated header lives in `include/sturmkit.h`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use sturmkit::config::RunConfig;
use sturmkit::connection::ConnectionGraph;
use sturmkit::invariants::{build_sturm_data, InvariantOptions, SturmData};
use sturmkit::problem::ProblemSpec;
use sturmkit::shooting::{find_equilibria, scan_curve, Equilibrium, ShootOptions};
use sturmkit::{build_connection_graph, report, SturmError};

/// Status codes mirroring the CLI exit-code contract.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SturmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NonHyperbolic = 2,
    Inconsistent = 3,
    UnresolvedProbe = 4,
    NumericalError = 5,
    NullPointer = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

fn status_of(err: &SturmError) -> SturmStatus {
    match err {
        SturmError::InvalidParameter(_) | SturmError::Config(_) => SturmStatus::InvalidArgument,
        SturmError::NonHyperbolic { .. } => SturmStatus::NonHyperbolic,
        SturmError::Inconsistency { .. } => SturmStatus::Inconsistent,
        SturmError::UnresolvedProbe { .. } | SturmError::ProbesUnresolved { .. } => {
            SturmStatus::UnresolvedProbe
        }
        _ => SturmStatus::NumericalError,
    }
}

fn fail(err: &SturmError) -> SturmStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Opaque problem handle.
pub struct SturmProblem {
    spec: ProblemSpec,
}

/// Opaque handle over the computed attractor: equilibria, Sturm data and the
/// connection graph.
pub struct SturmAttractor {
    eqs: Vec<Equilibrium>,
    data: SturmData,
    graph: ConnectionGraph,
}

/// Message describing the most recent failure on this thread. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sturm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a problem from a builtin family id ("chafee_infante",
/// "chafee_infante_semilinear", "odd_cubic") and a parameter map given as
/// parallel arrays.
///
/// # Safety
/// `family` must be a NUL-terminated string; `param_keys` and `param_values`
/// must point to `n_params` valid entries; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sturm_problem_new(
    family: *const c_char,
    param_keys: *const *const c_char,
    param_values: *const f64,
    n_params: usize,
    out: *mut *mut SturmProblem,
) -> SturmStatus {
    if family.is_null() || out.is_null() || (n_params > 0 && (param_keys.is_null() || param_values.is_null())) {
        set_error("null pointer argument");
        return SturmStatus::NullPointer;
    }
    let family = match CStr::from_ptr(family).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("family id is not valid UTF-8");
            return SturmStatus::InvalidArgument;
        }
    };
    let mut params = BTreeMap::new();
    for i in 0..n_params {
        let key_ptr = *param_keys.add(i);
        if key_ptr.is_null() {
            set_error("null parameter key");
            return SturmStatus::NullPointer;
        }
        let key = match CStr::from_ptr(key_ptr).to_str() {
            Ok(s) => s.to_string(),
            Err(_) => {
                set_error("parameter key is not valid UTF-8");
                return SturmStatus::InvalidArgument;
            }
        };
        params.insert(key, *param_values.add(i));
    }
    match ProblemSpec::from_family(family, &params) {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(SturmProblem { spec }));
            SturmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Create a problem from a TOML run-configuration document (the same format
/// the CLI consumes).
///
/// # Safety
/// `toml_text` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sturm_problem_from_config(
    toml_text: *const c_char,
    out: *mut *mut SturmProblem,
) -> SturmStatus {
    if toml_text.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SturmStatus::NullPointer;
    }
    let text = match CStr::from_ptr(toml_text).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("config is not valid UTF-8");
            return SturmStatus::InvalidArgument;
        }
    };
    let cfg = match RunConfig::from_toml(text) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match cfg.build_problem() {
        Ok(spec) => {
            *out = Box::into_raw(Box::new(SturmProblem { spec }));
            SturmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// # Safety
/// `p` must come from a `sturm_problem_*` constructor (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn sturm_problem_free(p: *mut SturmProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Run the full combinatorial pipeline (scan, roots, invariants, graph) with
/// `n_init` initial shots (pass 0 for the default of 64).
///
/// # Safety
/// `p` must be a valid problem handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_compute(
    p: *const SturmProblem,
    n_init: usize,
    out: *mut *mut SturmAttractor,
) -> SturmStatus {
    if p.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SturmStatus::NullPointer;
    }
    let spec = &(*p).spec;
    let opts = ShootOptions::default();
    let n_init = if n_init == 0 { 64 } else { n_init };
    let result = (|| -> sturmkit::Result<SturmAttractor> {
        let curve = scan_curve(spec, n_init, &opts)?;
        let mut eqs = find_equilibria(spec, &curve, &opts)?;
        let data = build_sturm_data(spec, &curve, &mut eqs, &opts, &InvariantOptions::default())?;
        let a_values: Vec<f64> = eqs.iter().map(|e| e.a).collect();
        let graph = build_connection_graph(&data, &a_values)?;
        Ok(SturmAttractor { eqs, data, graph })
    })();
    match result {
        Ok(attractor) => {
            *out = Box::into_raw(Box::new(attractor));
            SturmStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// # Safety
/// `a` must come from `sturm_attractor_compute` (or be NULL).
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_free(a: *mut SturmAttractor) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Number of equilibria, or 0 for a NULL handle.
///
/// # Safety
/// `a` must be a valid attractor handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_count(a: *const SturmAttractor) -> usize {
    if a.is_null() {
        return 0;
    }
    (*a).data.n
}

unsafe fn fill<T: Copy>(dst: *mut T, len: usize, src: impl ExactSizeIterator<Item = T>) -> SturmStatus {
    if dst.is_null() {
        set_error("null output buffer");
        return SturmStatus::NullPointer;
    }
    if len != src.len() {
        set_error("output buffer length does not match the equilibrium count");
        return SturmStatus::InvalidArgument;
    }
    for (i, v) in src.enumerate() {
        *dst.add(i) = v;
    }
    SturmStatus::Ok
}

/// Boundary values u(0) (and u(pi) if `b` is non-NULL) in curve order.
///
/// # Safety
/// Buffers must hold `len` doubles; `a` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_boundary_values(
    a: *const SturmAttractor,
    a_out: *mut f64,
    b_out: *mut f64,
    len: usize,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    let eqs = &(*a).eqs;
    let status = fill(a_out, len, eqs.iter().map(|e| e.a));
    if status != SturmStatus::Ok {
        return status;
    }
    if b_out.is_null() {
        return SturmStatus::Ok;
    }
    fill(b_out, len, eqs.iter().map(|e| e.b))
}

/// Morse indices in curve order.
///
/// # Safety
/// `out` must hold `len` u32; `a` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_morse(
    a: *const SturmAttractor,
    out: *mut u32,
    len: usize,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    fill(out, len, (*a).data.morse.iter().map(|&m| m as u32))
}

/// Fusco-Rocha permutation in one-line notation (1-based curve indices).
///
/// # Safety
/// `out` must hold `len` u32; `a` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_sigma(
    a: *const SturmAttractor,
    out: *mut u32,
    len: usize,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    fill(out, len, (*a).data.sigma.iter().map(|&s| s as u32))
}

/// Zero number z(e_j - e_k), 1-based; the diagonal returns -1 by the
/// convention for the identically zero function.
///
/// # Safety
/// `a` must be a valid handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_zero_number(
    a: *const SturmAttractor,
    j: usize,
    k: usize,
    out: *mut i64,
) -> SturmStatus {
    if a.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SturmStatus::NullPointer;
    }
    let data = &(*a).data;
    if j == 0 || k == 0 || j > data.n || k > data.n {
        set_error("zero-number index out of range");
        return SturmStatus::InvalidArgument;
    }
    *out = data.zmat[j - 1][k - 1];
    SturmStatus::Ok
}

/// Number of heteroclinic connections (edges of the graph).
///
/// # Safety
/// `a` must be a valid attractor handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_edge_count(a: *const SturmAttractor) -> usize {
    if a.is_null() {
        return 0;
    }
    (*a).graph.edges.len()
}

/// All edges as parallel (source, target) arrays of 1-based indices.
///
/// # Safety
/// Both buffers must hold `len` u32; `a` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_edges(
    a: *const SturmAttractor,
    sources: *mut u32,
    targets: *mut u32,
    len: usize,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    let edges = &(*a).graph.edges;
    let status = fill(sources, len, edges.iter().map(|e| e.source as u32));
    if status != SturmStatus::Ok {
        return status;
    }
    fill(targets, len, edges.iter().map(|e| e.target as u32))
}

/// 1 if a heteroclinic source -> target exists, 0 if not, -1 on NULL.
///
/// # Safety
/// `a` must be a valid attractor handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_has_edge(
    a: *const SturmAttractor,
    source: u32,
    target: u32,
) -> i32 {
    if a.is_null() {
        return -1;
    }
    (*a).graph.has_edge(source as usize, target as usize) as i32
}

unsafe fn string_out(out: *mut *mut c_char, text: String) -> SturmStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SturmStatus::NullPointer;
    }
    match CString::new(text) {
        Ok(s) => {
            *out = s.into_raw();
            SturmStatus::Ok
        }
        Err(_) => {
            set_error("document contains interior NUL");
            SturmStatus::NumericalError
        }
    }
}

/// The Sturm data document as JSON; free with `sturm_string_free`.
///
/// # Safety
/// `a` must be a valid handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_sturm_json(
    a: *const SturmAttractor,
    out: *mut *mut c_char,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    string_out(out, report::sturm_json(&(*a).data))
}

/// The connection graph in DOT format; free with `sturm_string_free`.
///
/// # Safety
/// `a` must be a valid handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sturm_attractor_dot(
    a: *const SturmAttractor,
    out: *mut *mut c_char,
) -> SturmStatus {
    if a.is_null() {
        set_error("null attractor handle");
        return SturmStatus::NullPointer;
    }
    match report::attractor_dot(&(*a).graph) {
        Ok(dot) => string_out(out, dot),
        Err(e) => fail(&e),
    }
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `sturm_*` call (or be NULL), and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sturm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
