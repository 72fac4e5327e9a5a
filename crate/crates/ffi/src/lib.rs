//! C ABI for poplabel.
//!
//! Every fallible call returns a [`PlStatus`]; on failure the message is
//! available from [`pl_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function. Strings
//! returned through out-pointers are owned by the caller and released with
//! [`pl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use poplabel::engine::{LeaderMode, RunLimits, RunRecord};
use poplabel::experiments::{sweep, ExperimentSpec, Report, SweepOptions};
use poplabel::labeling::{run_config, ProtocolConfig, ProtocolKind};
use poplabel::verify::{pool_bound, silent_safe_interaction_bound, state_lower_bound};
use poplabel::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    UnknownProtocol = 3,
    InvalidParameter = 4,
    /// Malformed JSON input.
    Parse = 5,
    Io = 6,
    /// The requested value does not exist, such as an unlabeled agent.
    NotFound = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlLeaderMode {
    Oracle = 0,
    Elected = 1,
}

/// Protocol configuration handle.
pub struct PlConfig(ProtocolConfig);

/// Finished run handle.
pub struct PlRecord(RunRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: PlStatus, msg: impl Into<String>) -> PlStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> PlStatus {
    let status = match &e {
        Error::UnknownProtocol(_) => PlStatus::UnknownProtocol,
        Error::Json { .. } => PlStatus::Parse,
        Error::Io { .. } | Error::Csv { .. } => PlStatus::Io,
        _ => PlStatus::InvalidParameter,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning a panic into [`PlStatus::Panic`].
fn guard(f: impl FnOnce() -> PlStatus) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(PlStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, PlStatus> {
    if p.is_null() {
        return Err(fail(PlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(PlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn pl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of registered protocols.
#[no_mangle]
pub extern "C" fn pl_protocol_count() -> usize {
    ProtocolKind::ALL.len()
}

/// Name of protocol `index`, or null when out of range. Static; do not free.
#[no_mangle]
pub extern "C" fn pl_protocol_name(index: usize) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| {
        ProtocolKind::ALL
            .iter()
            .map(|k| CString::new(k.name()).expect("protocol names have no NUL"))
            .collect()
    });
    names.get(index).map_or(ptr::null(), |s| s.as_ptr())
}

/// Creates a configuration for `protocol` over `n` agents with the oracle
/// leader and default parameters.
///
/// # Safety
/// `protocol` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_config_new(protocol: *const c_char, n: usize, out: *mut *mut PlConfig) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        let name = match str_arg(protocol, "protocol") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match name.parse::<ProtocolKind>() {
            Ok(kind) => {
                *out = Box::into_raw(Box::new(PlConfig(ProtocolConfig::new(kind, n))));
                PlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `cfg` must come from [`pl_config_new`] and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn pl_config_free(cfg: *mut PlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_config(cfg: *mut PlConfig, f: impl FnOnce(&mut ProtocolConfig)) -> PlStatus {
    match cfg.as_mut() {
        Some(c) => {
            f(&mut c.0);
            PlStatus::Ok
        }
        None => fail(PlStatus::NullPointer, "config is null"),
    }
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_set_epsilon(cfg: *mut PlConfig, epsilon: f64) -> PlStatus {
    with_config(cfg, |c| c.epsilon = Some(epsilon))
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_set_k(cfg: *mut PlConfig, k: usize) -> PlStatus {
    with_config(cfg, |c| c.k = Some(k))
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_set_c_phase(cfg: *mut PlConfig, c_phase: f64) -> PlStatus {
    with_config(cfg, |c| c.c_phase = Some(c_phase))
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_set_leader(cfg: *mut PlConfig, mode: PlLeaderMode) -> PlStatus {
    with_config(cfg, |c| {
        c.leader = match mode {
            PlLeaderMode::Oracle => LeaderMode::Oracle,
            PlLeaderMode::Elected => LeaderMode::Elected,
        }
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_set_generalized(cfg: *mut PlConfig, on: bool) -> PlStatus {
    with_config(cfg, |c| c.generalized = on)
}

/// Checks the configuration without running it.
///
/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn pl_config_validate(cfg: *const PlConfig) -> PlStatus {
    guard(|| match cfg.as_ref() {
        Some(c) => c.0.validate().map_or_else(from_error, |_| PlStatus::Ok),
        None => fail(PlStatus::NullPointer, "config is null"),
    })
}

/// Runs one simulation. `max_interactions = 0` uses the protocol's default
/// cap.
///
/// # Safety
/// `cfg` must be a live configuration handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_run(
    cfg: *const PlConfig,
    seed: u64,
    max_interactions: u64,
    out: *mut *mut PlRecord,
) -> PlStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else {
            return fail(PlStatus::NullPointer, "config is null");
        };
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        let cap = if max_interactions == 0 {
            c.0.default_max_interactions()
        } else {
            max_interactions
        };
        match run_config(&c.0, &RunLimits::new(cap), seed) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(PlRecord(r)));
                PlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `rec` must come from [`pl_run`] and not have been freed, or be null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_free(rec: *mut PlRecord) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Population size; 0 for a null handle.
///
/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_n(rec: *const PlRecord) -> usize {
    rec.as_ref().map_or(0, |r| r.0.n)
}

/// Stabilization time, or the cap for an unfinished run; 0 for null.
///
/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_interactions(rec: *const PlRecord) -> u64 {
    rec.as_ref().map_or(0, |r| r.0.interactions_used)
}

/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_completed(rec: *const PlRecord) -> bool {
    rec.as_ref().is_some_and(|r| r.0.completed)
}

/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_valid(rec: *const PlRecord) -> bool {
    rec.as_ref().is_some_and(|r| r.0.validity.is_ok())
}

/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_safe(rec: *const PlRecord) -> bool {
    rec.as_ref().is_some_and(|r| r.0.safety.is_ok())
}

/// Distinct states used during the run; 0 for null.
///
/// # Safety
/// `rec` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn pl_record_census(rec: *const PlRecord) -> usize {
    rec.as_ref().map_or(0, |r| r.0.census)
}

/// Final label of agent `agent`.
///
/// # Safety
/// `rec` must be a live record handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_record_label(rec: *const PlRecord, agent: usize, out: *mut u64) -> PlStatus {
    let Some(r) = rec.as_ref() else {
        return fail(PlStatus::NullPointer, "record is null");
    };
    if out.is_null() {
        return fail(PlStatus::NullPointer, "out is null");
    }
    match r.0.final_labels.get(agent) {
        None => fail(PlStatus::InvalidParameter, format!("agent {agent} out of range 0..{}", r.0.n)),
        Some(None) => fail(PlStatus::NotFound, format!("agent {agent} has no label")),
        Some(Some(l)) => {
            *out = l.0;
            PlStatus::Ok
        }
    }
}

/// The whole record as JSON.
///
/// # Safety
/// `rec` must be a live record handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_record_json(rec: *const PlRecord, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let Some(r) = rec.as_ref() else {
            return fail(PlStatus::NullPointer, "record is null");
        };
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        match serde_json::to_string(&r.0) {
            Ok(s) => {
                *out = into_c_string(s);
                PlStatus::Ok
            }
            Err(e) => fail(PlStatus::Parse, e.to_string()),
        }
    })
}

/// Runs the sweep described by `spec_json` and returns the report as JSON.
/// `jobs = 0` picks the default worker count.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pl_sweep_json(spec_json: *const c_char, jobs: usize, out: *mut *mut c_char) -> PlStatus {
    guard(|| {
        if out.is_null() {
            return fail(PlStatus::NullPointer, "out is null");
        }
        let text = match str_arg(spec_json, "spec_json") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let spec = match ExperimentSpec::from_json(text) {
            Ok(s) => s,
            Err(e) => return fail(PlStatus::Parse, e.to_string()),
        };
        let opts = SweepOptions {
            jobs: (jobs > 0).then_some(jobs),
            cancel: None,
        };
        let result = match sweep(&spec, &opts) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let report = Report::new(Some(&spec), result, Vec::new());
        match serde_json::to_string(&report) {
            Ok(s) => {
                *out = into_c_string(s);
                PlStatus::Ok
            }
            Err(e) => fail(PlStatus::Parse, e.to_string()),
        }
    })
}

/// Expected-interaction lower bound for pool protocols with range
/// `[1, n + r]`.
#[no_mangle]
pub extern "C" fn pl_pool_bound(n: usize, r: u64) -> f64 {
    pool_bound(n, r)
}

/// States needed by any silent, safe and valid protocol.
#[no_mangle]
pub extern "C" fn pl_state_lower_bound(n: usize) -> f64 {
    state_lower_bound(n)
}

/// Interaction lower bound for a silent, safe protocol with `n + t` states;
/// NaN when `t >= n`.
#[no_mangle]
pub extern "C" fn pl_silent_safe_bound(n: usize, t: usize) -> f64 {
    silent_safe_interaction_bound(n, t).unwrap_or(f64::NAN)
}
