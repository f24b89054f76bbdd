//! C ABI over `wcrt-core`.
//!
//! Every function returns a [`WcrtStatus`]. Results come back through out
//! pointers, which are only written on success (and, for
//! [`wcrt_simulate`], on [`WcrtStatus::Horizon`]). After a failure,
//! [`wcrt_last_error_message`] describes it. Handles are opaque and must be
//! released with their matching `_free` function. Strings are NUL-terminated
//! UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wcrt_core::component::MemoryCase;
use wcrt_core::experiment::REFERENCE_TOPOLOGY;
use wcrt_core::model::{parse_topology, validate_topology, Duration, ModelError, Severity, Topology, TransactionKind};
use wcrt_core::sim::{self, max_service, SimError, TraceStats};
use wcrt_core::system::{isolation_bound, wcrt, AnalysisError, TransactionQuery};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WcrtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a schema mismatch.
    Parse = 3,
    /// Well-formed input that breaks a model rule.
    Invalid = 4,
    Analysis = 5,
    Simulation = 6,
    /// The simulation stopped at its horizon; partial results are returned.
    Horizon = 7,
    NotFound = 8,
    /// A Rust panic was caught at the boundary.
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WcrtKind {
    Read = 0,
    Write = 1,
}

impl From<WcrtKind> for TransactionKind {
    fn from(k: WcrtKind) -> Self {
        match k {
            WcrtKind::Read => TransactionKind::Read,
            WcrtKind::Write => TransactionKind::Write,
        }
    }
}

/// Memory-subsystem case; `None` for every peripheral except main memories.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WcrtMemoryCase {
    None = 0,
    Hit = 1,
    MissRefill = 2,
    MissRefillEvict = 3,
}

impl From<WcrtMemoryCase> for Option<MemoryCase> {
    fn from(c: WcrtMemoryCase) -> Self {
        match c {
            WcrtMemoryCase::None => None,
            WcrtMemoryCase::Hit => Some(MemoryCase::Hit),
            WcrtMemoryCase::MissRefill => Some(MemoryCase::MissRefill),
            WcrtMemoryCase::MissRefillEvict => Some(MemoryCase::MissRefillEvict),
        }
    }
}

/// A parsed topology.
pub struct WcrtTopology {
    inner: Topology,
}

/// Statistics of one simulation run.
pub struct WcrtTrace {
    inner: TraceStats,
    hash: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs were replaced"));
}

struct Fail(WcrtStatus, String);

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::Syntax { .. } | ModelError::UnknownField { .. } | ModelError::MissingField { .. } | ModelError::Schema { .. } => {
                WcrtStatus::Parse
            }
            ModelError::UnknownId(_) => WcrtStatus::NotFound,
            _ => WcrtStatus::Invalid,
        };
        Fail(status, e.to_string())
    }
}

impl From<AnalysisError> for Fail {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(m) => m.into(),
            e => Fail(WcrtStatus::Analysis, e.to_string()),
        }
    }
}

impl From<SimError> for Fail {
    fn from(e: SimError) -> Self {
        let status = match e {
            SimError::Topology(_) => WcrtStatus::Invalid,
            SimError::UnknownPeripheral(_) | SimError::NoRecords { .. } => WcrtStatus::NotFound,
            SimError::Horizon(_) => WcrtStatus::Horizon,
            _ => WcrtStatus::Simulation,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status and the last error message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WcrtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WcrtStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            WcrtStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(WcrtStatus::NullPointer, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(WcrtStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live value of `T`.
unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<*mut T, Fail> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(p)
    }
}

/// Message of the last failure on this thread. Empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wcrt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a topology document. Validation is separate: see [`wcrt_topology_validate`].
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_topology_parse(json: *const c_char, out: *mut *mut WcrtTopology) -> WcrtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = parse_topology(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(WcrtTopology { inner: t }));
        Ok(())
    })
}

/// The bundled reference topology.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_topology_reference(out: *mut *mut WcrtTopology) -> WcrtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = parse_topology(REFERENCE_TOPOLOGY)?;
        *out = Box::into_raw(Box::new(WcrtTopology { inner: t }));
        Ok(())
    })
}

/// Releases a topology. Null is ignored.
///
/// # Safety
/// `t` is null or came from this library and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn wcrt_topology_free(t: *mut WcrtTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Counts validation errors and warnings. Returns `Invalid` when there are
/// errors; the message then lists them.
///
/// # Safety
/// `t` is a live handle; the out pointers are null or writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_topology_validate(t: *const WcrtTopology, errors: *mut u32, warnings: *mut u32) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "topology")?;
        let v = validate_topology(&t.inner);
        let count = |s| v.diagnostics.iter().filter(|d| d.severity == s).count() as u32;
        if !errors.is_null() {
            *errors = count(Severity::Error);
        }
        if !warnings.is_null() {
            *warnings = count(Severity::Warning);
        }
        if v.ok {
            Ok(())
        } else {
            let msgs: Vec<String> = v.errors().map(|d| d.to_string()).collect();
            Err(Fail(WcrtStatus::Invalid, msgs.join("; ")))
        }
    })
}

/// # Safety
/// String arguments are NUL-terminated.
unsafe fn query(
    controller: *const c_char,
    peripheral: *const c_char,
    kind: WcrtKind,
    beta: u32,
    case: WcrtMemoryCase,
) -> Result<TransactionQuery, Fail> {
    let mut q = TransactionQuery::new(str_arg(controller, "controller")?, str_arg(peripheral, "peripheral")?, kind.into(), beta);
    q.memory_case = case.into();
    Ok(q)
}

/// Isolation bound of one transaction, in picoseconds.
///
/// # Safety
/// `t` is a live handle, strings are NUL-terminated, `out_ps` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_isolation_bound(
    t: *const WcrtTopology,
    controller: *const c_char,
    peripheral: *const c_char,
    kind: WcrtKind,
    beta: u32,
    memory_case: WcrtMemoryCase,
    out_ps: *mut u64,
) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "topology")?;
        let out = out_arg(out_ps, "out_ps")?;
        let q = query(controller, peripheral, kind, beta, memory_case)?;
        *out = isolation_bound(&t.inner, &q)?.total.as_ps();
        Ok(())
    })
}

/// Worst-case response time under interference, in picoseconds.
/// `interferer_beta` 0 means the same burst length as the analyzed one.
///
/// # Safety
/// `t` is a live handle, strings are NUL-terminated, `out_ps` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_response_time_bound(
    t: *const WcrtTopology,
    controller: *const c_char,
    peripheral: *const c_char,
    kind: WcrtKind,
    beta: u32,
    memory_case: WcrtMemoryCase,
    v: u32,
    interferer_beta: u32,
    out_ps: *mut u64,
) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "topology")?;
        let out = out_arg(out_ps, "out_ps")?;
        let mut q = query(controller, peripheral, kind, beta, memory_case)?.with_v(v);
        if interferer_beta != 0 {
            q = q.with_interferer_beta(interferer_beta);
        }
        *out = wcrt(&t.inner, &q)?.total.as_ps();
        Ok(())
    })
}

/// Runs a scenario document on `t`. `horizon_ps` 0 means no horizon. On
/// `Horizon` the partial trace is still returned through `out`.
///
/// # Safety
/// `t` is a live handle, `scenario_json` is NUL-terminated, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_simulate(
    t: *const WcrtTopology,
    scenario_json: *const c_char,
    seed: u64,
    horizon_ps: u64,
    out: *mut *mut WcrtTrace,
) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "topology")?;
        let out = out_arg(out, "out")?;
        let s = sim::parse_scenario(str_arg(scenario_json, "scenario_json")?)?;
        let mut instance = sim::build_sim(&t.inner, &s, seed)?;
        let horizon = (horizon_ps != 0).then(|| Duration::from_ps(horizon_ps));
        let wrap = |stats: TraceStats| {
            let hash = CString::new(stats.hash.clone()).expect("hex has no NUL");
            Box::into_raw(Box::new(WcrtTrace { inner: stats, hash }))
        };
        match instance.run(horizon) {
            Ok(stats) => {
                *out = wrap(stats);
                Ok(())
            }
            Err(SimError::Horizon(partial)) => {
                *out = wrap(*partial);
                Err(Fail(WcrtStatus::Horizon, "horizon reached before the scenario finished".into()))
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// Releases a trace. Null is ignored.
///
/// # Safety
/// `t` is null or came from this library and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn wcrt_trace_free(t: *mut WcrtTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of completed transactions in the trace.
///
/// # Safety
/// `t` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_trace_len(t: *const WcrtTrace, out: *mut u64) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "trace")?;
        *out_arg(out, "out")? = t.inner.records.len() as u64;
        Ok(())
    })
}

/// Hex SHA-256 of the exported trace. Owned by the trace handle.
///
/// # Safety
/// `t` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wcrt_trace_hash(t: *const WcrtTrace) -> *const c_char {
    match t.as_ref() {
        Some(t) => t.hash.as_ptr(),
        None => ptr::null(),
    }
}

/// Longest completed − issued over transactions of `kind` and `beta`.
///
/// # Safety
/// `t` is a live handle; `out_ps` is writable.
#[no_mangle]
pub unsafe extern "C" fn wcrt_trace_max_service(t: *const WcrtTrace, kind: WcrtKind, beta: u32, out_ps: *mut u64) -> WcrtStatus {
    guard(|| {
        let t = ref_arg(t, "trace")?;
        let out = out_arg(out_ps, "out_ps")?;
        *out = max_service(&t.inner, kind.into(), beta)?.as_ps();
        Ok(())
    })
}
