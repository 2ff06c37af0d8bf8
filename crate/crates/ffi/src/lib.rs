//! C interface to the `netdecide` simulator.
//!
//! Scenarios and results are opaque handles created and released through
//! this API. Every fallible call returns an [`NdStatus`]; the message of the
//! most recent failure on the calling thread is available from
//! [`nd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netdecide::decision::quorum_prob;
use netdecide::harness::output::summarize;
use netdecide::harness::{run_scenario, ScenarioConfig, TraceSet};
use netdecide::markov::{build_meanfield_chain, transient_spectral_radius};
use netdecide::Error;

/// Status codes. Values 2 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Numerical = 3,
    Io = 4,
    InvalidUtf8 = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Scenario configuration handle.
pub struct NdScenario {
    config: ScenarioConfig,
}

/// Completed run handle.
pub struct NdResult {
    traces: TraceSet,
    msd_db: [Vec<f64>; 2],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NdStatus, msg: impl Into<String>) -> NdStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> NdStatus {
    let status = match e.exit_code() {
        3 => NdStatus::Numerical,
        4 => NdStatus::Io,
        _ => NdStatus::Config,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> NdStatus) -> NdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(NdStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, NdStatus> {
    if s.is_null() {
        return Err(fail(NdStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(NdStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn emit<T>(out: *mut *mut T, value: T) -> NdStatus {
    if out.is_null() {
        return fail(NdStatus::NullPointer, "output pointer is null");
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    NdStatus::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn nd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a scenario from a named preset such as `"fig5"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nd_scenario_preset(name: *const c_char, out: *mut *mut NdScenario) -> NdStatus {
    guard(|| {
        let name = match read_str(name) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match ScenarioConfig::preset(name) {
            Ok(config) => emit(out, NdScenario { config }),
            Err(e) => from_error(e),
        }
    })
}

/// Builds a scenario from a JSON document. Missing fields take defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nd_scenario_from_json(json: *const c_char, out: *mut *mut NdScenario) -> NdStatus {
    guard(|| {
        let json = match read_str(json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match ScenarioConfig::from_json(json) {
            Ok(config) => emit(out, NdScenario { config }),
            Err(e) => from_error(e),
        }
    })
}

/// Overrides seed, replica count and iteration count. Zero leaves the
/// replica or iteration count unchanged.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_scenario_configure(
    scenario: *mut NdScenario,
    seed: u64,
    replicas: usize,
    iterations: usize,
) -> NdStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(NdStatus::NullPointer, "scenario handle is null");
        };
        let mut config = s.config.clone();
        config.seed = seed;
        if replicas > 0 {
            config.replicas = replicas;
        }
        if iterations > 0 {
            config.iterations = iterations;
        }
        match config.validate() {
            Ok(()) => {
                s.config = config;
                NdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `scenario` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_scenario_free(scenario: *mut NdScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a static or fish scenario.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nd_run(scenario: *const NdScenario, out: *mut *mut NdResult) -> NdStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(NdStatus::NullPointer, "scenario handle is null");
        };
        match run_scenario(&s.config) {
            Ok(traces) => {
                let msd_db = traces.msd_db();
                emit(out, NdResult { traces, msd_db })
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of points in each MSD curve (iterations plus one).
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_result_len(result: *const NdResult) -> usize {
    result.as_ref().map_or(0, |r| r.msd_db[0].len())
}

/// Copies up to `capacity` points of the ensemble MSD curve for model `q`
/// (in dB) into `buffer` and stores the number written in `written`.
///
/// # Safety
/// `buffer` must hold `capacity` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn nd_result_msd_db(
    result: *const NdResult,
    q: u8,
    buffer: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> NdStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(NdStatus::NullPointer, "result handle is null");
        };
        if q > 1 {
            return fail(NdStatus::OutOfRange, format!("model index {q} is not 0 or 1"));
        }
        if buffer.is_null() && capacity > 0 {
            return fail(NdStatus::NullPointer, "buffer is null");
        }
        let curve = &r.msd_db[q as usize];
        let n = curve.len().min(capacity);
        if n > 0 {
            ptr::copy_nonoverlapping(curve.as_ptr(), buffer, n);
        }
        if !written.is_null() {
            *written = n;
        }
        NdStatus::Ok
    })
}

/// Steady-state MSD (dB) toward the agreed and the rejected model.
///
/// # Safety
/// Both output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_result_steady_state(
    result: *const NdResult,
    agreed_db: *mut f64,
    rejected_db: *mut f64,
) -> NdStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(NdStatus::NullPointer, "result handle is null");
        };
        if agreed_db.is_null() || rejected_db.is_null() {
            return fail(NdStatus::NullPointer, "output pointer is null");
        }
        let (a, b) = r.traces.steady_state_aligned_db();
        *agreed_db = a;
        *rejected_db = b;
        NdStatus::Ok
    })
}

/// Median iteration of lasting agreement across replicas. Writes infinity
/// when fewer than half of the replicas agreed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_result_median_agreement(result: *const NdResult, out: *mut f64) -> NdStatus {
    guard(|| {
        let Some(r) = result.as_ref() else {
            return fail(NdStatus::NullPointer, "result handle is null");
        };
        if out.is_null() {
            return fail(NdStatus::NullPointer, "output pointer is null");
        }
        *out = r.traces.median_agreement_time().unwrap_or(f64::INFINITY);
        NdStatus::Ok
    })
}

/// Run summary as a JSON string owned by the caller; release it with
/// [`nd_string_free`].
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_result_summary_json(result: *const NdResult) -> *mut c_char {
    let Some(r) = result.as_ref() else {
        set_error("result handle is null");
        return ptr::null_mut();
    };
    catch_unwind(AssertUnwindSafe(|| {
        CString::new(summarize(&r.traces).to_string()).map_or(ptr::null_mut(), CString::into_raw)
    }))
    .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nd_result_free(result: *mut NdResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn nd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Quorum keep probability for `n_g` like-minded agents out of `n_k`.
/// Returns NaN for invalid arguments.
#[no_mangle]
pub extern "C" fn nd_quorum_prob(n_g: usize, n_k: usize, k: u32, beta: f64) -> f64 {
    if n_g == 0 || n_g > n_k || k == 0 || beta.is_nan() || beta <= 0.0 {
        return f64::NAN;
    }
    quorum_prob(n_g, n_k, k, beta)
}

/// Spectral radius of the transient block of the mean-field decision chain.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_meanfield_rate(agents: usize, k: u32, out: *mut f64) -> NdStatus {
    guard(|| {
        if out.is_null() {
            return fail(NdStatus::NullPointer, "output pointer is null");
        }
        match build_meanfield_chain(agents, k).and_then(|c| transient_spectral_radius(&c)) {
            Ok(r) => {
                *out = r.rho;
                NdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
