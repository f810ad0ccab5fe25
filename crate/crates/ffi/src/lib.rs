//! C ABI over `nclim-core`.
//!
//! Every function returns an [`NclimStatus`]. On failure the message is kept per thread and
//! read with [`nclim_last_error`]. Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nclim_core::sweeps::{closed_form, oracle_value, preset, run_sweep, self_check, write_csv, Scenario, ScenarioConfig};
use nclim_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NclimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Diverged = 3,
    Numerical = 4,
    Panic = 5,
}

/// Closed-form limit split into its reference and network parts.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NclimLimit {
    pub j1: f64,
    pub j2: f64,
    pub total: f64,
}

/// A validated scenario.
pub struct NclimScenario {
    config: ScenarioConfig,
    scenario: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NclimStatus {
    match e {
        Error::Divergence { .. } => NclimStatus::Diverged,
        Error::InvalidInput(_) | Error::Scenario(_) | Error::Io(_) | Error::CaseMismatch { .. } => {
            NclimStatus::InvalidInput
        }
        _ => NclimStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NclimStatus>) -> NclimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NclimStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_error(&format!("panic: {}", msg.unwrap_or_default()));
            NclimStatus::Panic
        }
    }
}

fn fail(e: Error) -> NclimStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> NclimStatus {
    set_error(&format!("{what} is null"));
    NclimStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, NclimStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        NclimStatus::InvalidInput
    })
}

unsafe fn handle<'a>(p: *const NclimScenario) -> Result<&'a NclimScenario, NclimStatus> {
    p.as_ref().ok_or_else(|| null("scenario"))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nclim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread; empty if none. Valid until the next call.
#[no_mangle]
pub extern "C" fn nclim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a JSON scenario.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_scenario_from_json(json: *const c_char, out: *mut *mut NclimScenario) -> NclimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let config = ScenarioConfig::from_json(text).map_err(fail)?;
        let scenario = config.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(NclimScenario { config, scenario }));
        Ok(())
    })
}

/// Builds a figure preset's base scenario.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_scenario_from_preset(name: *const c_char, out: *mut *mut NclimScenario) -> NclimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (config, _) = preset(str_arg(name, "name")?).map_err(fail)?;
        let scenario = config.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(NclimScenario { config, scenario }));
        Ok(())
    })
}

/// Releases a scenario; null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nclim_scenario_free(scenario: *mut NclimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of plant outputs (channels).
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_scenario_outputs(scenario: *const NclimScenario, out: *mut usize) -> NclimStatus {
    guard(|| {
        let h = handle(scenario)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.scenario.plant.outputs();
        Ok(())
    })
}

/// Closed-form limit.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_limit(scenario: *const NclimScenario, out: *mut NclimLimit) -> NclimStatus {
    guard(|| {
        let h = handle(scenario)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let p = closed_form(&h.scenario).map_err(fail)?;
        *out = NclimLimit { j1: p.j1, j2: p.j2, total: p.total };
        Ok(())
    })
}

/// Numerical optimum over a Youla basis of `basis_degree` terms on `grid_points` frequencies.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_oracle(
    scenario: *const NclimScenario,
    basis_degree: usize,
    grid_points: usize,
    out: *mut f64,
) -> NclimStatus {
    guard(|| {
        let h = handle(scenario)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let mut sc = h.scenario.clone();
        sc.oracle.basis_degree = basis_degree;
        sc.oracle.grid_points = grid_points;
        match oracle_value(&sc).map_err(fail)? {
            Some(j) => {
                *out = j;
                Ok(())
            }
            None => {
                set_error("oracle does not apply: too many outputs or infinite objective");
                Err(NclimStatus::Numerical)
            }
        }
    })
}

/// Runs a preset sweep and returns its CSV; free it with [`nclim_string_free`].
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_sweep_preset_csv(name: *const c_char, out: *mut *mut c_char) -> NclimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (cfg, sweep) = preset(str_arg(name, "name")?).map_err(fail)?;
        let rows = run_sweep(&cfg, &sweep).map_err(fail)?;
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).map_err(fail)?;
        *out = CString::new(buf).expect("CSV has no NUL").into_raw();
        Ok(())
    })
}

/// Scenario as JSON with defaults filled in; free it with [`nclim_string_free`].
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_scenario_to_json(scenario: *const NclimScenario, out: *mut *mut c_char) -> NclimStatus {
    guard(|| {
        let h = handle(scenario)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(h.config.to_json()).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nclim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the invariant suites; `passed` receives 1 when all pass.
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nclim_check(passed: *mut i32) -> NclimStatus {
    guard(|| {
        let out = passed.as_mut().ok_or_else(|| null("passed"))?;
        let report = self_check();
        *out = i32::from(report.passed);
        if !report.passed {
            set_error(&report.to_json());
        }
        Ok(())
    })
}
