//! C ABI over `fpopt`.
//!
//! Plans and weather years are opaque handles owned by the caller and
//! released with their `_free` functions. Every fallible call returns an
//! [`FpoptStatus`]; on failure [`fpopt_last_error`] describes the cause for
//! the calling thread. Strings returned through out-parameters are
//! NUL-terminated UTF-8 and must be released with [`fpopt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fpopt::comfort::{ComfortModel, PenaltyWeights};
use fpopt::generate::{generate_synthetic_plan, DesignProgram};
use fpopt::metrics::orientation_curve;
use fpopt::optimize::{run_pipeline, Objective, PipelineConfig, ThermalObjective};
use fpopt::plan::{validate_plan, FloorPlan};
use fpopt::weather::{load_weather, WeatherSeries};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpoptStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidPlan = 4,
    InvalidArgument = 5,
    IoError = 6,
    EvaluationFailed = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque floor plan.
pub struct FpoptPlan(FloorPlan);

/// Opaque hourly weather year.
pub struct FpoptWeather(WeatherSeries);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

type Outcome = Result<(), (FpoptStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> FpoptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FpoptStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FpoptStatus::Panic
        }
    }
}

fn fail<T>(status: FpoptStatus, msg: impl ToString) -> Result<T, (FpoptStatus, String)> {
    Err((status, msg.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (FpoptStatus, String)> {
    if p.is_null() {
        return fail(FpoptStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(FpoptStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, (FpoptStatus, String)> {
    p.as_ref().map_or_else(|| fail(FpoptStatus::NullArgument, format!("{name} is null")), Ok)
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), (FpoptStatus, String)> {
    if p.is_null() {
        return fail(FpoptStatus::NullArgument, format!("{name} is null"));
    }
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Cost settings passed by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FpoptCostConfig {
    /// Underheating weight.
    pub w1: f64,
    /// Overheating weight.
    pub w2: f64,
}

fn weights(cost: FpoptCostConfig) -> Result<PenaltyWeights, (FpoptStatus, String)> {
    PenaltyWeights::new(cost.w1, cost.w2).or_else(|e| fail(FpoptStatus::InvalidArgument, e))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpopt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread. Valid until the next
/// call on the same thread; empty after a successful call.
#[no_mangle]
pub extern "C" fn fpopt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fpopt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a plan from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_plan_from_json(json: *const c_char, out: *mut *mut FpoptPlan) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(json, "json")?;
        let plan = FloorPlan::from_json(text).or_else(|e| fail(FpoptStatus::ParseError, e))?;
        let violations = validate_plan(&plan);
        if let Some(v) = violations.first() {
            return fail(FpoptStatus::InvalidPlan, v);
        }
        *out = Box::into_raw(Box::new(FpoptPlan(plan)));
        Ok(())
    })
}

/// Generates a synthetic three-bedroom plan from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_plan_generate(seed: u64, out: *mut *mut FpoptPlan) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let plan = generate_synthetic_plan(seed, &DesignProgram::three_bedroom_house()).or_else(|e| fail(FpoptStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(FpoptPlan(plan)));
        Ok(())
    })
}

/// Serializes a plan to pretty JSON. Release the result with
/// [`fpopt_string_free`].
///
/// # Safety
/// `plan` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_plan_to_json(plan: *const FpoptPlan, out: *mut *mut c_char) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let plan = ref_arg(plan, "plan")?;
        *out = to_c_string(plan.0.to_json_pretty());
        Ok(())
    })
}

/// Current orientation of a plan, degrees. NaN for a null handle.
///
/// # Safety
/// `plan` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpopt_plan_orientation(plan: *const FpoptPlan) -> f64 {
    plan.as_ref().map_or(f64::NAN, |p| p.0.orientation_deg)
}

/// Releases a plan. Null is ignored.
///
/// # Safety
/// `plan` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpopt_plan_free(plan: *mut FpoptPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Loads a weather CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_weather_load(path: *const c_char, out: *mut *mut FpoptWeather) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = std::fs::File::open(path).or_else(|e| fail(FpoptStatus::IoError, format!("{path}: {e}")))?;
        let weather = load_weather(std::io::BufReader::new(file)).or_else(|e| fail(FpoptStatus::ParseError, e))?;
        *out = Box::into_raw(Box::new(FpoptWeather(weather)));
        Ok(())
    })
}

/// Builds the synthetic weather year for a site.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_weather_synthetic(latitude: f64, longitude: f64, out: *mut *mut FpoptWeather) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let weather = WeatherSeries::synthetic(latitude, longitude).or_else(|e| fail(FpoptStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(FpoptWeather(weather)));
        Ok(())
    })
}

/// Releases a weather year. Null is ignored.
///
/// # Safety
/// `weather` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fpopt_weather_free(weather: *mut FpoptWeather) {
    if !weather.is_null() {
        drop(Box::from_raw(weather));
    }
}

/// Discomfort penalty of `plan`, degree-hours, with the default comfort model.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_evaluate_penalty(
    plan: *const FpoptPlan,
    weather: *const FpoptWeather,
    cost: FpoptCostConfig,
    out: *mut f64,
) -> FpoptStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (plan, weather) = (ref_arg(plan, "plan")?, ref_arg(weather, "weather")?);
        let objective = ThermalObjective::new(&weather.0, weights(cost)?, &ComfortModel::default());
        *out = objective.penalty(&plan.0).or_else(|e| fail(FpoptStatus::EvaluationFailed, e))?;
        Ok(())
    })
}

/// Fills `penalties[k]` with the penalty at `k · resolution` degrees.
/// `len` must be at least `360 / resolution`; `written` receives the count.
///
/// # Safety
/// Handles must be live; `penalties` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fpopt_orientation_curve(
    plan: *const FpoptPlan,
    weather: *const FpoptWeather,
    cost: FpoptCostConfig,
    resolution: u32,
    penalties: *mut f64,
    len: usize,
    written: *mut usize,
) -> FpoptStatus {
    guard(|| {
        out_arg(penalties, "penalties")?;
        out_arg(written, "written")?;
        let (plan, weather) = (ref_arg(plan, "plan")?, ref_arg(weather, "weather")?);
        if resolution == 0 || 360 % resolution != 0 {
            return fail(FpoptStatus::InvalidArgument, format!("resolution {resolution} does not divide 360"));
        }
        let needed = (360 / resolution) as usize;
        if len < needed {
            *written = needed;
            return fail(FpoptStatus::BufferTooSmall, format!("need {needed} entries, got {len}"));
        }
        let objective = ThermalObjective::new(&weather.0, weights(cost)?, &ComfortModel::default());
        let curve = orientation_curve(&plan.0, &objective, resolution).or_else(|e| fail(FpoptStatus::EvaluationFailed, e))?;
        let dst = std::slice::from_raw_parts_mut(penalties, needed);
        for (d, s) in dst.iter_mut().zip(&curve.samples) {
            *d = s.penalty;
        }
        *written = needed;
        Ok(())
    })
}

/// Runs the full operator pipeline with default descent settings. On success
/// `out_plan` receives the optimized plan and `out_report` its JSON report.
///
/// # Safety
/// Handles must be live; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn fpopt_optimize(
    plan: *const FpoptPlan,
    weather: *const FpoptWeather,
    cost: FpoptCostConfig,
    out_plan: *mut *mut FpoptPlan,
    out_report: *mut *mut c_char,
) -> FpoptStatus {
    guard(|| {
        out_arg(out_plan, "out_plan")?;
        out_arg(out_report, "out_report")?;
        let (plan, weather) = (ref_arg(plan, "plan")?, ref_arg(weather, "weather")?);
        let cfg = PipelineConfig {
            weights: weights(cost)?,
            ..PipelineConfig::default()
        };
        let outcome = run_pipeline(&plan.0, &weather.0, &cfg).or_else(|e| fail(FpoptStatus::EvaluationFailed, e))?;
        *out_report = to_c_string(outcome.report.to_json_pretty());
        *out_plan = Box::into_raw(Box::new(FpoptPlan(outcome.plan)));
        Ok(())
    })
}
