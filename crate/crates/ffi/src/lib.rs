//! C ABI over the simulator, the trained classifiers and the scenario
//! runner. Every object is an opaque heap handle released with its `_free`
//! function; every fallible call returns a `DsStatus` and leaves a message
//! readable through `ds_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use digisub::grid::{build_ieee14, FaultSpec, FaultType};
use digisub::harness::{inspect_frame, run_scenario, ScenarioConfig};
use digisub::ml::TrainedModel;
use digisub::sim::{Action, SimConfig, SystemSim};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Utf8 = 3,
    Config = 4,
    Simulation = 5,
    Model = 6,
    Codec = 7,
    /// The output buffer is too small; the required size was written.
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque simulator handle.
pub struct DsSim {
    sim: SystemSim,
}

/// Opaque trained-model handle.
pub struct DsModel {
    model: TrainedModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Fail(DsStatus, String);

fn fail(code: DsStatus, e: impl ToString) -> Fail {
    Fail(code, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DsStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            DsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(DsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DsStatus::Utf8, format!("{what} is not UTF-8")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: non-null checked; caller guarantees it points to writable T.
    unsafe { p.as_mut() }.ok_or_else(|| fail(DsStatus::NullPointer, format!("{what} is null")))
}

/// Copies `s` plus a NUL into `buf`. `needed` (optional) receives the full
/// size including the NUL.
unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        return Err(fail(DsStatus::BufferTooSmall, format!("need {n} bytes, got {len}")));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Copies the calling thread's last error message (empty after success).
/// Returns the size needed including the NUL; writes nothing if `len` is
/// smaller.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ds_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let n = e.len() + 1;
        if !buf.is_null() && len >= n {
            ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), e.len());
            *buf.add(e.len()) = 0;
        }
        n
    })
}

/// Builds the 14-bus system with default protection settings.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_new(seed: u64, out: *mut *mut DsSim) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SimConfig {
            seed,
            ..SimConfig::default()
        };
        let sim = SystemSim::new(build_ieee14(), cfg).map_err(|e| fail(DsStatus::Simulation, e))?;
        *out = Box::into_raw(Box::new(DsSim { sim }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from `ds_sim_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_free(sim: *mut DsSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

fn sim_ref<'a>(p: *mut DsSim) -> Result<&'a mut SystemSim, Fail> {
    out_ptr(p, "sim").map(|h| &mut h.sim)
}

/// Advances the simulation by `samples` sampling intervals (4800 per second).
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_run(sim: *mut DsSim, samples: u64) -> DsStatus {
    guard(|| sim_ref(sim)?.run_for(samples).map_err(|e| fail(DsStatus::Simulation, e)))
}

/// Current sample index.
///
/// # Safety
/// `sim` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_sample(sim: *mut DsSim, out: *mut u64) -> DsStatus {
    guard(|| {
        let n = sim_ref(sim)?.sample();
        *out_ptr(out, "out")? = n;
        Ok(())
    })
}

/// Schedules a fault at sample `at`. `fault_class` is 1..=10 in the order
/// A-gnd, B-gnd, C-gnd, AB, BC, CA, AB-gnd, BC-gnd, CA-gnd, ABC.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_schedule_fault(
    sim: *mut DsSim,
    at: u64,
    branch: u32,
    location: f64,
    impedance_ohm: f64,
    fault_class: u8,
) -> DsStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let fault_type = FaultType::from_class(fault_class).map_err(|e| fail(DsStatus::InvalidArgument, e))?;
        let spec = FaultSpec {
            branch: branch as usize,
            location,
            impedance_ohm,
            fault_type,
        };
        spec.validate(s.net()).map_err(|e| fail(DsStatus::InvalidArgument, e))?;
        if at < s.sample() {
            return Err(fail(DsStatus::InvalidArgument, format!("sample {at} already simulated")));
        }
        s.schedule(at, Action::ApplyFault(spec));
        Ok(())
    })
}

/// Position of a bay breaker (bus 1..=14, bay from 1).
///
/// # Safety
/// `sim` must be a live handle; `closed` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_breaker_closed(sim: *mut DsSim, bus: u32, bay: u8, closed: *mut bool) -> DsStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let sub = s.substation(bus as usize).map_err(|e| fail(DsStatus::InvalidArgument, e))?;
        let cb = (bay as usize)
            .checked_sub(1)
            .and_then(|i| sub.cbs.get(i))
            .ok_or_else(|| fail(DsStatus::InvalidArgument, format!("bus {bus} has no bay {bay}")))?;
        *out_ptr(closed, "closed")? = cb.is_closed();
        Ok(())
    })
}

/// Event log as text, one event per line.
///
/// # Safety
/// `sim` must be a live handle; `buf` null or `len` writable bytes;
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ds_sim_event_log(sim: *mut DsSim, buf: *mut c_char, len: usize, needed: *mut usize) -> DsStatus {
    guard(|| {
        let text = sim_ref(sim)?.log().to_text();
        write_str(&text, buf, len, needed)
    })
}

/// Parses a model file's text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_model_from_text(text: *const c_char, out: *mut *mut DsModel) -> DsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let model = TrainedModel::from_text(str_arg(text, "text")?).map_err(|e| fail(DsStatus::Model, e))?;
        *out = Box::into_raw(Box::new(DsModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from `ds_model_from_text` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_model_free(model: *mut DsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of features the model expects.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_model_input_len(model: *const DsModel, out: *mut usize) -> DsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(DsStatus::NullPointer, "model is null"))?;
        *out_ptr(out, "out")? = m.model.input_len();
        Ok(())
    })
}

/// Classifies one raw (unscaled) feature vector into 0..=11.
///
/// # Safety
/// `model` must be a live handle, `features` must point to `n` doubles and
/// `class_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_model_predict(
    model: *const DsModel,
    features: *const f64,
    n: usize,
    class_out: *mut u32,
) -> DsStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| fail(DsStatus::NullPointer, "model is null"))?;
        if features.is_null() {
            return Err(fail(DsStatus::NullPointer, "features is null"));
        }
        let x = std::slice::from_raw_parts(features, n);
        let c = m.model.predict(x).map_err(|e| fail(DsStatus::InvalidArgument, e))?;
        *out_ptr(class_out, "class_out")? = c as u32;
        Ok(())
    })
}

/// Decodes a hex-encoded SV or GOOSE frame into a field listing.
///
/// # Safety
/// `hex` must be a NUL-terminated string; `buf`/`needed` as for
/// `ds_sim_event_log`.
#[no_mangle]
pub unsafe extern "C" fn ds_inspect_frame(hex: *const c_char, buf: *mut c_char, len: usize, needed: *mut usize) -> DsStatus {
    guard(|| {
        let listing = inspect_frame(str_arg(hex, "hex")?).map_err(|e| fail(DsStatus::Codec, e))?;
        write_str(&listing, buf, len, needed)
    })
}

/// Runs a scenario from TOML config text. `model` may be null for
/// scenarios without an attack. On success `passed` receives the verdict
/// and `buf` its text.
///
/// # Safety
/// `config` must be a NUL-terminated string, `model` null or live,
/// `passed` writable, `buf`/`needed` as for `ds_sim_event_log`.
#[no_mangle]
pub unsafe extern "C" fn ds_run_scenario(
    config: *const c_char,
    model: *const DsModel,
    passed: *mut bool,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> DsStatus {
    guard(|| {
        let cfg = ScenarioConfig::parse(str_arg(config, "config")?).map_err(|e| fail(DsStatus::Config, e))?;
        let m = model.as_ref().map(|m| m.model.clone());
        let out = run_scenario(&build_ieee14(), &cfg, m).map_err(|e| fail(DsStatus::Simulation, e))?;
        *out_ptr(passed, "passed")? = out.verdict.passed();
        write_str(&out.verdict.to_text(), buf, len, needed)
    })
}
