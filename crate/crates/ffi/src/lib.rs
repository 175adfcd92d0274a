//! C ABI over the `wstate` simulator.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `ws_*_new`/`ws_*_run` function and released with the matching `ws_*_free`.
//! Fallible calls return a [`WsStatus`]; the message of the most recent
//! failure on the calling thread is available from `ws_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use wstate::algebra::{fidelity, named_state, DensityMatrix, NamedState, DIM};
use wstate::cavity::outcome_separation;
use wstate::engine::EngineKind;
use wstate::feedback::{FeedbackLaw, SignRule};
use wstate::harness::{run_experiment, theoretical_plateaus, ExperimentConfig};
use wstate::params::SystemParams;
use wstate::trajectory::{run_trajectory, TrajectoryConfig, TrajectoryRecord};
use wstate::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    StepSize = 4,
    Numerical = 5,
    UndefinedRatio = 6,
    Truncation = 7,
    EnsembleFailure = 8,
    Io = 9,
    Parse = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsEngine {
    Polaron = 0,
    Adiabatic = 1,
}

/// Feedback applied during a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsControl {
    None = 0,
    /// Bang-bang feedback, no kick when the gradient vanishes.
    SignZero = 1,
    /// Bang-bang feedback, positive kick when the gradient vanishes.
    SignPositive = 2,
}

/// Physical parameters.
pub struct WsParams {
    inner: SystemParams,
}

/// 8x8 qubit density matrix.
pub struct WsState {
    inner: DensityMatrix,
}

/// Completed trajectory record.
pub struct WsTrajectory {
    inner: TrajectoryRecord,
}

struct Failure(WsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => WsStatus::InvalidArgument,
            Error::Config(_) => WsStatus::Config,
            Error::StepSize { .. } => WsStatus::StepSize,
            Error::Numerical { .. } => WsStatus::Numerical,
            Error::UndefinedRatio { .. } => WsStatus::UndefinedRatio,
            Error::Truncation { .. } => WsStatus::Truncation,
            Error::EnsembleFailure { .. } => WsStatus::EnsembleFailure,
            Error::Io { .. } => WsStatus::Io,
            Error::Parse { .. } => WsStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside wstate".into());
            WsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(WsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(WsStatus::InvalidArgument, msg.into())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn state_name(p: *const c_char) -> Result<NamedState, Failure> {
    Ok(text(p, "state name")?.parse::<NamedState>()?)
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Failure(
            WsStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed to hold the last error message, including the terminator.
#[no_mangle]
pub extern "C" fn ws_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ws_last_error_message(buf: *mut c_char, len: usize) -> WsStatus {
    if buf.is_null() {
        return WsStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if len < msg.len() + 1 {
            return WsStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, msg.len());
        *buf.add(msg.len()) = 0;
        WsStatus::Ok
    })
}

/// Parameters with the default values.
#[no_mangle]
pub extern "C" fn ws_params_new() -> *mut WsParams {
    Box::into_raw(Box::new(WsParams {
        inner: SystemParams::default(),
    }))
}

/// # Safety
/// `params` must come from `ws_params_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_params_free(params: *mut WsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

fn field<'a>(p: &'a mut SystemParams, name: &str) -> Result<&'a mut f64, Failure> {
    Ok(match name {
        "kappa" => &mut p.kappa,
        "chi" => &mut p.chi,
        "epsilon" => &mut p.epsilon,
        "g" => &mut p.g,
        "eta" => &mut p.eta,
        "phi" => &mut p.phi,
        "f_max" => &mut p.f_max,
        "dt" => &mut p.dt,
        "gamma_1" => &mut p.gamma[0],
        "gamma_2" => &mut p.gamma[1],
        "gamma_3" => &mut p.gamma[2],
        other => return Err(invalid(format!("unknown parameter '{other}'"))),
    })
}

/// Sets a parameter by name. `gamma` sets all three decay rates and
/// `include_stray_drive` takes 0 or 1.
///
/// # Safety
/// `params` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ws_params_set(params: *mut WsParams, name: *const c_char, value: f64) -> WsStatus {
    guard(|| {
        let p = &mut borrow_mut(params, "params")?.inner;
        match text(name, "name")? {
            "gamma" => p.gamma = [value; 3],
            "include_stray_drive" => p.include_stray_drive = value != 0.0,
            other => *field(p, other)? = value,
        }
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle, `name` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_params_get(params: *const WsParams, name: *const c_char, out: *mut f64) -> WsStatus {
    guard(|| {
        let mut p = borrow(params, "params")?.inner;
        let v = match text(name, "name")? {
            "include_stray_drive" => f64::from(u8::from(p.include_stray_drive)),
            other => *field(&mut p, other)?,
        };
        put(out, v, "out")
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_params_validate(params: *const WsParams) -> WsStatus {
    guard(|| Ok(borrow(params, "params")?.inner.validate()?))
}

/// Steady outcome plateaus of `<c_0 + c_0^dag>` for `|111>`, two
/// excitations, one excitation and `|000>`.
///
/// # Safety
/// `params` must be a live handle and `out` writable for 4 values.
#[no_mangle]
pub unsafe extern "C" fn ws_outcome_plateaus(params: *const WsParams, out: *mut f64) -> WsStatus {
    guard(|| {
        let p = borrow(params, "params")?.inner;
        p.validate()?;
        copy_out(&theoretical_plateaus(&p), out, 4)
    })
}

/// Steady outcome gap between `|000>` and one excitation at `chi / kappa`.
///
/// # Safety
/// `params` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_outcome_separation(
    params: *const WsParams,
    chi_over_kappa: f64,
    out: *mut f64,
) -> WsStatus {
    guard(|| {
        let p = borrow(params, "params")?.inner;
        put(out, outcome_separation(chi_over_kappa, &p), "out")
    })
}

/// Projector onto a named state: `ground`, `excited`, `w_minus`, `w_plus`
/// or `separable_plus`.
///
/// # Safety
/// `name` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_state_new_named(name: *const c_char, out: *mut *mut WsState) -> WsStatus {
    guard(|| {
        let s = state_name(name)?;
        let handle = Box::into_raw(Box::new(WsState {
            inner: named_state(s).projector(),
        }));
        put(out, handle, "out")
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_state_free(state: *mut WsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Element `(row, col)` of the density matrix.
///
/// # Safety
/// `state` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_state_element(
    state: *const WsState,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> WsStatus {
    guard(|| {
        let s = borrow(state, "state")?;
        if row >= DIM || col >= DIM {
            return Err(invalid(format!("index ({row}, {col}) outside 8x8")));
        }
        let z = s.inner.0[(row, col)];
        put(re, z.re, "re")?;
        put(im, z.im, "im")
    })
}

/// Fidelity of `state` with a named pure state.
///
/// # Safety
/// `state` must be a live handle, `target` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_state_fidelity(state: *const WsState, target: *const c_char, out: *mut f64) -> WsStatus {
    guard(|| {
        let s = borrow(state, "state")?;
        let t = state_name(target)?;
        put(out, fidelity(&s.inner, &named_state(t)), "out")
    })
}

/// Runs one trajectory from a named initial state. Fidelity is measured
/// against `|W->`.
///
/// # Safety
/// `params` must be a live handle, `initial` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_run(
    params: *const WsParams,
    initial: *const c_char,
    engine: WsEngine,
    control: WsControl,
    t_final: f64,
    seed: u64,
    stride: usize,
    out: *mut *mut WsTrajectory,
) -> WsStatus {
    guard(|| {
        let p = borrow(params, "params")?.inner;
        let s = state_name(initial)?;
        let engine = match engine {
            WsEngine::Polaron => EngineKind::Polaron,
            WsEngine::Adiabatic => EngineKind::Adiabatic,
        };
        let mut config = TrajectoryConfig::new(p, s)
            .with_engine(engine)
            .with_t_final(t_final)
            .with_seed(seed)
            .with_stride(stride);
        let rule = match control {
            WsControl::None => None,
            WsControl::SignZero => Some(SignRule::Zero),
            WsControl::SignPositive => Some(SignRule::Positive),
        };
        if let Some(rule) = rule {
            config = config.with_controller(FeedbackLaw::new(p.f_max).with_sign_rule(rule));
        }
        let record = run_trajectory(&config)?;
        put(out, Box::into_raw(Box::new(WsTrajectory { inner: record })), "out")
    })
}

/// # Safety
/// `trajectory` must come from `ws_trajectory_run` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_free(trajectory: *mut WsTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of stored samples; 0 for a null handle.
///
/// # Safety
/// `trajectory` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_len(trajectory: *const WsTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.times.len())
}

/// # Safety
/// `trajectory` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_times(trajectory: *const WsTrajectory, buf: *mut f64, len: usize) -> WsStatus {
    guard(|| copy_out(&borrow(trajectory, "trajectory")?.inner.times, buf, len))
}

/// # Safety
/// `trajectory` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_fidelity(
    trajectory: *const WsTrajectory,
    buf: *mut f64,
    len: usize,
) -> WsStatus {
    guard(|| copy_out(&borrow(trajectory, "trajectory")?.inner.fidelity, buf, len))
}

/// Noiseless `<c_0 + c_0^dag>` at each stored time.
///
/// # Safety
/// `trajectory` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_outcome(
    trajectory: *const WsTrajectory,
    buf: *mut f64,
    len: usize,
) -> WsStatus {
    guard(|| copy_out(&borrow(trajectory, "trajectory")?.inner.outcome, buf, len))
}

/// Copy of the final conditional state.
///
/// # Safety
/// `trajectory` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_trajectory_final_state(trajectory: *const WsTrajectory, out: *mut *mut WsState) -> WsStatus {
    guard(|| {
        let t = borrow(trajectory, "trajectory")?;
        put(
            out,
            Box::into_raw(Box::new(WsState {
                inner: t.inner.final_state,
            })),
            "out",
        )
    })
}

/// Runs the experiment described by a flat TOML file and writes its outputs.
///
/// # Safety
/// `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ws_experiment_run_file(path: *const c_char) -> WsStatus {
    guard(|| {
        let config = ExperimentConfig::load(Path::new(text(path, "path")?))?;
        run_experiment(&config)?;
        Ok(())
    })
}

/// Runs the experiment described by TOML text. A nonzero `overwrite_seed`
/// replaces the master seed.
///
/// # Safety
/// `toml` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ws_experiment_run_toml(toml: *const c_char, overwrite_seed: c_int, seed: u64) -> WsStatus {
    guard(|| {
        let mut config = ExperimentConfig::from_toml(text(toml, "toml")?)?;
        if overwrite_seed != 0 {
            config.master_seed = seed;
        }
        run_experiment(&config)?;
        Ok(())
    })
}
