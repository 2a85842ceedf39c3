//! C interface to `cqtraj`.
//!
//! States and trajectories are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`CqStatus`]; on failure
//! the message is kept per thread and read back with
//! [`cq_last_error_message`]. Handles are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use cqtraj::born::born_direct;
use cqtraj::dynamics::{self, IntegratorSettings, Trajectory};
use cqtraj::extended::{self, Mask};
use cqtraj::{Error, StateSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NodeProximity = 3,
    StationaryPoint = 4,
    DegeneratePoint = 5,
    StepFailure = 6,
    HorizonExceeded = 7,
    UnsupportedState = 8,
    MaskViolation = 9,
    Verdict = 10,
    Parse = 11,
    Validation = 12,
    Io = 13,
    OutOfRange = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqMask {
    Defined = 0,
    Overdetermined = 1,
    Unreached = 2,
    NearNode = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CqComplex {
    pub re: f64,
    pub im: f64,
}

/// Integrator controls; fill with [`cq_integrator_defaults`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqIntegrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub node_guard: f64,
    pub max_steps: u64,
    pub horizon_periods: f64,
}

/// Opaque stationary state.
pub struct CqState(StateSpec);

/// Opaque integrated trajectory.
pub struct CqTrajectory(Trajectory);

impl From<Complex64> for CqComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<CqComplex> for Complex64 {
    fn from(z: CqComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Mask> for CqMask {
    fn from(m: Mask) -> Self {
        match m {
            Mask::Defined => CqMask::Defined,
            Mask::Overdetermined => CqMask::Overdetermined,
            Mask::Unreached => CqMask::Unreached,
            Mask::NearNode => CqMask::NearNode,
        }
    }
}

impl From<&IntegratorSettings> for CqIntegrator {
    fn from(s: &IntegratorSettings) -> Self {
        Self {
            rel_tol: s.rel_tol,
            abs_tol: s.abs_tol,
            max_step: s.max_step,
            node_guard: s.node_guard,
            max_steps: s.max_steps as u64,
            horizon_periods: s.horizon_periods,
        }
    }
}

impl CqIntegrator {
    fn settings(&self) -> IntegratorSettings {
        IntegratorSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            node_guard: self.node_guard,
            max_steps: usize::try_from(self.max_steps).unwrap_or(usize::MAX),
            horizon_periods: self.horizon_periods,
            ..IntegratorSettings::default()
        }
    }
}

fn status_of(e: &Error) -> CqStatus {
    match e {
        Error::NodeProximity { .. } | Error::NodeOnGrid { .. } => CqStatus::NodeProximity,
        Error::StationaryPoint { .. } => CqStatus::StationaryPoint,
        Error::DegeneratePoint { .. } => CqStatus::DegeneratePoint,
        Error::StepFailure { .. } => CqStatus::StepFailure,
        Error::HorizonExceeded { .. } => CqStatus::HorizonExceeded,
        Error::InvalidGrid(_) => CqStatus::InvalidArgument,
        Error::UnsupportedState(_) => CqStatus::UnsupportedState,
        Error::MaskViolation { .. } => CqStatus::MaskViolation,
        Error::Verdict { .. } => CqStatus::Verdict,
        Error::Parse { .. } => CqStatus::Parse,
        Error::Validation(_) => CqStatus::Validation,
        Error::Io(_) => CqStatus::Io,
        Error::Context { source, .. } => status_of(source),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CqStatus, message: impl Into<String>) -> CqStatus {
    set_error(message.into());
    status
}

/// Runs `body`, converting errors and panics into status codes.
fn guarded(body: impl FnOnce() -> Result<(), CqStatus>) -> CqStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CqStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(CqStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: cqtraj::Result<T>) -> Result<T, CqStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn state_ref<'a>(state: *const CqState) -> Result<&'a StateSpec, CqStatus> {
    state
        .as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| fail(CqStatus::NullPointer, "state handle is null"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), CqStatus> {
    if out.is_null() {
        return Err(fail(CqStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a state string such as `ho:n=1` or `well:n=1,a=pi`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_state_parse(text: *const c_char, out: *mut *mut CqState) -> CqStatus {
    guarded(|| {
        if text.is_null() {
            return Err(fail(CqStatus::NullPointer, "state text is null"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| fail(CqStatus::Parse, "state text is not UTF-8"))?;
        let spec: StateSpec = s
            .parse()
            .map_err(|e: Error| fail(status_of(&e), e.to_string()))?;
        write(out, Box::into_raw(Box::new(CqState(spec))))
    })
}

/// # Safety
/// `state` must come from [`cq_state_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cq_state_free(state: *mut CqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes the canonical state string (with NUL) into `buf` when it fits and
/// returns the length needed including the NUL.
///
/// # Safety
/// `buf` must hold `len` bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn cq_state_describe(
    state: *const CqState,
    buf: *mut c_char,
    len: usize,
) -> usize {
    let Some(s) = state.as_ref() else { return 0 };
    let text = s.0.to_string();
    let needed = text.len() + 1;
    if !buf.is_null() && len >= needed {
        ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, text.len());
        *buf.add(text.len()) = 0;
    }
    needed
}

/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_state_energy(state: *const CqState, out: *mut f64) -> CqStatus {
    guarded(|| write(out, state_ref(state)?.energy()))
}

/// Ψ(x) and Ψ′(x).
///
/// # Safety
/// Pointers must be valid; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cq_eval(
    state: *const CqState,
    x: CqComplex,
    psi: *mut CqComplex,
    dpsi: *mut CqComplex,
) -> CqStatus {
    guarded(|| {
        let s = state_ref(state)?.eval(x.into());
        write(psi, s.psi.into())?;
        write(dpsi, s.dpsi.into())
    })
}

/// ẋ from the logarithmic derivative of Ψ.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_velocity(
    state: *const CqState,
    x: CqComplex,
    out: *mut CqComplex,
) -> CqStatus {
    guarded(|| {
        let v = lift(dynamics::velocity(state_ref(state)?, x.into()))?;
        write(out, v.into())
    })
}

/// ẋ from the energy relation, independent of Ψ′.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_velocity_alt(
    state: *const CqState,
    x: CqComplex,
    out: *mut CqComplex,
) -> CqStatus {
    guarded(|| {
        let v = lift(dynamics::velocity_alt(state_ref(state)?, x.into()))?;
        write(out, v.into())
    })
}

/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_complex_energy(
    state: *const CqState,
    x: CqComplex,
    out: *mut CqComplex,
) -> CqStatus {
    guarded(|| {
        let e = lift(dynamics::complex_energy(state_ref(state)?, x.into()))?;
        write(out, e.into())
    })
}

/// `|A|`, constant along each path.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_path_constant(
    state: *const CqState,
    x: CqComplex,
    out: *mut f64,
) -> CqStatus {
    guarded(|| write(out, dynamics::path_constant(state_ref(state)?, x.into())))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cq_integrator_defaults(out: *mut CqIntegrator) -> CqStatus {
    guarded(|| write(out, CqIntegrator::from(&IntegratorSettings::default())))
}

unsafe fn settings_or_default(settings: *const CqIntegrator) -> IntegratorSettings {
    settings
        .as_ref()
        .map_or_else(IntegratorSettings::default, CqIntegrator::settings)
}

/// Integrates `ẋ` from `x0` over `[t0, t1]`. `settings` may be null for
/// defaults.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_integrate_trajectory(
    state: *const CqState,
    x0: CqComplex,
    t0: f64,
    t1: f64,
    settings: *const CqIntegrator,
    out: *mut *mut CqTrajectory,
) -> CqStatus {
    guarded(|| {
        let spec = state_ref(state)?;
        let tr = lift(dynamics::integrate_trajectory(
            spec,
            x0.into(),
            (t0, t1),
            &settings_or_default(settings),
        ))?;
        write(out, Box::into_raw(Box::new(CqTrajectory(tr))))
    })
}

/// One closed loop through `x0`, or the horizon for open curves.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_integrate_loop(
    state: *const CqState,
    x0: CqComplex,
    settings: *const CqIntegrator,
    out: *mut *mut CqTrajectory,
) -> CqStatus {
    guarded(|| {
        let spec = state_ref(state)?;
        let tr = lift(dynamics::integrate_loop(
            spec,
            x0.into(),
            &settings_or_default(settings),
        ))?;
        write(out, Box::into_raw(Box::new(CqTrajectory(tr))))
    })
}

/// # Safety
/// `traj` must come from an integrate call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cq_trajectory_free(traj: *mut CqTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples, 0 for a null handle.
///
/// # Safety
/// `traj` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn cq_trajectory_len(traj: *const CqTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Sample `index`: time, position and velocity.
///
/// # Safety
/// Pointers must be valid; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cq_trajectory_sample(
    traj: *const CqTrajectory,
    index: usize,
    t: *mut f64,
    x: *mut CqComplex,
    xdot: *mut CqComplex,
) -> CqStatus {
    guarded(|| {
        let tr = traj
            .as_ref()
            .ok_or_else(|| fail(CqStatus::NullPointer, "trajectory handle is null"))?;
        let s = tr.0.samples.get(index).ok_or_else(|| {
            fail(
                CqStatus::OutOfRange,
                format!("sample {index} out of range (len {})", tr.0.samples.len()),
            )
        })?;
        write(t, s.t)?;
        write(x, s.x.into())?;
        write(xdot, s.xdot.into())
    })
}

/// Path constant at the start and its largest relative drift.
///
/// # Safety
/// Pointers must be valid; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cq_trajectory_path_constant(
    traj: *const CqTrajectory,
    value: *mut f64,
    max_drift: *mut f64,
) -> CqStatus {
    guarded(|| {
        let tr = traj
            .as_ref()
            .ok_or_else(|| fail(CqStatus::NullPointer, "trajectory handle is null"))?;
        write(value, tr.0.path_constant)?;
        write(max_drift, tr.0.max_drift)
    })
}

/// Closed-form extended density and its mask.
///
/// # Safety
/// Pointers must be valid; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cq_closed_form_rho(
    state: *const CqState,
    x: CqComplex,
    rho: *mut f64,
    mask: *mut CqMask,
) -> CqStatus {
    guarded(|| {
        let (r, m) = lift(extended::closed_form_rho(state_ref(state)?, x.into()))?;
        write(rho, r)?;
        write(mask, m.into())
    })
}

/// Extended density by transport from the path's real-axis crossing.
///
/// # Safety
/// Pointers must be valid; outputs writable; `settings` may be null.
#[no_mangle]
pub unsafe extern "C" fn cq_rho_at_point(
    state: *const CqState,
    x: CqComplex,
    settings: *const CqIntegrator,
    rho: *mut f64,
    mask: *mut CqMask,
) -> CqStatus {
    guarded(|| {
        let spec = state_ref(state)?;
        let (r, m) = lift(extended::rho_at_point(
            spec,
            x.into(),
            &settings_or_default(settings),
        ))?;
        write(rho, r)?;
        write(mask, m.into())
    })
}

/// Unnormalized `|Ψ(x_r)|²`.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_born_direct(
    state: *const CqState,
    x_r: f64,
    out: *mut f64,
) -> CqStatus {
    guarded(|| {
        if !x_r.is_finite() {
            return Err(fail(CqStatus::InvalidArgument, "x_r must be finite"));
        }
        write(out, born_direct(state_ref(state)?, x_r))
    })
}
