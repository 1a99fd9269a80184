//! C ABI over `rdg-core`.
//!
//! Every function returns an [`RdgStatus`]. On failure a description is
//! available from [`rdg_last_error_message`] on the same thread. Simulations
//! are opaque handles owned by the caller and released with
//! [`rdg_simulation_free`]. Field buffers hold `3 * N` doubles: all `n1`
//! values in grid order, then `n2`, then `n3`, where the first axis varies
//! fastest.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rdg_core::cli::verify_discrete_gradients;
use rdg_core::energy::Kinematics;
use rdg_core::field::linf_length_error;
use rdg_core::io::parse_config;
use rdg_core::{
    DirectorField, DiscreteGradientKind, ElasticParams, Error, Grid, SolverConfig, SpectralPlan, StepMode, Stepper,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    SolverFailure = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RdgKind {
    MeanValue = 0,
    Gonzalez = 1,
    OseenFrank = 2,
}

/// Discrete gradient selection. `gauss_points` applies to the mean-value
/// gradient and `eps0` to Gonzalez.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RdgMethod {
    pub kind: RdgKind,
    pub gauss_points: u32,
    pub eps0: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct RdgGridSpec {
    pub dims: [usize; 3],
    pub lengths: [f64; 3],
    pub origin: [f64; 3],
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RdgEnergy {
    pub total: f64,
    pub splay: f64,
    pub twist: f64,
    pub bend: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct RdgStepInfo {
    pub t: f64,
    pub tau: f64,
    pub energy: RdgEnergy,
    pub linf_length_err: f64,
    pub newton_iters: usize,
    pub krylov_iters: usize,
    pub fevals: usize,
}

/// Opaque simulation state.
pub struct RdgSimulation {
    plan: SpectralPlan,
    params: ElasticParams,
    kind: DiscreteGradientKind,
    solver: SolverConfig,
    field: DirectorField,
    t: f64,
    default_tau: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(RdgStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::SolverFailure { .. } => RdgStatus::SolverFailure,
            Error::Config { .. } => RdgStatus::Config,
            Error::Io { .. } => RdgStatus::Io,
            _ => RdgStatus::InvalidArgument,
        };
        Failure(status, err.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(RdgStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RdgStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RdgStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a valid pointer.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(RdgStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, unaliased pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(RdgStatus::NullPointer, format!("{what} is null")))
}

fn method_kind(m: &RdgMethod) -> Result<DiscreteGradientKind, Failure> {
    let kind = match m.kind {
        RdgKind::MeanValue => DiscreteGradientKind::MeanValue {
            gauss_points: m.gauss_points as usize,
        },
        RdgKind::Gonzalez => DiscreteGradientKind::Gonzalez { eps0: m.eps0 },
        RdgKind::OseenFrank => DiscreteGradientKind::OseenFrank,
    };
    kind.validate()?;
    Ok(kind)
}

fn to_energy(e: &rdg_core::EnergyBreakdown) -> RdgEnergy {
    RdgEnergy {
        total: e.total,
        splay: e.splay,
        twist: e.twist,
        bend: e.bend,
    }
}

fn publish(sim: RdgSimulation, out: *mut *mut RdgSimulation) -> Result<(), Failure> {
    let out = non_null_mut(out, "out")?;
    *out = Box::into_raw(Box::new(sim));
    Ok(())
}

/// Creates a simulation from configuration text (the same format as the
/// `rdg run` config file). The field starts at the configured initial
/// condition and `rdg_simulation_step` with `tau <= 0` uses the configured
/// fixed step, or `tau_max` for adaptive controls.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_from_config(config: *const c_char, out: *mut *mut RdgSimulation) -> RdgStatus {
    guard(|| {
        if config.is_null() {
            return Err(Failure(RdgStatus::NullPointer, "config is null".into()));
        }
        // SAFETY: checked for null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(config) }
            .to_str()
            .map_err(|_| invalid("config is not valid UTF-8"))?;
        let cfg = parse_config(text)?;
        let field = cfg.initial.sample(&cfg.grid)?;
        let default_tau = match cfg.controls.mode {
            StepMode::Fixed { tau } => tau,
            StepMode::Adaptive { tau_max, .. } => tau_max,
        };
        publish(
            RdgSimulation {
                plan: SpectralPlan::with_dealiasing(cfg.grid, cfg.dealias),
                params: cfg.params,
                kind: cfg.kind,
                solver: cfg.solver,
                field,
                t: cfg.controls.t_start,
                default_tau,
            },
            out,
        )
    })
}

/// Creates a simulation with default solver settings. The field starts as
/// the uniform director `(0, 0, 1)` at `t = 0`.
///
/// # Safety
/// `grid`, `method` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_new(
    grid: *const RdgGridSpec,
    k1: f64,
    k2: f64,
    k3: f64,
    method: *const RdgMethod,
    out: *mut *mut RdgSimulation,
) -> RdgStatus {
    guard(|| {
        let spec = non_null(grid, "grid")?;
        let kind = method_kind(non_null(method, "method")?)?;
        let grid = Grid::new(spec.dims, spec.lengths, spec.origin)?;
        let params = ElasticParams::new(k1, k2, k3)?;
        publish(
            RdgSimulation {
                plan: SpectralPlan::new(grid),
                params,
                kind,
                solver: SolverConfig::default(),
                field: DirectorField::constant(grid, [0.0, 0.0, 1.0]),
                t: 0.0,
                default_tau: 0.0,
            },
            out,
        )
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_free(sim: *mut RdgSimulation) {
    if !sim.is_null() {
        // SAFETY: the pointer was produced by `Box::into_raw` in `publish`.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Number of grid points `N`.
///
/// # Safety
/// `sim` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_point_count(sim: *const RdgSimulation, out: *mut usize) -> RdgStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        *non_null_mut(out, "out")? = sim.plan.grid().len();
        Ok(())
    })
}

/// Replaces the field with `len = 3 N` finite values.
///
/// # Safety
/// `data` must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_set_field(sim: *mut RdgSimulation, data: *const f64, len: usize) -> RdgStatus {
    guard(|| {
        let sim = non_null_mut(sim, "sim")?;
        non_null(data, "data")?;
        let expected = 3 * sim.plan.grid().len();
        if len != expected {
            return Err(invalid(format!("expected {expected} values, got {len}")));
        }
        // SAFETY: non-null and the caller guarantees `len` readable values.
        let values = unsafe { std::slice::from_raw_parts(data, len) }.to_vec();
        sim.field = DirectorField::from_flat(*sim.plan.grid(), values)?;
        Ok(())
    })
}

/// Copies the field into `out`, which must hold `len = 3 N` doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_get_field(sim: *const RdgSimulation, out: *mut f64, len: usize) -> RdgStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        non_null_mut(out, "out")?;
        let src = sim.field.as_slice();
        if len != src.len() {
            return Err(invalid(format!("expected {} values, got {len}", src.len())));
        }
        // SAFETY: non-null and the caller guarantees `len` writable values.
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, len) };
        Ok(())
    })
}

/// Advances one step of size `tau` (the configured default when `tau <= 0`).
/// On solver failure the state is left unchanged. `info` may be null.
///
/// # Safety
/// `sim` must be valid; `info` null or valid.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_step(sim: *mut RdgSimulation, tau: f64, info: *mut RdgStepInfo) -> RdgStatus {
    guard(|| {
        let sim = non_null_mut(sim, "sim")?;
        let tau = if tau > 0.0 { tau } else { sim.default_tau };
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid("no positive step size given or configured"));
        }
        let stepper = Stepper::new(&sim.plan, sim.params, sim.kind, sim.solver)?;
        let (next, record) = stepper.step(&sim.field, sim.t, tau, None)?;
        sim.field = next;
        sim.t = record.t;
        // SAFETY: the caller passes null or a valid pointer.
        if let Some(info) = unsafe { info.as_mut() } {
            *info = RdgStepInfo {
                t: record.t,
                tau: record.tau,
                energy: to_energy(&record.energy),
                linf_length_err: record.linf_length_error,
                newton_iters: record.stats.newton_iters,
                krylov_iters: record.stats.krylov_iters_total,
                fevals: record.stats.function_evals,
            };
        }
        Ok(())
    })
}

/// Current simulation time.
///
/// # Safety
/// `sim` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_time(sim: *const RdgSimulation, out: *mut f64) -> RdgStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        *non_null_mut(out, "out")? = sim.t;
        Ok(())
    })
}

/// Energy of the current field.
///
/// # Safety
/// `sim` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_energy(sim: *const RdgSimulation, out: *mut RdgEnergy) -> RdgStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        let e = Kinematics::of(&sim.plan, &sim.field)?.energy(&sim.params);
        *non_null_mut(out, "out")? = to_energy(&e);
        Ok(())
    })
}

/// Largest `| |n| − 1 |` over the grid.
///
/// # Safety
/// `sim` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rdg_simulation_length_error(sim: *const RdgSimulation, out: *mut f64) -> RdgStatus {
    guard(|| {
        let sim = non_null(sim, "sim")?;
        *non_null_mut(out, "out")? = linf_length_error(&sim.field);
        Ok(())
    })
}

/// Worst discrete gradient identity residual over all gradients and `trials`
/// random field pairs on an `n³` periodic cube with moduli `k1, k2, k3`.
///
/// # Safety
/// `max_residual` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rdg_verify_dg(
    n: usize,
    trials: usize,
    seed: u64,
    k1: f64,
    k2: f64,
    k3: f64,
    max_residual: *mut f64,
) -> RdgStatus {
    guard(|| {
        let out = non_null_mut(max_residual, "max_residual")?;
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        let checks = verify_discrete_gradients(n, trials, seed, &ElasticParams::new(k1, k2, k3)?)?;
        *out = checks.iter().map(|c| c.max_residual).fold(0.0, f64::max);
        Ok(())
    })
}

/// Description of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn rdg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
