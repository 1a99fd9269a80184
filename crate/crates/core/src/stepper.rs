//! The rotational discrete-gradient step
//! `(n^{m+1} − n^m)/τ = −n^{m+1/2} × (D × n^{m+1/2}) + f(t_{m+1/2})`,
//! the energy-based step-size controller and the run loop.

use crate::discrete_gradient::{AnchoredGradient, DiscreteGradientKind};
use crate::energy::{ElasticParams, EnergyBreakdown, Kinematics};
use crate::error::{Error, Result};
use crate::field::{cross_unchecked, inner_unchecked, lincomb_unchecked, linf_length_error, DirectorField};
use crate::newton_krylov::{solve_with_floor, SolveStats, SolverConfig};
use crate::spectral::SpectralPlan;

/// Body force sampled at a given time.
pub type ForcingFn<'a> = dyn Fn(f64) -> DirectorField + Sync + 'a;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepMode {
    Fixed { tau: f64 },
    Adaptive { tau_min: f64, tau_max: f64, alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeControls {
    pub mode: StepMode,
    pub t_start: f64,
    pub t_end: f64,
}

impl TimeControls {
    pub fn fixed(tau: f64, t_start: f64, t_end: f64) -> Result<Self> {
        let c = TimeControls {
            mode: StepMode::Fixed { tau },
            t_start,
            t_end,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn adaptive(tau_min: f64, tau_max: f64, alpha: f64, t_start: f64, t_end: f64) -> Result<Self> {
        let c = TimeControls {
            mode: StepMode::Adaptive {
                tau_min,
                tau_max,
                alpha,
            },
            t_start,
            t_end,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return bad("t_end must exceed t_start");
        }
        match self.mode {
            StepMode::Fixed { tau } if !(tau > 0.0 && tau.is_finite()) => bad("tau must be positive"),
            StepMode::Adaptive {
                tau_min,
                tau_max,
                alpha,
            } => {
                if !(tau_min > 0.0 && tau_min <= tau_max && tau_max.is_finite()) {
                    bad("adaptive controls need 0 < tau_min <= tau_max")
                } else if !(alpha > 0.0 && alpha.is_finite()) {
                    bad("alpha must be positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Diagnostics of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// 1-based index of the accepted step.
    pub step: usize,
    /// Time reached by the step.
    pub t: f64,
    pub tau: f64,
    pub energy: EnergyBreakdown,
    pub linf_length_error: f64,
    pub stats: SolveStats,
    /// `τ ‖D × n^{m+1/2}‖²` at the accepted state.
    pub dissipation: f64,
    /// Step-size halvings needed before the solve converged.
    pub retries: usize,
}

/// `τ_max / √(1 + α |(F_m − F_{m−1}) / τ_m|²)`, clamped below by `τ_min`.
/// Fixed-step controls return their `τ`.
pub fn adaptive_tau(f_m: f64, f_mm1: f64, tau_m: f64, controls: &TimeControls) -> f64 {
    match controls.mode {
        StepMode::Fixed { tau } => tau,
        StepMode::Adaptive {
            tau_min,
            tau_max,
            alpha,
        } => {
            let rate = (f_m - f_mm1) / tau_m;
            (tau_max / (1.0 + alpha * rate * rate).sqrt()).max(tau_min)
        }
    }
}

/// Stationary data of a time-stepping problem.
#[derive(Clone, Copy)]
pub struct Stepper<'a> {
    pub plan: &'a SpectralPlan,
    pub params: ElasticParams,
    pub kind: DiscreteGradientKind,
    pub solver: SolverConfig,
    pub forcing: Option<&'a ForcingFn<'a>>,
}

struct Residual<'a, 'b> {
    dg: AnchoredGradient<'b>,
    nm: &'b DirectorField,
    inv_tau: f64,
    forcing: Option<&'a DirectorField>,
}

impl Residual<'_, '_> {
    fn eval(&self, candidate: &DirectorField) -> DirectorField {
        let d = self.dg.evaluate(candidate);
        let n_half = lincomb_unchecked(0.5, self.nm, 0.5, candidate);
        let rot = cross_unchecked(&n_half, &cross_unchecked(&d, &n_half));
        let mut r = lincomb_unchecked(self.inv_tau, candidate, -self.inv_tau, self.nm);
        r.axpy(1.0, &rot).unwrap();
        if let Some(f) = self.forcing {
            r.axpy(-1.0, f).unwrap();
        }
        r
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")))
    }
}

/// `(c − n^m)/τ + n_h × (D(n^m, c) × n_h) − f` with `n_h = (n^m + c)/2`.
/// `forcing` is the body force already sampled at the half step.
pub fn rdg_residual(
    plan: &SpectralPlan,
    nm: &DirectorField,
    candidate: &DirectorField,
    tau: f64,
    kind: DiscreteGradientKind,
    p: &ElasticParams,
    forcing: Option<&DirectorField>,
) -> Result<DirectorField> {
    check_tau(tau)?;
    plan.grid().ensure_same(candidate.grid())?;
    if let Some(f) = forcing {
        plan.grid().ensure_same(f.grid())?;
    }
    let res = Residual {
        dg: AnchoredGradient::new(plan, kind, nm, *p)?,
        nm,
        inv_tau: 1.0 / tau,
        forcing,
    };
    Ok(res.eval(candidate))
}

/// `τ ‖D(n^m, n^{m+1}) × n^{m+1/2}‖²`, the dissipation the scheme guarantees.
pub fn dissipation(
    plan: &SpectralPlan,
    nm: &DirectorField,
    np1: &DirectorField,
    tau: f64,
    kind: DiscreteGradientKind,
    p: &ElasticParams,
) -> Result<f64> {
    let dg = AnchoredGradient::new(plan, kind, nm, *p)?;
    plan.grid().ensure_same(np1.grid())?;
    let d = dg.evaluate(np1);
    let w = cross_unchecked(&d, &lincomb_unchecked(0.5, nm, 0.5, np1));
    Ok(tau * inner_unchecked(&w, &w))
}

impl<'a> Stepper<'a> {
    pub fn new(
        plan: &'a SpectralPlan,
        params: ElasticParams,
        kind: DiscreteGradientKind,
        solver: SolverConfig,
    ) -> Result<Self> {
        kind.validate()?;
        solver.validate()?;
        Ok(Stepper {
            plan,
            params,
            kind,
            solver,
            forcing: None,
        })
    }

    pub fn with_forcing(mut self, forcing: &'a ForcingFn<'a>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// One implicit step from `(t, n^m)` with size `τ`, starting Newton at
    /// `guess` (default `n^m`). A non-converged solve is an error carrying its
    /// statistics.
    pub fn step(
        &self,
        nm: &DirectorField,
        t: f64,
        tau: f64,
        guess: Option<&DirectorField>,
    ) -> Result<(DirectorField, StepRecord)> {
        check_tau(tau)?;
        self.plan.grid().ensure_same(nm.grid())?;
        let f_half = self.forcing.map(|f| f(t + 0.5 * tau));
        let res = Residual {
            dg: AnchoredGradient::new(self.plan, self.kind, nm, self.params)?,
            nm,
            inv_tau: 1.0 / tau,
            forcing: f_half.as_ref(),
        };
        let start = guess.cloned().unwrap_or_else(|| nm.clone());
        // Below this residual a Newton correction (of size about τ‖r‖) no
        // longer changes the state in double precision.
        let floor = f64::EPSILON / tau;
        let (np1, stats) = if self.solver.precondition {
            let shift = 1.0 / tau;
            let coef = 0.5 * self.params.max_modulus();
            let plan = self.plan;
            let pinv = move |v: &DirectorField| plan.solve_shifted_laplacian(v, shift, coef).unwrap();
            solve_with_floor(|c: &DirectorField| res.eval(c), start, &self.solver, Some(pinv), floor)
        } else {
            solve_with_floor(
                |c: &DirectorField| res.eval(c),
                start,
                &self.solver,
                None::<fn(&DirectorField) -> DirectorField>,
                floor,
            )
        };
        if !stats.converged {
            return Err(Error::SolverFailure { stats });
        }
        let d = res.dg.evaluate(&np1);
        let w = cross_unchecked(&d, &lincomb_unchecked(0.5, nm, 0.5, &np1));
        let energy = Kinematics::of_unchecked(self.plan, &np1).energy(&self.params);
        let record = StepRecord {
            step: 0,
            t: t + tau,
            tau,
            energy,
            linf_length_error: linf_length_error(&np1),
            stats,
            dissipation: tau * inner_unchecked(&w, &w),
            retries: 0,
        };
        Ok((np1, record))
    }
}

/// When the run loop hands the state to [`RunObserver::on_snapshot`].
#[derive(Clone, Debug, Default, PartialEq)]
pub enum SnapshotSchedule {
    #[default]
    Never,
    /// Every `k` accepted steps (and the initial state).
    EveryKSteps(usize),
    /// At the first accepted state with `t ≥` each listed time.
    Times(Vec<f64>),
}

/// Receives the run's output. The stepper does no I/O of its own.
pub trait RunObserver {
    fn on_start(&mut self, _t: f64, _n: &DirectorField, _energy: &EnergyBreakdown) -> Result<()> {
        Ok(())
    }
    fn on_step(&mut self, record: &StepRecord, n: &DirectorField) -> Result<()>;
    fn on_snapshot(&mut self, _t: f64, _n: &DirectorField) -> Result<()> {
        Ok(())
    }
    /// Called once, also when the run aborts.
    fn on_finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Collects records in memory.
#[derive(Clone, Debug, Default)]
pub struct RecordCollector {
    pub initial_energy: EnergyBreakdown,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(f64, DirectorField)>,
}

impl RunObserver for RecordCollector {
    fn on_start(&mut self, _t: f64, _n: &DirectorField, energy: &EnergyBreakdown) -> Result<()> {
        self.initial_energy = *energy;
        Ok(())
    }
    fn on_step(&mut self, record: &StepRecord, _n: &DirectorField) -> Result<()> {
        self.records.push(*record);
        Ok(())
    }
    fn on_snapshot(&mut self, t: f64, n: &DirectorField) -> Result<()> {
        self.snapshots.push((t, n.clone()));
        Ok(())
    }
}

/// Final state of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub field: DirectorField,
    pub t: f64,
    pub steps: usize,
}

/// Halvings attempted after a failed solve before the run aborts.
pub const MAX_RETRIES: usize = 3;

/// Marches `n0` from `t_start` to `t_end`, reporting every accepted step.
pub fn run(
    stepper: &Stepper,
    n0: &DirectorField,
    controls: &TimeControls,
    schedule: &SnapshotSchedule,
    observer: &mut dyn RunObserver,
) -> Result<RunOutcome> {
    let result = march(stepper, n0, controls, schedule, observer);
    let finish = observer.on_finish();
    let outcome = result?;
    finish?;
    Ok(outcome)
}

fn march(
    stepper: &Stepper,
    n0: &DirectorField,
    controls: &TimeControls,
    schedule: &SnapshotSchedule,
    observer: &mut dyn RunObserver,
) -> Result<RunOutcome> {
    controls.validate()?;
    stepper.plan.grid().ensure_same(n0.grid())?;
    if !n0.is_finite() {
        return Err(Error::InvalidArgument("initial field is not finite".into()));
    }
    let e0 = Kinematics::of_unchecked(stepper.plan, n0).energy(&stepper.params);
    observer.on_start(controls.t_start, n0, &e0)?;

    let mut pending_times: Vec<f64> = match schedule {
        SnapshotSchedule::Times(ts) => {
            let mut ts = ts.clone();
            ts.sort_by(f64::total_cmp);
            ts.reverse();
            ts
        }
        _ => Vec::new(),
    };
    let mut emit_snapshots = |t: f64, step: usize, n: &DirectorField, observer: &mut dyn RunObserver| {
        match schedule {
            SnapshotSchedule::Never => Ok(()),
            SnapshotSchedule::EveryKSteps(k) => {
                if *k > 0 && step.is_multiple_of(*k) {
                    observer.on_snapshot(t, n)
                } else {
                    Ok(())
                }
            }
            SnapshotSchedule::Times(_) => {
                let mut due = false;
                while pending_times.last().is_some_and(|&ts| ts <= t + 1e-12 * t.abs().max(1.0)) {
                    pending_times.pop();
                    due = true;
                }
                if due {
                    observer.on_snapshot(t, n)
                } else {
                    Ok(())
                }
            }
        }
    };
    emit_snapshots(controls.t_start, 0, n0, observer)?;

    let span = controls.t_end - controls.t_start;
    let end_slack = 1e-12 * span.max(controls.t_end.abs());
    let mut t = controls.t_start;
    let mut n = n0.clone();
    let mut prev: Option<(DirectorField, f64)> = None;
    let mut f_prev = e0.total;
    let mut last: Option<(f64, f64)> = None; // (F before last step, τ of last step)
    let mut step = 0;

    while controls.t_end - t > end_slack {
        let mut tau = match (controls.mode, last) {
            (StepMode::Fixed { tau }, _) => tau,
            (StepMode::Adaptive { tau_max, .. }, None) => tau_max,
            (_, Some((f_before, tau_last))) => adaptive_tau(f_prev, f_before, tau_last, controls),
        };
        if t + tau > controls.t_end - end_slack {
            tau = controls.t_end - t;
        }

        let mut retries = 0;
        let (np1, mut record) = loop {
            let guess = match (&prev, stepper.solver.extrapolate) {
                (Some((nprev, tau_prev)), true) => {
                    Some(lincomb_unchecked(1.0 + tau / tau_prev, &n, -tau / tau_prev, nprev))
                }
                _ => None,
            };
            match stepper.step(&n, t, tau, guess.as_ref()) {
                Ok(ok) => break ok,
                Err(Error::SolverFailure { stats }) => {
                    if retries == MAX_RETRIES {
                        return Err(Error::SolverFailure { stats });
                    }
                    retries += 1;
                    tau *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        step += 1;
        record.step = step;
        record.retries = retries;
        if controls.t_end - record.t <= end_slack {
            record.t = controls.t_end;
        }
        observer.on_step(&record, &np1)?;
        emit_snapshots(record.t, step, &np1, observer)?;

        last = Some((f_prev, tau));
        f_prev = record.energy.total;
        prev = Some((std::mem::replace(&mut n, np1), tau));
        t = record.t;
    }
    Ok(RunOutcome { field: n, t, steps: step })
}
