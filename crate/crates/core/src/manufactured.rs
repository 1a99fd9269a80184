//! Manufactured solution on `[0, 2π]³` and convergence studies against it.
//!
//! `n = (sin a cos b, sin a sin b, cos a)` with
//! `a = sin(x1 + t) cos x2 sin x3`, `b = cos x1 sin(x2 + t) cos x3`. The body
//! force `f = n_t + (n × δF/δn) × n` makes it an exact solution of the forced
//! rotational flow.

use crate::discrete_gradient::DiscreteGradientKind;
use crate::energy::{variational_derivative_unchecked, ElasticParams};
use crate::error::{Error, Result};
use crate::field::{cross_unchecked, DirectorField};
use crate::grid::Grid;
use crate::newton_krylov::SolverConfig;
use crate::spectral::SpectralPlan;
use crate::stepper::{run, RunObserver, SnapshotSchedule, StepRecord, Stepper, TimeControls};

fn angles(x: [f64; 3], t: f64) -> (f64, f64) {
    let a = (x[0] + t).sin() * x[1].cos() * x[2].sin();
    let b = x[0].cos() * (x[1] + t).sin() * x[2].cos();
    (a, b)
}

pub fn exact_solution(x: [f64; 3], t: f64) -> [f64; 3] {
    let (a, b) = angles(x, t);
    [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()]
}

pub fn exact_time_derivative(x: [f64; 3], t: f64) -> [f64; 3] {
    let (a, b) = angles(x, t);
    let at = (x[0] + t).cos() * x[1].cos() * x[2].sin();
    let bt = x[0].cos() * (x[1] + t).cos() * x[2].cos();
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    [
        ca * cb * at - sa * sb * bt,
        ca * sb * at + sa * cb * bt,
        -sa * at,
    ]
}

pub fn exact_field(grid: &Grid, t: f64) -> DirectorField {
    sample(grid, |x| exact_solution(x, t))
}

/// Value, gradient and Hessian of a scalar function of `x`.
#[derive(Clone, Copy)]
struct Jet2 {
    v: f64,
    g: [f64; 3],
    h: [[f64; 3]; 3],
}

impl Jet2 {
    fn var(x: f64, axis: usize) -> Jet2 {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Jet2 { v: x, g, h: [[0.0; 3]; 3] }
    }

    fn mul(self, o: Jet2) -> Jet2 {
        let mut r = Jet2 { v: self.v * o.v, g: [0.0; 3], h: [[0.0; 3]; 3] };
        for i in 0..3 {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                r.h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        r
    }

    /// `f ∘ self` given `f`, `f'`, `f''` at `self.v`.
    fn compose(self, f: f64, f1: f64, f2: f64) -> Jet2 {
        let mut r = Jet2 { v: f, g: [0.0; 3], h: [[0.0; 3]; 3] };
        for i in 0..3 {
            r.g[i] = f1 * self.g[i];
            for j in 0..3 {
                r.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        r
    }

    fn sin(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    fn cos(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }
}

/// Value and gradient.
#[derive(Clone, Copy, Default)]
struct Jet1 {
    v: f64,
    g: [f64; 3],
}

impl Jet1 {
    fn mul(self, o: Jet1) -> Jet1 {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.v * o.g[i] + o.v * self.g[i];
        }
        Jet1 { v: self.v * o.v, g }
    }

    fn sub(self, o: Jet1) -> Jet1 {
        let mut g = self.g;
        for (i, gi) in g.iter_mut().enumerate() {
            *gi -= o.g[i];
        }
        Jet1 { v: self.v - o.v, g }
    }
}

fn cross_jet(a: &[Jet1; 3], b: &[Jet1; 3]) -> [Jet1; 3] {
    [
        a[1].mul(b[2]).sub(a[2].mul(b[1])),
        a[2].mul(b[0]).sub(a[0].mul(b[2])),
        a[0].mul(b[1]).sub(a[1].mul(b[0])),
    ]
}

fn curl_value(u: &[Jet1; 3]) -> [f64; 3] {
    [
        u[2].g[1] - u[1].g[2],
        u[0].g[2] - u[2].g[0],
        u[1].g[0] - u[0].g[1],
    ]
}

/// `δF/δn` of the exact solution at a point, differentiated analytically.
pub fn exact_variational_derivative(x: [f64; 3], t: f64, p: &ElasticParams) -> [f64; 3] {
    let x1 = Jet2::var(x[0], 0);
    let x2 = Jet2::var(x[1], 1);
    let x3 = Jet2::var(x[2], 2);
    let shift = |j: Jet2| Jet2 { v: j.v + t, ..j };
    let a = shift(x1).sin().mul(x2.cos()).mul(x3.sin());
    let b = x1.cos().mul(shift(x2).sin()).mul(x3.cos());
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    let n2 = [sa.mul(cb), sa.mul(sb), ca];

    let n: [Jet1; 3] = n2.map(|j| Jet1 { v: j.v, g: j.g });
    let mut grad_div = [0.0; 3];
    for (j, gd) in grad_div.iter_mut().enumerate() {
        *gd = (0..3).map(|i| n2[i].h[i][j]).sum();
    }
    // ∇×n with its gradient, from the Hessians of n.
    let mut c = [Jet1::default(); 3];
    for (i, ci) in c.iter_mut().enumerate() {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        // (∇×n)_i = ∂_j n_k − ∂_k n_j
        ci.v = n2[k].g[j] - n2[j].g[k];
        for m in 0..3 {
            ci.g[m] = n2[k].h[j][m] - n2[j].h[k][m];
        }
    }
    let beta = (0..3).fold(Jet1::default(), |acc, i| {
        let prod = n[i].mul(c[i]);
        Jet1 {
            v: acc.v + prod.v,
            g: [acc.g[0] + prod.g[0], acc.g[1] + prod.g[1], acc.g[2] + prod.g[2]],
        }
    });
    let omega = cross_jet(&n, &c);

    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] -= p.k1 * grad_div[i];
    }
    let beta_n = n.map(|ni| beta.mul(ni));
    let curl_beta_n = curl_value(&beta_n);
    for i in 0..3 {
        out[i] += p.k2 * (beta.v * c[i].v + curl_beta_n[i]);
    }
    let c_cross_omega = cross_jet(&c, &omega);
    let curl_omega_n = curl_value(&cross_jet(&omega, &n));
    for i in 0..3 {
        out[i] += p.k3 * (c_cross_omega[i].v + curl_omega_n[i]);
    }
    out
}

fn sample(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> DirectorField {
    let len = grid.len();
    let mut data = vec![0.0; 3 * len];
    for (i, x) in grid.points().enumerate() {
        let v = f(x);
        data[i] = v[0];
        data[len + i] = v[1];
        data[2 * len + i] = v[2];
    }
    DirectorField::from_raw(*grid, data)
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `n_t + (n × δF/δn) × n` sampled on the plan's grid, with `δF/δn` of the
/// exact solution evaluated analytically. The forcing then carries no spatial
/// discretization error of its own, so the scheme's spectral accuracy shows in
/// the solution error.
pub fn forcing(plan: &SpectralPlan, t: f64, p: &ElasticParams) -> DirectorField {
    sample(plan.grid(), |x| {
        let n = exact_solution(x, t);
        let mut f = exact_time_derivative(x, t);
        if !p.is_zero() {
            let g = exact_variational_derivative(x, t, p);
            let r = cross3(cross3(n, g), n);
            for c in 0..3 {
                f[c] += r[c];
            }
        }
        f
    })
}

/// As [`forcing`] but with `δF/δn` computed spectrally from the sampled exact
/// solution. The sampled solution then satisfies the semi-discrete equation
/// exactly, which isolates the temporal error.
pub fn forcing_spectral(plan: &SpectralPlan, t: f64, p: &ElasticParams) -> DirectorField {
    let grid = plan.grid();
    let n = exact_field(grid, t);
    let mut f = sample(grid, |x| exact_time_derivative(x, t));
    if !p.is_zero() {
        let g = variational_derivative_unchecked(plan, &n, p);
        f.axpy(1.0, &cross_unchecked(&cross_unchecked(&n, &g), &n)).unwrap();
    }
    f
}

/// One line of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    /// `τ` for temporal studies, `N` for spatial ones.
    pub parameter: f64,
    /// Grid L∞ error per component at `t_end`.
    pub errors: [f64; 3],
    /// Mean residual evaluations per step.
    pub mean_fevals: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub parameter_name: &'static str,
    pub kind: DiscreteGradientKind,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// `log(e_{i−1}/e_i) / log(p_{i−1}/p_i)` per component for consecutive
    /// rows; for a halving `τ` ladder this is `log2(e(2τ)/e(τ))`.
    pub fn observed_orders(&self) -> Vec<[f64; 3]> {
        self.rows
            .windows(2)
            .map(|w| {
                let ratio = (w[0].parameter / w[1].parameter).ln();
                std::array::from_fn(|c| (w[0].errors[c] / w[1].errors[c]).ln() / ratio)
            })
            .collect()
    }

    pub fn max_errors(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.errors.iter().cloned().fold(0.0, f64::max))
            .collect()
    }
}

#[derive(Default)]
struct FevalCounter {
    fevals: usize,
    steps: usize,
}

impl RunObserver for FevalCounter {
    fn on_step(&mut self, record: &StepRecord, _n: &DirectorField) -> Result<()> {
        self.fevals += record.stats.function_evals;
        self.steps += 1;
        Ok(())
    }
}

/// Runs the forced problem from the exact initial state to `t_end` and
/// returns the row for this configuration.
pub fn manufactured_run(
    plan: &SpectralPlan,
    kind: DiscreteGradientKind,
    p: &ElasticParams,
    tau: f64,
    t_end: f64,
    solver: &SolverConfig,
) -> Result<([f64; 3], f64)> {
    let force = |t: f64| forcing(plan, t, p);
    let stepper = Stepper::new(plan, *p, kind, *solver)?.with_forcing(&force);
    let controls = TimeControls::fixed(tau, 0.0, t_end)?;
    let n0 = exact_field(plan.grid(), 0.0);
    let mut counter = FevalCounter::default();
    let out = run(&stepper, &n0, &controls, &SnapshotSchedule::Never, &mut counter)?;
    let exact = exact_field(plan.grid(), out.t);
    let mut errors = [0.0; 3];
    for (c, e) in errors.iter_mut().enumerate() {
        *e = out
            .field
            .component(c)
            .iter()
            .zip(exact.component(c))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    Ok((errors, counter.fevals as f64 / counter.steps.max(1) as f64))
}

fn check_monotone(values: &[f64], decreasing: bool, what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} list is empty")));
    }
    let ok = values.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] });
    if !ok || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "{what} list must be positive and strictly {}",
            if decreasing { "decreasing" } else { "increasing" }
        )));
    }
    Ok(())
}

/// Errors at `t_end` on an `N³` grid for each `τ` in `taus` (decreasing).
pub fn temporal_convergence_study(
    kind: DiscreteGradientKind,
    p: &ElasticParams,
    n: usize,
    taus: &[f64],
    t_end: f64,
    solver: &SolverConfig,
) -> Result<ConvergenceReport> {
    check_monotone(taus, true, "tau")?;
    let plan = SpectralPlan::new(Grid::periodic_cube(n)?);
    let mut rows = Vec::with_capacity(taus.len());
    for &tau in taus {
        let (errors, mean_fevals) = manufactured_run(&plan, kind, p, tau, t_end, solver)?;
        rows.push(ConvergenceRow {
            parameter: tau,
            errors,
            mean_fevals,
        });
    }
    Ok(ConvergenceReport {
        parameter_name: "tau",
        kind,
        rows,
    })
}

/// Errors at `t_end` with fixed `τ` for each grid size in `sizes` (increasing).
pub fn spatial_convergence_study(
    kind: DiscreteGradientKind,
    p: &ElasticParams,
    sizes: &[usize],
    tau: f64,
    t_end: f64,
    solver: &SolverConfig,
) -> Result<ConvergenceReport> {
    let as_f: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    check_monotone(&as_f, false, "grid size")?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let plan = SpectralPlan::new(Grid::periodic_cube(n)?);
        let (errors, mean_fevals) = manufactured_run(&plan, kind, p, tau, t_end, solver)?;
        rows.push(ConvergenceRow {
            parameter: n as f64,
            errors,
            mean_fevals,
        });
    }
    Ok(ConvergenceReport {
        parameter_name: "N",
        kind,
        rows,
    })
}
