//! Jacobian-free inexact Newton–Krylov solver with Armijo backtracking.
//!
//! Jacobian-vector products are forward differences of the residual, the
//! linearized systems are solved by restarted GMRES to a relative tolerance
//! (the forcing term), and each Newton direction is damped by backtracking on
//! the residual norm.

use crate::error::{Error, Result};
use crate::field::{rms, DirectorField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcingTerm {
    /// Constant relative tolerance for every linear solve.
    Fixed(f64),
    /// Eisenstat–Walker choice 2 with `γ = 0.9`, `α = 2`.
    EisenstatWalker,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Absolute tolerance on the RMS residual norm.
    pub abs_tol: f64,
    pub max_newton_iters: usize,
    /// Newton corrections applied even when the starting residual already
    /// meets `abs_tol`, so that slow dynamics below the tolerance are not
    /// frozen. An exactly zero residual skips them.
    pub min_newton_iters: usize,
    pub krylov_restart: usize,
    pub krylov_max_iters: usize,
    pub forcing: ForcingTerm,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub jfnk_eps_scale: f64,
    /// Start each time step from `2 n^m − n^{m−1}` instead of `n^m`.
    pub extrapolate: bool,
    /// Right-precondition GMRES with a constant-coefficient Helmholtz inverse.
    pub precondition: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            abs_tol: 1e-8,
            max_newton_iters: 50,
            min_newton_iters: 1,
            krylov_restart: 30,
            krylov_max_iters: 200,
            forcing: ForcingTerm::Fixed(1e-3),
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 10,
            jfnk_eps_scale: f64::EPSILON.sqrt(),
            extrapolate: false,
            precondition: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if self.min_newton_iters > self.max_newton_iters {
            return bad("min_newton_iters exceeds max_newton_iters");
        }
        if self.krylov_restart == 0 || self.krylov_max_iters == 0 {
            return bad("Krylov restart and iteration limits must be positive");
        }
        if let ForcingTerm::Fixed(eta) = self.forcing {
            if !(eta > 0.0 && eta < 1.0) {
                return bad("forcing_eta must lie in (0, 1)");
            }
        }
        if !(self.jfnk_eps_scale > 0.0 && self.jfnk_eps_scale.is_finite()) {
            return bad("jfnk_eps_scale must be positive");
        }
        Ok(())
    }
}

/// Cost and outcome of one nonlinear solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub newton_iters: usize,
    pub krylov_iters_total: usize,
    /// Residual evaluations, including those inside Jacobian-vector products
    /// and the line search.
    pub function_evals: usize,
    pub initial_residual_norm: f64,
    pub final_residual_norm: f64,
    pub converged: bool,
    /// A non-finite residual stopped the iteration.
    pub diverged: bool,
    /// Line searches that exhausted their backtracks without meeting the
    /// Armijo condition.
    pub line_search_failures: usize,
}

/// Result of [`krylov_solve`].
#[derive(Clone, Debug)]
pub struct KrylovOutcome {
    pub solution: DirectorField,
    pub iterations: usize,
    pub matvecs: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Result of [`armijo_backtrack`].
#[derive(Clone, Debug)]
pub struct LineSearchOutcome {
    pub step_length: f64,
    pub iterate: DirectorField,
    pub residual: DirectorField,
    pub residual_norm: f64,
    /// `false` when no trial met the sufficient-decrease condition.
    pub sufficient_decrease: bool,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Forward-difference Jacobian-vector product
/// `(F(u + ε v) − F(u)) / ε`, `ε = eps_scale (1 + ‖u‖) / ‖v‖` in RMS norms.
pub fn jfnk_matvec<R>(
    residual: &mut R,
    u: &DirectorField,
    r_u: &DirectorField,
    v: &DirectorField,
    eps_scale: f64,
) -> DirectorField
where
    R: FnMut(&DirectorField) -> DirectorField,
{
    let v_norm = v.rms();
    if v_norm == 0.0 {
        return DirectorField::zeros(*v.grid());
    }
    let eps = eps_scale * (1.0 + u.rms()) / v_norm;
    let mut shifted = u.clone();
    shifted.axpy(eps, v).unwrap();
    let mut out = residual(&shifted);
    out.axpy(-1.0, r_u).unwrap();
    out.scaled(1.0 / eps)
}

/// Restarted GMRES from a zero initial guess. Stops when
/// `‖A δ − rhs‖ ≤ rel_tol ‖rhs‖` or after `max_iters` inner iterations, in
/// which case the best iterate is returned with `converged == false`.
pub fn krylov_solve<M>(
    mut matvec: M,
    rhs: &DirectorField,
    rel_tol: f64,
    restart: usize,
    max_iters: usize,
) -> KrylovOutcome
where
    M: FnMut(&DirectorField) -> DirectorField,
{
    let grid = *rhs.grid();
    let b_norm = norm2(rhs.as_slice());
    let mut x = DirectorField::zeros(grid);
    if b_norm == 0.0 {
        return KrylovOutcome {
            solution: x,
            iterations: 0,
            matvecs: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let restart = restart.max(1);
    let target = rel_tol * b_norm;
    let mut r = rhs.clone();
    let mut beta = b_norm;
    let mut iterations = 0;
    let mut matvecs = 0;

    loop {
        let mut basis: Vec<DirectorField> = Vec::with_capacity(restart + 1);
        basis.push(r.scaled(1.0 / beta));
        // Hessenberg columns, already rotated into upper-triangular form.
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut cs: Vec<f64> = Vec::with_capacity(restart);
        let mut sn: Vec<f64> = Vec::with_capacity(restart);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut estimate = beta;
        let mut done = false;

        for j in 0..restart {
            let mut w = matvec(&basis[j]);
            matvecs += 1;
            iterations += 1;
            let mut col = vec![0.0; j + 2];
            // Modified Gram–Schmidt, one reorthogonalization pass.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(w.as_slice(), v.as_slice());
                    col[i] += hij;
                    w.axpy(-hij, v).unwrap();
                }
            }
            let w_norm = norm2(w.as_slice());
            col[j + 1] = w_norm;
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g[j + 1] = -s * g[j];
            g[j] *= c;
            estimate = g[j + 1].abs();
            h.push(col);

            let breakdown = w_norm <= 1e-14 * beta;
            if !breakdown {
                basis.push(w.scaled(1.0 / w_norm));
            }
            if estimate <= target || iterations >= max_iters || breakdown {
                done = true;
                break;
            }
        }

        // Back substitution on the rotated Hessenberg matrix.
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[jj][i] * yj;
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (i, yi) in y.iter().enumerate() {
            x.axpy(*yi, &basis[i]).unwrap();
        }

        if done && (estimate <= target || iterations >= max_iters) {
            return KrylovOutcome {
                solution: x,
                iterations,
                matvecs,
                relative_residual: estimate / b_norm,
                converged: estimate <= target,
            };
        }

        // Restart (or recover from a lucky breakdown) from the true residual.
        let ax = matvec(&x);
        matvecs += 1;
        r = rhs.clone();
        r.axpy(-1.0, &ax).unwrap();
        beta = norm2(r.as_slice());
        if beta <= target || iterations >= max_iters {
            return KrylovOutcome {
                solution: x,
                iterations,
                matvecs,
                relative_residual: beta / b_norm,
                converged: beta <= target,
            };
        }
    }
}

/// Tries `λ = 1, ρ, ρ², …, ρ^max_backtracks` and accepts the first with
/// `‖F(u + λ δ)‖ ≤ (1 − c λ) r_norm`. If none qualifies the last trial is
/// accepted and `sufficient_decrease` is false. Non-finite trials always
/// shrink `λ`.
pub fn armijo_backtrack<R>(
    residual: &mut R,
    u: &DirectorField,
    delta: &DirectorField,
    r_norm: f64,
    cfg: &SolverConfig,
) -> LineSearchOutcome
where
    R: FnMut(&DirectorField) -> DirectorField,
{
    if delta.max_abs() == 0.0 {
        let r = residual(u);
        let n = r.rms();
        return LineSearchOutcome {
            step_length: 1.0,
            iterate: u.clone(),
            residual: r,
            residual_norm: n,
            sufficient_decrease: false,
            evaluations: 1,
        };
    }
    let mut lambda = 1.0;
    let mut evaluations = 0;
    let mut last = None;
    for k in 0..=cfg.max_backtracks {
        let mut trial = u.clone();
        trial.axpy(lambda, delta).unwrap();
        let r = residual(&trial);
        evaluations += 1;
        let n = r.rms();
        if n.is_finite() && n <= (1.0 - cfg.armijo_c * lambda) * r_norm {
            return LineSearchOutcome {
                step_length: lambda,
                iterate: trial,
                residual: r,
                residual_norm: n,
                sufficient_decrease: true,
                evaluations,
            };
        }
        last = Some((trial, r, n, lambda));
        if k < cfg.max_backtracks {
            lambda *= cfg.backtrack_factor;
        }
    }
    let (iterate, residual, residual_norm, step_length) = last.unwrap();
    LineSearchOutcome {
        step_length,
        iterate,
        residual,
        residual_norm,
        sufficient_decrease: false,
        evaluations,
    }
}

/// Solves `F(u) = 0` from `guess`.
///
/// Never fails outright: a non-converged or diverged solve returns the best
/// iterate with the outcome recorded in [`SolveStats`].
pub fn solve<R>(residual: R, guess: DirectorField, cfg: &SolverConfig) -> (DirectorField, SolveStats)
where
    R: FnMut(&DirectorField) -> DirectorField,
{
    solve_preconditioned(residual, guess, cfg, None::<fn(&DirectorField) -> DirectorField>)
}

/// As [`solve`], with an optional right preconditioner `P⁻¹`.
pub fn solve_preconditioned<R, P>(
    residual: R,
    guess: DirectorField,
    cfg: &SolverConfig,
    precond: Option<P>,
) -> (DirectorField, SolveStats)
where
    R: FnMut(&DirectorField) -> DirectorField,
    P: Fn(&DirectorField) -> DirectorField,
{
    solve_with_floor(residual, guess, cfg, precond, 0.0)
}

/// As [`solve_preconditioned`]; the `min_newton_iters` corrections are skipped
/// once the residual norm is at or below `floor`.
pub(crate) fn solve_with_floor<R, P>(
    mut residual: R,
    guess: DirectorField,
    cfg: &SolverConfig,
    precond: Option<P>,
    floor: f64,
) -> (DirectorField, SolveStats)
where
    R: FnMut(&DirectorField) -> DirectorField,
    P: Fn(&DirectorField) -> DirectorField,
{
    let mut stats = SolveStats::default();
    let mut u = guess;
    let mut r = residual(&u);
    stats.function_evals += 1;
    let mut r_norm = r.rms();
    stats.initial_residual_norm = r_norm;
    stats.final_residual_norm = r_norm;
    if !r_norm.is_finite() {
        stats.diverged = true;
        return (u, stats);
    }

    let mut eta = match cfg.forcing {
        ForcingTerm::Fixed(eta) => eta,
        ForcingTerm::EisenstatWalker => 0.5,
    };
    let mut prev_norm = r_norm;

    while (r_norm > cfg.abs_tol || (stats.newton_iters < cfg.min_newton_iters && r_norm > floor))
        && stats.newton_iters < cfg.max_newton_iters
    {
        if stats.newton_iters > 0 {
            if let ForcingTerm::EisenstatWalker = cfg.forcing {
                let gamma = 0.9;
                let mut next = gamma * (r_norm / prev_norm).powi(2);
                let safeguard = gamma * eta * eta;
                if safeguard > 0.1 {
                    next = next.max(safeguard);
                }
                // Do not oversolve the final linear system.
                next = next.max(0.5 * cfg.abs_tol / r_norm);
                eta = next.min(0.9);
            }
        }

        let mut rhs = r.clone();
        rhs.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
        let mut evals = 0;
        let krylov = {
            let u_ref = &u;
            let r_ref = &r;
            let residual_ref = &mut residual;
            let evals_ref = &mut evals;
            let mut jv = |v: &DirectorField| {
                *evals_ref += 1;
                jfnk_matvec(residual_ref, u_ref, r_ref, v, cfg.jfnk_eps_scale)
            };
            match &precond {
                Some(pinv) => {
                    let mut out = krylov_solve(
                        |v: &DirectorField| jv(&pinv(v)),
                        &rhs,
                        eta,
                        cfg.krylov_restart,
                        cfg.krylov_max_iters,
                    );
                    out.solution = pinv(&out.solution);
                    out
                }
                None => krylov_solve(jv, &rhs, eta, cfg.krylov_restart, cfg.krylov_max_iters),
            }
        };
        stats.function_evals += evals;
        stats.krylov_iters_total += krylov.iterations;

        let ls = armijo_backtrack(&mut residual, &u, &krylov.solution, r_norm, cfg);
        stats.function_evals += ls.evaluations;
        stats.newton_iters += 1;
        if !ls.residual_norm.is_finite() {
            stats.diverged = true;
            break;
        }
        if !ls.sufficient_decrease {
            stats.line_search_failures += 1;
        }
        prev_norm = r_norm;
        u = ls.iterate;
        r = ls.residual;
        r_norm = ls.residual_norm;
    }

    stats.final_residual_norm = r_norm;
    stats.converged = !stats.diverged && r_norm <= cfg.abs_tol;
    (u, stats)
}

/// RMS norm of a flat array, exposed for callers that report residuals.
pub fn rms_norm(v: &[f64]) -> f64 {
    rms(v)
}
