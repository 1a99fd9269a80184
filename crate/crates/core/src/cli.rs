//! The `rdg` command line.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::discrete_gradient::{energy_difference_residual, DiscreteGradientKind, DEFAULT_GAUSS_POINTS};
use crate::energy::ElasticParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::io::{load_config, write_convergence_csv, FileSink, RunConfig};
use crate::manufactured::{spatial_convergence_study, temporal_convergence_study, ConvergenceReport};
use crate::newton_krylov::SolverConfig;
use crate::presets::random_unit_field;
use crate::spectral::SpectralPlan;
use crate::stepper::{run, Stepper};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Observed temporal orders accepted by `convergence-time`.
pub const TEMPORAL_ORDER_RANGE: (f64, f64) = (1.8, 2.2);

/// Moduli of the manufactured problem used by the convergence studies.
pub const MANUFACTURED_MODULI: [f64; 3] = [2.0, 3.0, 4.0];

#[derive(Parser, Debug)]
#[command(name = "rdg", version, about = "Rotational discrete gradient solver for Oseen-Frank gradient flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a simulation described by a configuration file.
    Run(RunArgs),
    /// Temporal convergence study on the manufactured solution.
    ConvergenceTime(TimeStudyArgs),
    /// Spatial convergence study on the manufactured solution.
    ConvergenceSpace(SpaceStudyArgs),
    /// Check the discrete gradient identity on random field pairs.
    VerifyDg(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    MeanValue,
    Gonzalez,
    OseenFrank,
}

#[derive(Args, Debug, Clone)]
pub struct KindOptions {
    #[arg(long, value_enum, default_value = "oseen-frank")]
    pub kind: KindArg,
    #[arg(long, default_value_t = DEFAULT_GAUSS_POINTS)]
    pub gauss_points: usize,
    /// Gonzalez regularization.
    #[arg(long, default_value_t = 0.0)]
    pub eps0: f64,
}

impl KindOptions {
    pub fn kind(&self) -> DiscreteGradientKind {
        match self.kind {
            KindArg::MeanValue => DiscreteGradientKind::MeanValue {
                gauss_points: self.gauss_points,
            },
            KindArg::Gonzalez => DiscreteGradientKind::Gonzalez { eps0: self.eps0 },
            KindArg::OseenFrank => DiscreteGradientKind::OseenFrank,
        }
    }
}

#[derive(Args, Debug)]
pub struct TimeStudyArgs {
    #[command(flatten)]
    pub kind: KindOptions,
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.005,0.0025")]
    pub taus: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub t_end: f64,
    /// Directory for the report CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpaceStudyArgs {
    #[command(flatten)]
    pub kind: KindOptions,
    #[arg(long, value_delimiter = ',', default_value = "8,12,16,20,24")]
    pub grids: Vec<usize>,
    #[arg(long, default_value_t = 1e-4)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.05)]
    pub t_end: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Points per axis of the periodic cube.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    pub grid: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Elastic moduli `k1,k2,k3`.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "2,3,4")]
    pub k: Vec<f64>,
}

/// Worst identity residual of one discrete gradient over all trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    pub grid: usize,
    pub kind: DiscreteGradientKind,
    pub max_residual: f64,
}

/// Gradients checked by `verify-dg`: Gonzalez without regularization and the
/// mean-value rule with two and four points, plus the Oseen-Frank form.
pub fn verification_kinds() -> [DiscreteGradientKind; 4] {
    [
        DiscreteGradientKind::OseenFrank,
        DiscreteGradientKind::Gonzalez { eps0: 0.0 },
        DiscreteGradientKind::MeanValue { gauss_points: 2 },
        DiscreteGradientKind::MeanValue { gauss_points: 4 },
    ]
}

/// Evaluates `|∫ D·Δn − ΔF| / (1 + |ΔF|)` on `trials` pairs of independent
/// random smooth unit fields on an `n³` periodic cube.
pub fn verify_discrete_gradients(n: usize, trials: usize, seed: u64, p: &ElasticParams) -> Result<Vec<IdentityCheck>> {
    let grid = Grid::periodic_cube(n)?;
    let plan = SpectralPlan::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = verification_kinds();
    let mut worst = [0.0f64; 4];
    for _ in 0..trials {
        let nm = random_unit_field(&grid, 3, 1.0, &mut rng);
        let np1 = random_unit_field(&grid, 3, 1.0, &mut rng);
        for (w, kind) in worst.iter_mut().zip(kinds) {
            *w = w.max(energy_difference_residual(&plan, kind, &nm, &np1, p)?);
        }
    }
    Ok(kinds
        .iter()
        .zip(worst)
        .map(|(&kind, max_residual)| IdentityCheck {
            grid: n,
            kind,
            max_residual,
        })
        .collect())
}

fn kind_label(kind: &DiscreteGradientKind) -> String {
    match kind {
        DiscreteGradientKind::MeanValue { gauss_points } => format!("mean-value(Ng={gauss_points})"),
        DiscreteGradientKind::Gonzalez { eps0 } => format!("gonzalez(eps0={eps0:e})"),
        DiscreteGradientKind::OseenFrank => "oseen-frank".into(),
    }
}

/// One line on stderr: `rdg: error kind=<kind> message="<text>"`.
pub fn error_line(err: &Error) -> String {
    let kind = match err {
        Error::SolverFailure { .. } => "solver",
        Error::Config { .. } => "config",
        Error::Io { .. } => "io",
        Error::Format(_) => "format",
        _ => "validation",
    };
    let message = err.to_string().replace('\\', "\\\\").replace('"', "\\\"").replace('\n', " ");
    format!("rdg: error kind={kind} message=\"{message}\"")
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SolverFailure { .. } => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    }
}

fn moduli_arg(k: &[f64]) -> Result<ElasticParams> {
    match *k {
        [k1, k2, k3] => ElasticParams::new(k1, k2, k3),
        _ => Err(Error::InvalidArgument(format!("--k expects three moduli, got {}", k.len()))),
    }
}

fn manufactured_params() -> Result<ElasticParams> {
    let [k1, k2, k3] = MANUFACTURED_MODULI;
    ElasticParams::new(k1, k2, k3)
}

fn print_report(out: &mut dyn Write, report: &ConvergenceReport) {
    let orders = report.observed_orders();
    writeln!(out, "{:>12} {:>12} {:>12} {:>12} {:>8} {:>8} {:>8} {:>8}", report.parameter_name, "err_n1", "err_n2", "err_n3", "ord_n1", "ord_n2", "ord_n3", "fevals").ok();
    for (i, row) in report.rows.iter().enumerate() {
        let ord = |c: usize| i.checked_sub(1).map_or("-".to_string(), |j| format!("{:.3}", orders[j][c]));
        writeln!(
            out,
            "{:>12} {:>12.4e} {:>12.4e} {:>12.4e} {:>8} {:>8} {:>8} {:>8.2}",
            row.parameter,
            row.errors[0],
            row.errors[1],
            row.errors[2],
            ord(0),
            ord(1),
            ord(2),
            row.mean_fevals
        )
        .ok();
    }
}

fn write_report(dir: &Option<PathBuf>, name: String, report: &ConvergenceReport) -> Result<()> {
    if let Some(dir) = dir {
        crate::io::prepare_output_dir(dir)?;
        write_convergence_csv(&dir.join(name), report)?;
    }
    Ok(())
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let mut config: RunConfig = load_config(&args.config)?;
    if let Some(dir) = &args.out {
        config.output.dir = dir.clone();
    }
    let mut sink = FileSink::create(&config.output.dir, config.output.vtk)?;
    let plan = SpectralPlan::with_dealiasing(config.grid, config.dealias);
    let n0 = config.initial.sample(&config.grid)?;
    let stepper = Stepper::new(&plan, config.params, config.kind, config.solver)?;
    let started = Instant::now();
    let outcome = run(&stepper, &n0, &config.controls, &config.output.schedule, &mut sink)?;
    writeln!(
        out,
        "rdg: run complete steps={} t={} snapshots={} elapsed={:.2}s output={}",
        outcome.steps,
        outcome.t,
        sink.snapshot_count(),
        started.elapsed().as_secs_f64(),
        config.output.dir.display()
    )
    .ok();
    Ok(EXIT_OK)
}

fn cmd_time(args: &TimeStudyArgs, out: &mut dyn Write) -> Result<i32> {
    let kind = args.kind.kind();
    let report = temporal_convergence_study(
        kind,
        &manufactured_params()?,
        args.grid,
        &args.taus,
        args.t_end,
        &SolverConfig::default(),
    )?;
    writeln!(out, "temporal convergence, {} on {}^3 to t={}", kind_label(&kind), args.grid, args.t_end).ok();
    print_report(out, &report);
    write_report(&args.out, format!("convergence_time_{}.csv", kind.name()), &report)?;
    let (lo, hi) = TEMPORAL_ORDER_RANGE;
    let ok = report.observed_orders().iter().flatten().all(|o| (lo..=hi).contains(o));
    writeln!(out, "observed orders within [{lo}, {hi}]: {}", if ok { "yes" } else { "no" }).ok();
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_space(args: &SpaceStudyArgs, out: &mut dyn Write) -> Result<i32> {
    let kind = args.kind.kind();
    let report = spatial_convergence_study(
        kind,
        &manufactured_params()?,
        &args.grids,
        args.tau,
        args.t_end,
        &SolverConfig::default(),
    )?;
    writeln!(out, "spatial convergence, {} with tau={} to t={}", kind_label(&kind), args.tau, args.t_end).ok();
    print_report(out, &report);
    write_report(&args.out, format!("convergence_space_{}.csv", kind.name()), &report)?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    if args.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let p = moduli_arg(&args.k)?;
    let mut ok = true;
    for &n in &args.grid {
        for check in verify_discrete_gradients(n, args.trials, args.seed, &p)? {
            let pass = check.max_residual <= args.tol;
            ok &= pass;
            writeln!(
                out,
                "verify-dg grid={}^3 trials={} kind={} max_residual={:.3e} tol={:e} {}",
                n,
                args.trials,
                kind_label(&check.kind),
                check.max_residual,
                args.tol,
                if pass { "PASS" } else { "FAIL" }
            )
            .ok();
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Runs a parsed command, writing reports to `out`, and returns the exit code.
/// Errors are reported on stderr as a single line.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::ConvergenceTime(a) => cmd_time(a, out),
        Command::ConvergenceSpace(a) => cmd_space(a, out),
        Command::VerifyDg(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", error_line(&err));
            exit_code(&err)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["rdg", "verify-dg", "--grid", "16,24", "--trials", "3"]).unwrap();
        match cli.command {
            Command::VerifyDg(a) => {
                assert_eq!(a.grid, vec![16, 24]);
                assert_eq!(a.trials, 3);
                assert_eq!(a.seed, 42);
                assert_eq!(a.k, vec![2.0, 3.0, 4.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let cli = Cli::try_parse_from(["rdg", "convergence-time", "--kind", "mean-value", "--gauss-points", "2"]).unwrap();
        match cli.command {
            Command::ConvergenceTime(a) => {
                assert_eq!(a.kind.kind(), DiscreteGradientKind::MeanValue { gauss_points: 2 });
                assert_eq!(a.taus, vec![0.01, 0.005, 0.0025]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Cli::try_parse_from(["rdg", "convergence-time", "--kind", "midpoint"]).is_err());
        assert!(Cli::try_parse_from(["rdg", "run"]).is_err());
    }

    #[test]
    fn identities_hold_on_a_small_grid() {
        let p = ElasticParams::new(2.0, 3.0, 4.0).unwrap();
        let checks = verify_discrete_gradients(8, 3, 7, &p).unwrap();
        assert_eq!(checks.len(), 4);
        for c in checks {
            assert!(c.max_residual < 1e-10, "{c:?}");
        }
    }

    #[test]
    fn error_lines_are_single_line() {
        let err = Error::Config {
            key: "params.k1".into(),
            message: "must be \"positive\"\nnow".into(),
        };
        let line = error_line(&err);
        assert!(!line.contains('\n'));
        assert!(line.starts_with("rdg: error kind=config message=\"params.k1: must be \\\"positive\\\" now\""));
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
    }
}
