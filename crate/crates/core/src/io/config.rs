//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # 2D relaxation from the utest1 preset
//! grid.n1 = 40
//! grid.n2 = 40
//! params.k1 = 1
//! params.k2 = 1
//! params.k3 = 1
//! time.tau = 1e-3
//! time.t_end = 10
//! ic.preset = utest1
//! ```
//!
//! Blank lines and `#` comments are ignored, values may be quoted, and every
//! key must be known. Parsing either yields a fully validated [`RunConfig`] or
//! an error naming the offending key.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables, DefaultNumericTypes,
    EvalexprError, Function, HashMapContext, Node, Value,
};

use crate::discrete_gradient::{default_eps0, DiscreteGradientKind, DEFAULT_GAUSS_POINTS};
use crate::energy::ElasticParams;
use crate::error::{Error, Result};
use crate::field::DirectorField;
use crate::grid::Grid;
use crate::newton_krylov::{ForcingTerm, SolverConfig};
use crate::presets::Preset;
use crate::stepper::{SnapshotSchedule, StepMode, TimeControls};

/// Largest deviation from unit length accepted in an initial field.
pub const IC_UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum InitialCondition {
    Preset(Preset),
    /// Component expressions in `x1`, `x2`, `x3`.
    Expression([String; 3]),
}

impl InitialCondition {
    /// Samples the initial field and checks that it is finite and of unit
    /// length.
    pub fn sample(&self, grid: &Grid) -> Result<DirectorField> {
        let field = match self {
            InitialCondition::Preset(p) => p.sample(grid),
            InitialCondition::Expression(exprs) => sample_expressions(exprs, grid)?,
        };
        for i in 0..grid.len() {
            let v = field.at(i);
            let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (len - 1.0).abs() > IC_UNIT_TOLERANCE {
                return Err(Error::config(
                    "ic",
                    format!("initial field has length {len} at point {:?}", grid.point(i)),
                ));
            }
        }
        Ok(field)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub schedule: SnapshotSchedule,
    pub vtk: bool,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: Grid,
    pub params: ElasticParams,
    pub kind: DiscreteGradientKind,
    pub controls: TimeControls,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    pub dealias: bool,
    pub output: OutputConfig,
}

const KEYS: &[&str] = &[
    "grid.n1",
    "grid.n2",
    "grid.n3",
    "grid.l1",
    "grid.l2",
    "grid.l3",
    "grid.x0",
    "grid.y0",
    "grid.z0",
    "params.k1",
    "params.k2",
    "params.k3",
    "dg.kind",
    "dg.gauss_points",
    "dg.eps0",
    "time.t_start",
    "time.t_end",
    "time.tau",
    "time.tau_min",
    "time.tau_max",
    "time.alpha",
    "solver.abs_tol",
    "solver.max_newton_iters",
    "solver.min_newton_iters",
    "solver.krylov_restart",
    "solver.krylov_max_iters",
    "solver.forcing",
    "solver.forcing_eta",
    "solver.armijo_c",
    "solver.backtrack_factor",
    "solver.max_backtracks",
    "solver.jfnk_eps_scale",
    "solver.extrapolate",
    "solver.precondition",
    "ic.preset",
    "ic.n1",
    "ic.n2",
    "ic.n3",
    "spectral.dealias",
    "output.dir",
    "output.snapshot_every",
    "output.snapshot_times",
    "output.vtk",
];

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::config(key, format!("expected a finite number, got `{v}`")))
            })
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn required_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::config(key, format!("expected a nonnegative integer, got `{v}`")))
            })
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
            })
            .transpose()
    }
}

fn strip_quotes(v: &str) -> &str {
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = match line.find('#') {
            // A `#` inside quotes is part of the value.
            Some(pos) if line[..pos].matches('"').count() % 2 == 0 => &line[..pos],
            _ => line,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{content}`"))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        let value = strip_quotes(value.trim()).to_string();
        if map.insert(key.to_string(), value).is_some() {
            return Err(Error::config(key, "duplicate key"));
        }
    }
    Ok(Entries(map))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;

    let initial = if let Some(name) = e.raw("ic.preset") {
        if ["ic.n1", "ic.n2", "ic.n3"].iter().any(|k| e.has(k)) {
            return Err(Error::config("ic.preset", "give either a preset or expressions, not both"));
        }
        InitialCondition::Preset(Preset::from_name(name).map_err(|err| Error::config("ic.preset", err.to_string()))?)
    } else {
        let mut exprs: [String; 3] = Default::default();
        for (c, key) in ["ic.n1", "ic.n2", "ic.n3"].iter().enumerate() {
            let src = e.raw(key).ok_or_else(|| Error::config(*key, "missing initial condition expression"))?;
            compile(key, src)?;
            exprs[c] = src.to_string();
        }
        InitialCondition::Expression(exprs)
    };

    // Geometry defaults follow the preset: the 2D tests live on [-1, 1]²,
    // everything else on [0, 2π]³.
    let planar = matches!(initial, InitialCondition::Preset(Preset::Utest1 | Preset::Utest2));
    let (def_len, def_origin) = if planar { ([2.0, 2.0, 1.0], [-1.0, -1.0, 0.0]) } else { ([2.0 * PI; 3], [0.0; 3]) };
    let mut dims = [0usize; 3];
    for (a, key) in ["grid.n1", "grid.n2", "grid.n3"].iter().enumerate() {
        dims[a] = match e.usize(key)? {
            Some(n) => n,
            None if a == 2 => 1,
            None => return Err(Error::config(*key, "missing required key")),
        };
        if dims[a] == 0 {
            return Err(Error::config(*key, "must be at least 1"));
        }
    }
    let mut lengths = def_len;
    let mut origin = def_origin;
    for (a, key) in ["grid.l1", "grid.l2", "grid.l3"].iter().enumerate() {
        lengths[a] = e.f64_or(key, lengths[a])?;
        if lengths[a] <= 0.0 {
            return Err(Error::config(*key, "must be positive"));
        }
    }
    for (a, key) in ["grid.x0", "grid.y0", "grid.z0"].iter().enumerate() {
        origin[a] = e.f64_or(key, origin[a])?;
    }
    let grid = Grid::new(dims, lengths, origin).map_err(|err| Error::config("grid", err.to_string()))?;

    let mut k = [0.0; 3];
    for (i, key) in ["params.k1", "params.k2", "params.k3"].iter().enumerate() {
        k[i] = e.required_f64(key)?;
        if k[i] < 0.0 {
            return Err(Error::config(*key, format!("elastic modulus must be nonnegative, got {}", k[i])));
        }
    }
    let params = ElasticParams::new(k[0], k[1], k[2])?;

    let kind_name = e.raw("dg.kind").unwrap_or("oseen-frank");
    let kind = match kind_name {
        "oseen-frank" => DiscreteGradientKind::OseenFrank,
        "mean-value" => {
            let gauss_points = e.usize("dg.gauss_points")?.unwrap_or(DEFAULT_GAUSS_POINTS);
            if gauss_points == 0 {
                return Err(Error::config("dg.gauss_points", "must be at least 1"));
            }
            DiscreteGradientKind::MeanValue { gauss_points }
        }
        "gonzalez" => {
            let eps0 = e.f64_or("dg.eps0", default_eps0(&grid))?;
            if eps0 < 0.0 {
                return Err(Error::config("dg.eps0", "must be nonnegative"));
            }
            DiscreteGradientKind::Gonzalez { eps0 }
        }
        other => {
            return Err(Error::config(
                "dg.kind",
                format!("expected mean-value, gonzalez or oseen-frank, got `{other}`"),
            ))
        }
    };
    if e.has("dg.gauss_points") && !matches!(kind, DiscreteGradientKind::MeanValue { .. }) {
        return Err(Error::config("dg.gauss_points", "only applies to dg.kind = mean-value"));
    }
    if e.has("dg.eps0") && !matches!(kind, DiscreteGradientKind::Gonzalez { .. }) {
        return Err(Error::config("dg.eps0", "only applies to dg.kind = gonzalez"));
    }

    let t_start = e.f64_or("time.t_start", 0.0)?;
    let t_end = e.required_f64("time.t_end")?;
    if t_end <= t_start {
        return Err(Error::config("time.t_end", "must exceed time.t_start"));
    }
    let adaptive_keys = ["time.tau_min", "time.tau_max", "time.alpha"];
    let mode = match (e.f64("time.tau")?, adaptive_keys.iter().any(|key| e.has(key))) {
        (Some(_), true) => {
            return Err(Error::config("time.tau", "fixed and adaptive step controls are mutually exclusive"))
        }
        (Some(tau), false) => {
            if tau <= 0.0 {
                return Err(Error::config("time.tau", "must be positive"));
            }
            StepMode::Fixed { tau }
        }
        (None, true) => {
            let tau_min = e.required_f64("time.tau_min")?;
            let tau_max = e.required_f64("time.tau_max")?;
            let alpha = e.required_f64("time.alpha")?;
            if tau_min <= 0.0 {
                return Err(Error::config("time.tau_min", "must be positive"));
            }
            if tau_min > tau_max {
                return Err(Error::config("time.tau_min", "must not exceed time.tau_max"));
            }
            if alpha <= 0.0 {
                return Err(Error::config("time.alpha", "must be positive"));
            }
            StepMode::Adaptive {
                tau_min,
                tau_max,
                alpha,
            }
        }
        (None, false) => return Err(Error::config("time.tau", "give time.tau or time.tau_min/tau_max/alpha")),
    };
    let controls = TimeControls { mode, t_start, t_end };

    let solver = parse_solver(&e)?;

    let dealias = e.bool("spectral.dealias")?.unwrap_or(false);

    let schedule = match (e.usize("output.snapshot_every")?, e.raw("output.snapshot_times")) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "output.snapshot_every",
                "snapshot_every and snapshot_times are mutually exclusive",
            ))
        }
        (Some(0), None) => return Err(Error::config("output.snapshot_every", "must be at least 1")),
        (Some(k), None) => SnapshotSchedule::EveryKSteps(k),
        (None, Some(list)) => {
            let times = list
                .split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|t| t.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::config("output.snapshot_times", format!("expected a comma-separated list of times, got `{list}`")))?;
            SnapshotSchedule::Times(times)
        }
        (None, None) => SnapshotSchedule::Never,
    };
    let output = OutputConfig {
        dir: PathBuf::from(e.raw("output.dir").unwrap_or("out")),
        schedule,
        vtk: e.bool("output.vtk")?.unwrap_or(false),
    };

    let config = RunConfig {
        grid,
        params,
        kind,
        controls,
        solver,
        initial,
        dealias,
        output,
    };
    config.initial.sample(&config.grid)?;
    Ok(config)
}

fn parse_solver(e: &Entries) -> Result<SolverConfig> {
    let mut s = SolverConfig::default();
    let positive = |key: &str, v: f64| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::config(key, "must be positive"))
        }
    };
    if let Some(v) = e.f64("solver.abs_tol")? {
        s.abs_tol = positive("solver.abs_tol", v)?;
    }
    if let Some(v) = e.usize("solver.max_newton_iters")? {
        s.max_newton_iters = v;
    }
    if let Some(v) = e.usize("solver.min_newton_iters")? {
        s.min_newton_iters = v;
    }
    if let Some(v) = e.usize("solver.krylov_restart")? {
        if v == 0 {
            return Err(Error::config("solver.krylov_restart", "must be at least 1"));
        }
        s.krylov_restart = v;
    }
    if let Some(v) = e.usize("solver.krylov_max_iters")? {
        if v == 0 {
            return Err(Error::config("solver.krylov_max_iters", "must be at least 1"));
        }
        s.krylov_max_iters = v;
    }
    let eta = e.f64("solver.forcing_eta")?;
    match e.raw("solver.forcing").unwrap_or("fixed") {
        "fixed" => {
            if let Some(eta) = eta {
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::config("solver.forcing_eta", "must lie in (0, 1)"));
                }
                s.forcing = ForcingTerm::Fixed(eta);
            }
        }
        "eisenstat-walker" => {
            if eta.is_some() {
                return Err(Error::config("solver.forcing_eta", "only applies to solver.forcing = fixed"));
            }
            s.forcing = ForcingTerm::EisenstatWalker;
        }
        other => {
            return Err(Error::config(
                "solver.forcing",
                format!("expected fixed or eisenstat-walker, got `{other}`"),
            ))
        }
    }
    if let Some(v) = e.f64("solver.armijo_c")? {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::config("solver.armijo_c", "must lie in (0, 1)"));
        }
        s.armijo_c = v;
    }
    if let Some(v) = e.f64("solver.backtrack_factor")? {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::config("solver.backtrack_factor", "must lie in (0, 1)"));
        }
        s.backtrack_factor = v;
    }
    if let Some(v) = e.usize("solver.max_backtracks")? {
        s.max_backtracks = v;
    }
    if let Some(v) = e.f64("solver.jfnk_eps_scale")? {
        s.jfnk_eps_scale = positive("solver.jfnk_eps_scale", v)?;
    }
    if let Some(v) = e.bool("solver.extrapolate")? {
        s.extrapolate = v;
    }
    if let Some(v) = e.bool("solver.precondition")? {
        s.precondition = v;
    }
    s.validate().map_err(|err| Error::config("solver", err.to_string()))?;
    Ok(s)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
    parse_config(&text)
}

fn unary(f: fn(f64) -> f64) -> Function<DefaultNumericTypes> {
    Function::new(move |arg: &Value| Ok(Value::Float(f(arg.as_number()?))))
}

type UnaryFn = fn(f64) -> f64;

fn expression_context() -> HashMapContext {
    let mut ctx = HashMapContext::new();
    let functions: [(&str, UnaryFn); 8] = [
        ("sin", f64::sin),
        ("cos", f64::cos),
        ("tan", f64::tan),
        ("exp", f64::exp),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
        ("tanh", f64::tanh),
        ("atan", f64::atan),
    ];
    for (name, f) in functions {
        ctx.set_function(name.to_string(), unary(f)).unwrap();
    }
    ctx.set_value("pi".to_string(), Value::Float(PI)).unwrap();
    ctx
}

fn compile(key: &str, src: &str) -> Result<Node> {
    build_operator_tree::<DefaultNumericTypes>(src)
        .map_err(|err: EvalexprError| Error::config(key, format!("cannot parse `{src}`: {err}")))
}

fn sample_expressions(exprs: &[String; 3], grid: &Grid) -> Result<DirectorField> {
    let keys = ["ic.n1", "ic.n2", "ic.n3"];
    let nodes = exprs
        .iter()
        .zip(keys)
        .map(|(src, key)| compile(key, src))
        .collect::<Result<Vec<_>>>()?;
    let mut ctx = expression_context();
    let n = grid.len();
    let mut data = vec![0.0; 3 * n];
    for (i, x) in grid.points().enumerate() {
        for (a, name) in ["x1", "x2", "x3"].iter().enumerate() {
            ctx.set_value(name.to_string(), Value::Float(x[a])).unwrap();
        }
        for (c, node) in nodes.iter().enumerate() {
            let v = node
                .eval_with_context(&ctx)
                .and_then(|v| v.as_number())
                .map_err(|err| Error::config(keys[c], format!("evaluation failed at {x:?}: {err}")))?;
            if !v.is_finite() {
                return Err(Error::config(keys[c], format!("non-finite value at {x:?}")));
            }
            data[c * n + i] = v;
        }
    }
    DirectorField::from_flat(*grid, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# utest1 relaxation
grid.n1 = 40
grid.n2 = 40
params.k1 = 1
params.k2 = 1
params.k3 = 1
time.tau = 1e-3
time.t_end = 10
ic.preset = \"utest1\"
";

    fn with(extra: &str) -> String {
        format!("{MINIMAL}{extra}\n")
    }

    fn key_of(err: Error) -> String {
        match err {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.dims(), [40, 40, 1]);
        assert_eq!(c.grid.lengths(), [2.0, 2.0, 1.0]);
        assert_eq!(c.grid.origin(), [-1.0, -1.0, 0.0]);
        assert_eq!(c.kind, DiscreteGradientKind::OseenFrank);
        assert_eq!(c.controls.mode, StepMode::Fixed { tau: 1e-3 });
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.output.schedule, SnapshotSchedule::Never);
        assert!(!c.dealias);
    }

    #[test]
    fn adaptive_controls() {
        let text = MINIMAL.replace("time.tau = 1e-3\n", "time.tau_min = 1e-5\ntime.tau_max = 2e-3\ntime.alpha = 1e-3\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(
            c.controls.mode,
            StepMode::Adaptive {
                tau_min: 1e-5,
                tau_max: 2e-3,
                alpha: 1e-3
            }
        );
        assert_eq!(key_of(parse_config(&with("time.alpha = 1e-3")).unwrap_err()), "time.tau");
        let swapped = text.replace("tau_min = 1e-5", "tau_min = 1e-2");
        assert_eq!(key_of(parse_config(&swapped).unwrap_err()), "time.tau_min");
    }

    #[test]
    fn errors_name_the_key() {
        let neg = MINIMAL.replace("params.k1 = 1", "params.k1 = -1");
        assert_eq!(key_of(parse_config(&neg).unwrap_err()), "params.k1");
        assert_eq!(key_of(parse_config(&with("params.k4 = 1")).unwrap_err()), "params.k4");
        assert_eq!(key_of(parse_config(&MINIMAL.replace("time.t_end = 10\n", "")).unwrap_err()), "time.t_end");
        assert_eq!(key_of(parse_config(&with("grid.n1 = 8")).unwrap_err()), "grid.n1");
        assert_eq!(key_of(parse_config(&with("dg.kind = midpoint")).unwrap_err()), "dg.kind");
        assert_eq!(key_of(parse_config(&with("solver.abs_tol = abc")).unwrap_err()), "solver.abs_tol");
        assert_eq!(key_of(parse_config(&with("dg.eps0 = 1e-12")).unwrap_err()), "dg.eps0");
        assert_eq!(key_of(parse_config(&with("just some words")).unwrap_err()), "line 10");
        let bad_preset = MINIMAL.replace("\"utest1\"", "utest9");
        assert_eq!(key_of(parse_config(&bad_preset).unwrap_err()), "ic.preset");
    }

    #[test]
    fn kinds_and_solver_options() {
        let c = parse_config(&with("dg.kind = mean-value\ndg.gauss_points = 2")).unwrap();
        assert_eq!(c.kind, DiscreteGradientKind::MeanValue { gauss_points: 2 });
        let c = parse_config(&with("dg.kind = gonzalez")).unwrap();
        assert_eq!(c.kind, DiscreteGradientKind::Gonzalez { eps0: 4e-14 });
        let c = parse_config(&with(
            "solver.forcing = eisenstat-walker\nsolver.precondition = true\nsolver.abs_tol = 1e-10 # tighter",
        ))
        .unwrap();
        assert_eq!(c.solver.forcing, ForcingTerm::EisenstatWalker);
        assert!(c.solver.precondition);
        assert_eq!(c.solver.abs_tol, 1e-10);
    }

    #[test]
    fn snapshot_schedules() {
        let c = parse_config(&with("output.snapshot_times = 0.1, 1.5,3.5\noutput.vtk = true")).unwrap();
        assert_eq!(c.output.schedule, SnapshotSchedule::Times(vec![0.1, 1.5, 3.5]));
        assert!(c.output.vtk);
        let err = parse_config(&with("output.snapshot_times = 1\noutput.snapshot_every = 5")).unwrap_err();
        assert_eq!(key_of(err), "output.snapshot_every");
    }

    #[test]
    fn expression_initial_conditions() {
        let text = "\
grid.n1 = 8
grid.n2 = 8
grid.n3 = 8
params.k1 = 1
params.k2 = 1
params.k3 = 1
time.tau = 0.01
time.t_end = 0.1
ic.n1 = cos(x3)
ic.n2 = sin(x3)
ic.n3 = 0
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.grid.lengths(), [2.0 * PI; 3]);
        let f = c.initial.sample(&c.grid).unwrap();
        let x = c.grid.point(100);
        assert!((f.at(100)[0] - x[2].cos()).abs() < 1e-15);

        let not_unit = text.replace("ic.n3 = 0", "ic.n3 = 0.5");
        assert_eq!(key_of(parse_config(&not_unit).unwrap_err()), "ic");
        let broken = text.replace("cos(x3)", "cos(x3");
        assert_eq!(key_of(parse_config(&broken).unwrap_err()), "ic.n1");
        let missing = text.replace("ic.n3 = 0\n", "");
        assert_eq!(key_of(parse_config(&missing).unwrap_err()), "ic.n3");
        let pi_expr = text.replace("cos(x3)", "cos(x3 + 2 * pi)");
        assert!(parse_config(&pi_expr).is_ok());
    }
}
