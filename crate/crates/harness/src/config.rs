//! JSON experiment configuration. Validation walks the raw JSON value so
//! each problem is reported against its dotted key path.

use gdnls_core::{Execution, Grid, NonlinearityKind, Sigma, SolverParams};
use serde_json::{Map, Value};

use crate::error::{ConfigError, ConfigIssue};
use crate::presets::Preset;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Simulate,
    Converge,
    ThresholdScan,
    NormProbe,
    ChristCompare,
    WeakSigmaRun,
    YosidaTest,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Simulate,
        Command::Converge,
        Command::ThresholdScan,
        Command::NormProbe,
        Command::ChristCompare,
        Command::WeakSigmaRun,
        Command::YosidaTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::ThresholdScan => "threshold-scan",
            Command::NormProbe => "norm-probe",
            Command::ChristCompare => "christ-compare",
            Command::WeakSigmaRun => "weak-sigma-run",
            Command::YosidaTest => "yosida-test",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub observe_every: usize,
    pub kind: NonlinearityKind,
    pub allow_subcritical: bool,
}

impl SolverConfig {
    pub fn params(&self, sigma: Sigma) -> SolverParams {
        SolverParams {
            sigma,
            dt: self.dt,
            t_end: self.t_end,
            kind: self.kind,
            fp_tol: self.fp_tol,
            fp_max_iter: self.fp_max_iter,
            observe_every: self.observe_every,
            allow_subcritical: self.allow_subcritical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Simulate,
    Converge {
        m_list: Vec<f64>,
        m_ref: f64,
    },
    ThresholdScan {
        c: f64,
        amplitudes: Vec<f64>,
    },
    NormProbe {
        p_list: Vec<f64>,
        functions: Vec<Preset>,
        /// The constant `C(M) T` of the displayed Yudovich rate.
        yudovich_ct: f64,
    },
    ChristCompare {
        s_list: Vec<f64>,
    },
    WeakSigmaRun {
        cap_constant: f64,
        tol_drift: f64,
    },
    YosidaTest {
        levels: Vec<f64>,
        pairs: Vec<(f64, f64)>,
        random_fields: usize,
    },
}

impl Experiment {
    pub fn command(&self) -> Command {
        match self {
            Experiment::Simulate => Command::Simulate,
            Experiment::Converge { .. } => Command::Converge,
            Experiment::ThresholdScan { .. } => Command::ThresholdScan,
            Experiment::NormProbe { .. } => Command::NormProbe,
            Experiment::ChristCompare { .. } => Command::ChristCompare,
            Experiment::WeakSigmaRun { .. } => Command::WeakSigmaRun,
            Experiment::YosidaTest { .. } => Command::YosidaTest,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: Grid,
    pub data: Preset,
    pub sigma: Sigma,
    pub solver: SolverConfig,
    /// Abort when mass reaches the outer 5% of the domain.
    pub guard: bool,
    pub seed: u64,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        self.experiment.command()
    }

    pub fn params(&self) -> SolverParams {
        self.solver.params(self.sigma)
    }
}

/// Collects issues while reading one JSON object.
struct Reader<'a> {
    path: String,
    map: Option<&'a Map<String, Value>>,
    issues: &'a mut Vec<ConfigIssue>,
    seen: Vec<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(path: &str, value: Option<&'a Value>, issues: &'a mut Vec<ConfigIssue>) -> Self {
        let map = match value {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                issues.push(issue(path, "must be an object"));
                None
            }
            None => None,
        };
        Self {
            path: path.to_string(),
            map,
            issues,
            seen: Vec::new(),
        }
    }

    fn key(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{}", self.path, name)
        }
    }

    fn raw(&mut self, name: &'static str) -> Option<&'a Value> {
        self.seen.push(name);
        self.map.and_then(|m| m.get(name))
    }

    fn fail(&mut self, name: &str, message: impl Into<String>) {
        let key = self.key(name);
        self.issues.push(ConfigIssue {
            key,
            message: message.into(),
        });
    }

    fn number(&mut self, name: &'static str) -> Option<Option<f64>> {
        match self.raw(name) {
            None => Some(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(Some(x)),
                _ => {
                    self.fail(name, "must be a finite number");
                    None
                }
            },
        }
    }

    fn required_f64(&mut self, name: &'static str) -> Option<f64> {
        match self.number(name)? {
            Some(x) => Some(x),
            None => {
                self.fail(name, "missing required key");
                None
            }
        }
    }

    fn f64_or(&mut self, name: &'static str, default: f64) -> Option<f64> {
        self.number(name).map(|x| x.unwrap_or(default))
    }

    fn count(&mut self, name: &'static str) -> Option<Option<usize>> {
        match self.raw(name) {
            None => Some(None),
            Some(v) => match v.as_u64() {
                Some(x) => Some(Some(x as usize)),
                None => {
                    self.fail(name, "must be a non-negative integer");
                    None
                }
            },
        }
    }

    fn usize_or(&mut self, name: &'static str, default: usize) -> Option<usize> {
        self.count(name).map(|x| x.unwrap_or(default))
    }

    fn bool_opt(&mut self, name: &'static str) -> Option<Option<bool>> {
        match self.raw(name) {
            None => Some(None),
            Some(Value::Bool(b)) => Some(Some(*b)),
            Some(_) => {
                self.fail(name, "must be a boolean");
                None
            }
        }
    }

    fn string_opt(&mut self, name: &'static str) -> Option<Option<&'a str>> {
        match self.raw(name) {
            None => Some(None),
            Some(Value::String(s)) => Some(Some(s.as_str())),
            Some(_) => {
                self.fail(name, "must be a string");
                None
            }
        }
    }

    fn number_list(&mut self, name: &'static str) -> Option<Option<Vec<f64>>> {
        match self.raw(name) {
            None => Some(None),
            Some(Value::Array(items)) => {
                let parsed: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| v.as_f64().filter(|x| x.is_finite()))
                    .collect();
                if parsed.is_none() {
                    self.fail(name, "must be an array of finite numbers");
                }
                parsed.map(Some)
            }
            Some(_) => {
                self.fail(name, "must be an array of finite numbers");
                None
            }
        }
    }

    /// Reports keys that were present but never asked for.
    fn finish(self) {
        if let Some(m) = self.map {
            for k in m.keys() {
                if !self.seen.contains(&k.as_str()) {
                    let key = if self.path.is_empty() {
                        k.clone()
                    } else {
                        format!("{}.{}", self.path, k)
                    };
                    self.issues.push(ConfigIssue {
                        key,
                        message: "unknown key".into(),
                    });
                }
            }
        }
    }
}

fn issue(key: &str, message: &str) -> ConfigIssue {
    ConfigIssue {
        key: key.to_string(),
        message: message.to_string(),
    }
}

fn parse_grid(value: Option<&Value>, issues: &mut Vec<ConfigIssue>) -> Option<Grid> {
    if value.is_none() {
        issues.push(issue("grid", "missing required key"));
        return None;
    }
    let mut r = Reader::new("grid", value, issues);
    let a = r.required_f64("a");
    let b = r.required_f64("b");
    let n = match r.count("n") {
        Some(Some(n)) => Some(n),
        Some(None) => {
            r.fail("n", "missing required key");
            None
        }
        None => None,
    };
    let mut out = None;
    if let (Some(a), Some(b), Some(n)) = (a, b, n) {
        if n < Grid::MIN_NODES {
            r.fail("n", format!("need at least {} interior nodes, got {n}", Grid::MIN_NODES));
        } else if b <= a {
            r.fail("b", format!("must exceed a = {a}, got {b}"));
        } else {
            out = Grid::new(a, b, n).ok();
        }
    }
    r.finish();
    out
}

fn parse_preset(path: &str, value: Option<&Value>, grid: Option<Grid>, issues: &mut Vec<ConfigIssue>) -> Option<Preset> {
    let mut r = Reader::new(path, value, issues);
    let kind = r.string_opt("kind").flatten();
    let preset = match kind {
        Some("sine") => {
            let k = r.usize_or("k", 1);
            let amplitude = r.f64_or("amplitude", 1.0);
            if k == Some(0) {
                r.fail("k", "mode number must be at least 1");
            }
            match (k, amplitude) {
                (Some(k), Some(amplitude)) if k > 0 => Some(Preset::Sine { k, amplitude }),
                _ => None,
            }
        }
        Some("gaussian") => {
            let mid = grid.map_or(0.0, |g| 0.5 * (g.a() + g.b()));
            let x0 = r.f64_or("x0", mid);
            let width = r.f64_or("width", 1.0);
            let amplitude = r.f64_or("amplitude", 1.0);
            let modulation = r.f64_or("modulation", 0.0);
            if matches!(width, Some(w) if w <= 0.0) {
                r.fail("width", "must be positive");
            }
            match (x0, width, amplitude, modulation) {
                (Some(x0), Some(width), Some(amplitude), Some(modulation)) if width > 0.0 => Some(Preset::Gaussian {
                    x0,
                    width,
                    amplitude,
                    modulation,
                }),
                _ => None,
            }
        }
        Some("polybump") => r.f64_or("amplitude", 1.0).map(|amplitude| Preset::Polybump { amplitude }),
        Some(other) => {
            r.fail("kind", format!("unknown preset '{other}' (expected sine, gaussian or polybump)"));
            None
        }
        None => {
            r.fail("kind", "missing required key");
            None
        }
    };
    // keys of the other families are not consumed above
    for extra in ["k", "x0", "width", "modulation", "amplitude"] {
        r.seen.push(extra);
    }
    let known: &[&str] = match kind {
        Some("sine") => &["kind", "k", "amplitude"],
        Some("gaussian") => &["kind", "x0", "width", "amplitude", "modulation"],
        Some("polybump") => &["kind", "amplitude"],
        _ => &["kind", "k", "x0", "width", "amplitude", "modulation"],
    };
    if let Some(m) = r.map {
        let stray: Vec<String> = m.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect();
        for k in stray {
            r.fail(&k, "unknown key for this preset");
        }
    }
    r.finish();
    preset
}

fn parse_solver(value: Option<&Value>, issues: &mut Vec<ConfigIssue>) -> Option<SolverConfig> {
    let mut r = Reader::new("solver", value, issues);
    let dt = r.f64_or("dt", SolverParams::DEFAULT_DT);
    let t_end = r.required_f64("t_end");
    let fp_tol = r.f64_or("fp_tol", SolverParams::DEFAULT_FP_TOL);
    let fp_max_iter = r.usize_or("fp_max_iter", SolverParams::DEFAULT_FP_MAX_ITER);
    let observe_every = r.usize_or("observe_every", SolverParams::DEFAULT_OBSERVE_EVERY);
    let allow_subcritical = r.bool_opt("allow_subcritical").map(|b| b.unwrap_or(false));
    let m = r.number("m");
    let kind = match r.string_opt("kind").map(|k| k.unwrap_or("full")) {
        Some("full") => Some(NonlinearityKind::Full),
        Some("christ") => Some(NonlinearityKind::Christ),
        Some("regularized") => match m {
            Some(Some(m)) if m > 0.0 => Some(NonlinearityKind::Regularized { m }),
            Some(Some(m)) => {
                r.fail("m", format!("regularization level must be positive, got {m}"));
                None
            }
            Some(None) => {
                r.fail("m", "required when kind is regularized");
                None
            }
            None => None,
        },
        Some(other) => {
            r.fail("kind", format!("unknown kind '{other}' (expected full, regularized or christ)"));
            None
        }
        None => None,
    };
    if let Some(dt) = dt {
        if dt <= 0.0 {
            r.fail("dt", "must be positive");
        }
    }
    if let Some(tol) = fp_tol {
        if !(tol > 0.0 && tol <= 1e-6) {
            r.fail("fp_tol", "must lie in (0, 1e-6]");
        }
    }
    if let Some(it) = fp_max_iter {
        if it < 10 {
            r.fail("fp_max_iter", "must be at least 10");
        }
    }
    if observe_every == Some(0) {
        r.fail("observe_every", "must be at least 1");
    }
    if let (Some(dt), Some(t_end), Some(every)) = (dt, t_end, observe_every) {
        if dt > 0.0 && every > 0 {
            let steps = t_end / dt;
            if t_end < dt || (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                r.fail("t_end", format!("must be a positive multiple of dt = {dt}"));
            } else if !(steps.round() as usize).is_multiple_of(every) {
                r.fail(
                    "observe_every",
                    format!("must divide the step count {}", steps.round() as usize),
                );
            }
        }
    }
    r.finish();
    Some(SolverConfig {
        dt: dt?,
        t_end: t_end?,
        fp_tol: fp_tol?,
        fp_max_iter: fp_max_iter?,
        observe_every: observe_every?,
        kind: kind?,
        allow_subcritical: allow_subcritical?,
    })
}

fn positive_list(r: &mut Reader<'_>, name: &'static str, default: Option<Vec<f64>>) -> Option<Vec<f64>> {
    let list = match r.number_list(name)? {
        Some(list) => list,
        None => match default {
            Some(d) => d,
            None => {
                r.fail(name, "missing required key");
                return None;
            }
        },
    };
    if list.is_empty() {
        r.fail(name, "must not be empty");
        return None;
    }
    if list.iter().any(|&x| x <= 0.0) {
        r.fail(name, "entries must be positive");
        return None;
    }
    Some(list)
}

fn parse_experiment(
    command: Command,
    r: &mut Reader<'_>,
    grid: Option<Grid>,
    sigma: Option<f64>,
    solver: Option<&SolverConfig>,
) -> Option<Experiment> {
    match command {
        Command::Simulate => Some(Experiment::Simulate),
        Command::Converge => {
            let m_list = positive_list(r, "m_list", None);
            let m_ref = r.f64_or("m_ref", 1e6);
            let (m_list, m_ref) = (m_list?, m_ref?);
            if m_list.len() < 3 {
                r.fail("m_list", "need at least 3 levels");
                return None;
            }
            let top = m_list.iter().cloned().fold(0.0, f64::max);
            if m_ref < 100.0 * top {
                r.fail("m_ref", format!("must be at least 100 x max(m_list) = {}", 100.0 * top));
                return None;
            }
            Some(Experiment::Converge { m_list, m_ref })
        }
        Command::ThresholdScan => {
            let c = r.f64_or("c", 1.0);
            let amplitudes = r.number_list("amplitudes");
            if let Some(s) = sigma {
                if s < 1.0 {
                    r.fail("sigma", "threshold-scan needs sigma >= 1");
                }
            }
            let c = c?;
            if c <= 0.0 {
                r.fail("c", "must be positive");
                return None;
            }
            let amplitudes = match amplitudes? {
                Some(a) if !a.is_empty() => a,
                _ => {
                    r.fail("amplitudes", "must be a non-empty array");
                    return None;
                }
            };
            if amplitudes.iter().any(|&a| a < 0.0) {
                r.fail("amplitudes", "entries must be non-negative");
                return None;
            }
            Some(Experiment::ThresholdScan { c, amplitudes })
        }
        Command::NormProbe => {
            let p_list = positive_list(r, "p_list", Some(vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]));
            let ct = r.f64_or("yudovich_ct", 1.0);
            let functions = match r.raw("functions") {
                None => grid.map(crate::presets::probe_family),
                Some(Value::Array(items)) if !items.is_empty() => {
                    let parsed: Vec<Option<Preset>> = items
                        .iter()
                        .enumerate()
                        .map(|(i, v)| parse_preset(&format!("functions[{i}]"), Some(v), grid, r.issues))
                        .collect();
                    parsed.into_iter().collect()
                }
                Some(_) => {
                    r.fail("functions", "must be a non-empty array of presets");
                    None
                }
            };
            let p_list = p_list?;
            if p_list.iter().any(|&p| !(2.0..=128.0).contains(&p)) {
                r.fail("p_list", "entries must lie in [2, 128]");
                return None;
            }
            let ct = ct?;
            if ct <= 0.0 {
                r.fail("yudovich_ct", "must be positive");
                return None;
            }
            Some(Experiment::NormProbe {
                p_list,
                functions: functions?,
                yudovich_ct: ct,
            })
        }
        Command::ChristCompare => {
            let s_list = r.number_list("s_list");
            if let Some(s) = sigma {
                if s != 0.5 {
                    r.fail("sigma", "christ-compare runs the gDNLS arm at sigma = 0.5");
                }
            }
            let s_list = s_list?.unwrap_or_else(|| vec![0.5, 1.0]);
            if s_list.is_empty() || s_list.iter().any(|&s| s < 0.0) {
                r.fail("s_list", "must be a non-empty array of non-negative orders");
                return None;
            }
            Some(Experiment::ChristCompare { s_list })
        }
        Command::WeakSigmaRun => {
            let cap_constant = r.f64_or("cap_constant", 1.0);
            let tol_drift = r.f64_or("tol_drift", 1e-4);
            if let Some(s) = sigma {
                if !(s > 0.0 && s < 1.0) {
                    r.fail("sigma", "weak-sigma-run needs 0 < sigma < 1");
                }
            }
            if let Some(sv) = solver {
                if !matches!(sv.kind, NonlinearityKind::Regularized { .. }) {
                    r.fail("solver.kind", "weak-sigma-run needs kind = regularized");
                }
            }
            let (cap_constant, tol_drift) = (cap_constant?, tol_drift?);
            if cap_constant <= 0.0 {
                r.fail("cap_constant", "must be positive");
                return None;
            }
            if tol_drift < 0.0 {
                r.fail("tol_drift", "must be non-negative");
                return None;
            }
            Some(Experiment::WeakSigmaRun {
                cap_constant,
                tol_drift,
            })
        }
        Command::YosidaTest => {
            let levels = positive_list(r, "levels", Some(vec![1.0, 10.0, 100.0, 1e3, 1e4]));
            let pairs = match r.raw("pairs") {
                None => Some(vec![(10.0, 20.0), (50.0, 100.0), (100.0, 400.0)]),
                Some(Value::Array(items)) => {
                    let parsed: Option<Vec<(f64, f64)>> = items
                        .iter()
                        .map(|v| match v.as_array().map(|a| a.as_slice()) {
                            Some([m, n]) => match (m.as_f64(), n.as_f64()) {
                                (Some(m), Some(n)) if m > 0.0 && n > 0.0 => Some((m, n)),
                                _ => None,
                            },
                            _ => None,
                        })
                        .collect();
                    if parsed.is_none() {
                        r.fail("pairs", "must be an array of [m, n] with positive entries");
                    }
                    parsed
                }
                Some(_) => {
                    r.fail("pairs", "must be an array of [m, n] with positive entries");
                    None
                }
            };
            let random_fields = r.usize_or("random_fields", 100);
            Some(Experiment::YosidaTest {
                levels: levels?,
                pairs: pairs?,
                random_fields: random_fields?,
            })
        }
    }
}

fn consume_solver_free(command: Command) -> bool {
    matches!(command, Command::NormProbe | Command::YosidaTest)
}

/// Parse and validate a config. `command` is the CLI command; if the file
/// also names an `experiment` the two must agree.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<ExperimentConfig, ConfigError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError::single("<document>", format!("not valid JSON: {e}")))?;
    let mut issues = Vec::new();
    let root_value = Some(&value);
    let mut r = Reader::new("", root_value, &mut issues);
    if r.map.is_none() {
        return Err(ConfigError { issues: std::mem::take(r.issues) });
    }

    let named = r.string_opt("experiment").flatten();
    let command = match (named.map(|n| (n, Command::from_name(n))), command) {
        (Some((_, Some(c))), Some(cli)) if c != cli => {
            r.fail("experiment", format!("config is for '{}' but command is '{}'", c.name(), cli.name()));
            None
        }
        (Some((_, Some(c))), _) => Some(c),
        (Some((n, None)), _) => {
            r.fail("experiment", format!("unknown experiment name '{n}'"));
            None
        }
        (None, Some(cli)) => Some(cli),
        (None, None) => {
            r.fail("experiment", "missing required key");
            None
        }
    };

    let grid = parse_grid(r.raw("grid"), r.issues);
    let sigma_raw = r.f64_or("sigma", 1.0);
    let sigma = match sigma_raw {
        Some(s) if s > 0.0 => Sigma::new(s).ok(),
        Some(_) => {
            r.fail("sigma", "must be positive");
            None
        }
        None => None,
    };

    let needs_solver = command.is_some_and(|c| !consume_solver_free(c));
    let solver_value = r.raw("solver");
    let solver = if needs_solver || solver_value.is_some() {
        if solver_value.is_none() {
            r.fail("solver", "missing required key");
            None
        } else {
            parse_solver(solver_value, r.issues)
        }
    } else {
        Some(SolverConfig {
            dt: SolverParams::DEFAULT_DT,
            t_end: SolverParams::DEFAULT_DT,
            fp_tol: SolverParams::DEFAULT_FP_TOL,
            fp_max_iter: SolverParams::DEFAULT_FP_MAX_ITER,
            observe_every: 1,
            kind: NonlinearityKind::Full,
            allow_subcritical: false,
        })
    };

    let data_value = r.raw("data");
    let data = match data_value {
        Some(v) => parse_preset("data", Some(v), grid, r.issues),
        None if command.is_some_and(consume_solver_free) => Some(Preset::Sine { k: 1, amplitude: 1.0 }),
        None => {
            r.fail("data", "missing required key");
            None
        }
    };

    let guard = r.bool_opt("guard").map(|g| g.unwrap_or(data.is_some_and(|d| d.models_line())));
    let seed = r.count("seed").map(|s| s.map_or(DEFAULT_SEED, |s| s as u64));
    let execution = match r.string_opt("execution").map(|e| e.unwrap_or("default")) {
        Some("default") => Some(Execution::default()),
        Some("parallel") => Some(Execution::Parallel),
        Some("sequential") => Some(Execution::Sequential),
        Some(other) => {
            r.fail("execution", format!("unknown schedule '{other}' (expected parallel or sequential)"));
            None
        }
        None => None,
    };

    let experiment = command.and_then(|c| parse_experiment(c, &mut r, grid, sigma_raw, solver.as_ref()));

    if let (Some(true), Some(g), Some(d)) = (guard, grid, data) {
        let u = d.field(g);
        let frac = crate::presets::boundary_fraction(&u);
        if frac > crate::presets::GUARD_LIMIT {
            r.fail(
                "data",
                format!("initial outer-5% mass fraction {frac:e} exceeds 1e-10; widen the domain"),
            );
        }
    }

    r.finish();
    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    let solver = solver.expect("validated");
    let sigma = sigma.expect("validated");
    if needs_solver {
        if let Err(e) = solver.params(sigma).validate() {
            return Err(ConfigError::single("solver", e.to_string()));
        }
    }
    Ok(ExperimentConfig {
        experiment: experiment.expect("validated"),
        grid: grid.expect("validated"),
        data: data.expect("validated"),
        sigma,
        solver,
        guard: guard.expect("validated"),
        seed: seed.expect("validated"),
        execution: execution.expect("validated"),
    })
}
