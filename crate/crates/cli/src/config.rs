//! Scenario configuration: a structured-text (TOML) document describing the
//! equation, grid, initial data, coefficients, solver parameters and the
//! requested diagnostics.
//!
//! Parsing is strict and total: every invariant is checked before any
//! compute starts, unknown keys are errors (not warnings), and all errors
//! are collected with their document paths rather than stopping at the
//! first.

use std::collections::BTreeSet;
use std::fmt;

use fhjlab_core::evolve::{ClosedFormHamiltonian, Control, DriftField, IsaacsFamily, SolverConfig};
use fhjlab_core::nonlocal::normalization_constant;
use fhjlab_core::synth;
use fhjlab_core::{
    EllipticityBounds, FieldData, FractionalOrder, Grid, KernelSpec, ScalarField,
};
use toml::value::Table;
use toml::Value;

/// One configuration error with a path into the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Hj,
    Isaacs,
    AdvectionDiffusion,
    Burgers,
}

impl EquationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquationKind::Hj => "hj",
            EquationKind::Isaacs => "isaacs",
            EquationKind::AdvectionDiffusion => "advection-diffusion",
            EquationKind::Burgers => "burgers",
        }
    }
}

/// Closed-form initial data, or a field file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// amplitude * cos(mode x) or amplitude * sin(mode x)
    Cos { amplitude: f64, mode: f64 },
    Sin { amplitude: f64, mode: f64 },
    /// amplitude * |sin x|
    AbsSin { amplitude: f64 },
    SquareWave { amplitude: f64 },
    Constant { value: f64 },
    /// seeded smooth random field with ||u0||_inf = amplitude
    RandomFourier { amplitude: f64, max_mode: usize },
    /// torus-distance power profile |x - center|^alpha
    Power { alpha: f64 },
    File { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    Zero,
    Constant { c: f64 },
    Affine { b: [f64; 2], c: f64 },
    HalfSquare { p_max: f64 },
    Norm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriftSpec {
    Zero,
    Constant { w: [f64; 2], bound: f64 },
    Random { bound: f64 },
}

/// One Isaacs control in the config: kernel is always the pure fractional
/// Laplacian or a constant admissible kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSpec {
    pub c: f64,
    pub b: [f64; 2],
    /// "fraclap" (spectral, s = 1/2) or "constant" with `kernel_value`.
    pub kernel: String,
    pub kernel_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub equation: EquationKind,
    pub seed: u64,
    pub grid_dim: usize,
    pub grid_n_points: usize,
    pub grid_period: f64,
    pub initial: InitialSpec,
    pub hamiltonian: HamiltonianSpec,
    pub drift: DriftSpec,
    pub isaacs: Vec<Vec<ControlSpec>>,
    pub s: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    pub a_bound: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub diagnostics: Vec<String>,
}

const KNOWN_DIAGNOSTICS: &[&str] = &["decay", "lipschitz", "cascade", "shock"];

struct Walker {
    errors: Vec<ConfigError>,
}

impl Walker {
    fn err(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn check_keys(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for key in table.keys() {
            if !allowed.contains(key.as_str()) {
                let joined = allowed.iter().copied().collect::<Vec<_>>().join(", ");
                let p = if path.is_empty() {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                };
                self.err(&p, format!("unknown key (allowed: {joined})"));
            }
        }
    }

    fn f64_at(&mut self, table: &Table, path: &str, key: &str, default: f64) -> f64 {
        match table.get(key) {
            None => default,
            Some(Value::Float(v)) => *v,
            Some(Value::Integer(v)) => *v as f64,
            Some(_) => {
                self.err(&format!("{path}{key}"), "expected a number");
                default
            }
        }
    }

    fn usize_at(&mut self, table: &Table, path: &str, key: &str, default: usize) -> usize {
        match table.get(key) {
            None => default,
            Some(Value::Integer(v)) if *v >= 0 => *v as usize,
            Some(_) => {
                self.err(&format!("{path}{key}"), "expected a nonnegative integer");
                default
            }
        }
    }

    fn str_at(&mut self, table: &Table, path: &str, key: &str, default: &str) -> String {
        match table.get(key) {
            None => default.to_string(),
            Some(Value::String(v)) => v.clone(),
            Some(_) => {
                self.err(&format!("{path}{key}"), "expected a string");
                default.to_string()
            }
        }
    }

    fn vec2_at(&mut self, table: &Table, path: &str, key: &str, default: [f64; 2]) -> [f64; 2] {
        match table.get(key) {
            None => default,
            Some(Value::Array(a)) if a.len() <= 2 => {
                let mut out = [0.0f64; 2];
                for (i, v) in a.iter().enumerate() {
                    match v {
                        Value::Float(f) => out[i] = *f,
                        Value::Integer(n) => out[i] = *n as f64,
                        _ => self.err(
                            &format!("{path}{key}[{i}]"),
                            "expected a number",
                        ),
                    }
                }
                out
            }
            Some(_) => {
                self.err(
                    &format!("{path}{key}"),
                    "expected an array of at most 2 numbers",
                );
                default
            }
        }
    }
}

/// Parse and fully validate a scenario document, returning either the config
/// with documented defaults filled, or every error found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let root: Value = match text.parse() {
        Ok(v) => v,
        Err(e) => {
            return Err(vec![ConfigError {
                path: "<document>".into(),
                message: format!("not valid TOML: {e}"),
            }])
        }
    };
    let Some(root) = root.as_table() else {
        return Err(vec![ConfigError {
            path: "<document>".into(),
            message: "top level must be a table".into(),
        }]);
    };

    let mut w = Walker { errors: Vec::new() };
    w.check_keys(
        root,
        "",
        &[
            "equation",
            "seed",
            "grid",
            "initial",
            "hamiltonian",
            "drift",
            "isaacs",
            "solver",
            "diagnostics",
        ],
    );

    // equation -------------------------------------------------------------
    let eq_str = w.str_at(root, "", "equation", "");
    let equation = match eq_str.as_str() {
        "hj" => EquationKind::Hj,
        "isaacs" => EquationKind::Isaacs,
        "advection-diffusion" => EquationKind::AdvectionDiffusion,
        "burgers" => EquationKind::Burgers,
        "" => {
            w.err("equation", "required; one of hj, isaacs, advection-diffusion, burgers");
            EquationKind::Hj
        }
        other => {
            w.err(
                "equation",
                format!("unknown equation '{other}'; expected hj, isaacs, advection-diffusion or burgers"),
            );
            EquationKind::Hj
        }
    };

    let seed = w.usize_at(root, "", "seed", 0) as u64;

    // grid -----------------------------------------------------------------
    let empty = Table::new();
    let grid_tbl = match root.get("grid") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            w.err("grid", "expected a table");
            &empty
        }
        None => {
            w.err("grid", "required table with n_points (dim and period optional)");
            &empty
        }
    };
    w.check_keys(grid_tbl, "grid", &["dim", "n_points", "period"]);
    let grid_dim = w.usize_at(grid_tbl, "grid.", "dim", 1);
    let grid_n_points = w.usize_at(grid_tbl, "grid.", "n_points", 0);
    let grid_period = w.f64_at(grid_tbl, "grid.", "period", 2.0 * std::f64::consts::PI);
    if grid_dim != 1 && grid_dim != 2 {
        w.err("grid.dim", format!("must be 1 or 2, got {grid_dim}"));
    }
    if grid_n_points < 8 || !grid_n_points.is_power_of_two() {
        w.err(
            "grid.n_points",
            format!("must be a power of two >= 8, got {grid_n_points}"),
        );
    }
    if !(grid_period > 0.0) {
        w.err("grid.period", format!("must be > 0, got {grid_period}"));
    }

    // initial --------------------------------------------------------------
    let init_tbl = match root.get("initial") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            w.err("initial", "expected a table");
            &empty
        }
        None => &empty,
    };
    w.check_keys(
        init_tbl,
        "initial",
        &["kind", "amplitude", "mode", "max_mode", "alpha", "path", "value"],
    );
    let kind = w.str_at(init_tbl, "initial.", "kind", "cos");
    let amplitude = w.f64_at(init_tbl, "initial.", "amplitude", 1.0);
    let mode = w.f64_at(init_tbl, "initial.", "mode", 1.0);
    let initial = match kind.as_str() {
        "cos" => InitialSpec::Cos { amplitude, mode },
        "sin" => InitialSpec::Sin { amplitude, mode },
        "abs-sin" => InitialSpec::AbsSin { amplitude },
        "square-wave" => InitialSpec::SquareWave { amplitude },
        "constant" => InitialSpec::Constant {
            value: w.f64_at(init_tbl, "initial.", "value", 0.0),
        },
        "random-fourier" => InitialSpec::RandomFourier {
            amplitude,
            max_mode: w.usize_at(init_tbl, "initial.", "max_mode", 8),
        },
        "power" => {
            let alpha = w.f64_at(init_tbl, "initial.", "alpha", 0.5);
            if !(alpha > 0.0 && alpha <= 1.0) {
                w.err("initial.alpha", format!("must lie in (0,1], got {alpha}"));
            }
            InitialSpec::Power { alpha }
        }
        "file" => {
            let path = w.str_at(init_tbl, "initial.", "path", "");
            if path.is_empty() {
                w.err("initial.path", "required when initial.kind = \"file\"");
            }
            InitialSpec::File { path }
        }
        other => {
            w.err(
                "initial.kind",
                format!("unknown kind '{other}'; expected cos, sin, abs-sin, square-wave, constant, random-fourier, power or file"),
            );
            InitialSpec::Cos { amplitude, mode }
        }
    };

    // hamiltonian ----------------------------------------------------------
    let ham_tbl = match root.get("hamiltonian") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            w.err("hamiltonian", "expected a table");
            &empty
        }
        None => &empty,
    };
    w.check_keys(ham_tbl, "hamiltonian", &["kind", "c", "b", "p_max"]);
    let hkind = w.str_at(ham_tbl, "hamiltonian.", "kind", "zero");
    let hamiltonian = match hkind.as_str() {
        "zero" => HamiltonianSpec::Zero,
        "constant" => HamiltonianSpec::Constant {
            c: w.f64_at(ham_tbl, "hamiltonian.", "c", 0.0),
        },
        "affine" => HamiltonianSpec::Affine {
            b: w.vec2_at(ham_tbl, "hamiltonian.", "b", [0.0, 0.0]),
            c: w.f64_at(ham_tbl, "hamiltonian.", "c", 0.0),
        },
        "half-square" => {
            let p_max = w.f64_at(ham_tbl, "hamiltonian.", "p_max", 8.0);
            if !(p_max > 0.0) {
                w.err("hamiltonian.p_max", format!("must be > 0, got {p_max}"));
            }
            HamiltonianSpec::HalfSquare { p_max }
        }
        "norm" => HamiltonianSpec::Norm,
        other => {
            w.err(
                "hamiltonian.kind",
                format!("unknown kind '{other}'; expected zero, constant, affine, half-square or norm"),
            );
            HamiltonianSpec::Zero
        }
    };
    if equation != EquationKind::Hj && root.contains_key("hamiltonian") {
        w.err(
            "hamiltonian",
            format!("only valid for equation = \"hj\" (got \"{}\")", equation.as_str()),
        );
    }

    // drift ----------------------------------------------------------------
    let drift_tbl = match root.get("drift") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            w.err("drift", "expected a table");
            &empty
        }
        None => &empty,
    };
    w.check_keys(drift_tbl, "drift", &["kind", "w", "bound"]);
    let dkind = w.str_at(drift_tbl, "drift.", "kind", "zero");
    let dbound = w.f64_at(drift_tbl, "drift.", "bound", 1.0);
    if !(dbound >= 0.0) {
        w.err("drift.bound", format!("must be >= 0, got {dbound}"));
    }
    let drift = match dkind.as_str() {
        "zero" => DriftSpec::Zero,
        "constant" => DriftSpec::Constant {
            w: w.vec2_at(drift_tbl, "drift.", "w", [0.0, 0.0]),
            bound: dbound,
        },
        "random" => DriftSpec::Random { bound: dbound },
        other => {
            w.err(
                "drift.kind",
                format!("unknown kind '{other}'; expected zero, constant or random"),
            );
            DriftSpec::Zero
        }
    };
    if equation != EquationKind::AdvectionDiffusion && root.contains_key("drift") {
        w.err(
            "drift",
            format!(
                "only valid for equation = \"advection-diffusion\" (got \"{}\")",
                equation.as_str()
            ),
        );
    }

    // isaacs ---------------------------------------------------------------
    let mut isaacs: Vec<Vec<ControlSpec>> = Vec::new();
    match root.get("isaacs") {
        None => {}
        Some(Value::Array(rows)) => {
            for (ri, row) in rows.iter().enumerate() {
                let mut out_row = Vec::new();
                match row {
                    Value::Array(ctls) => {
                        for (ci, ctl) in ctls.iter().enumerate() {
                            let path = format!("isaacs[{ri}][{ci}]");
                            match ctl {
                                Value::Table(t) => {
                                    w.check_keys(t, &path, &["c", "b", "kernel", "kernel_value"]);
                                    let prefix = format!("{path}.");
                                    let kernel = w.str_at(t, &prefix, "kernel", "fraclap");
                                    if kernel != "fraclap" && kernel != "constant" {
                                        w.err(
                                            &format!("{path}.kernel"),
                                            format!("unknown kernel '{kernel}'; expected fraclap or constant"),
                                        );
                                    }
                                    let kernel_value = t
                                        .contains_key("kernel_value")
                                        .then(|| w.f64_at(t, &prefix, "kernel_value", 0.0));
                                    out_row.push(ControlSpec {
                                        c: w.f64_at(t, &prefix, "c", 0.0),
                                        b: w.vec2_at(t, &prefix, "b", [0.0, 0.0]),
                                        kernel,
                                        kernel_value,
                                    });
                                }
                                _ => w.err(&path, "expected a control table"),
                            }
                        }
                    }
                    _ => w.err(&format!("isaacs[{ri}]"), "expected an array of controls"),
                }
                isaacs.push(out_row);
            }
        }
        Some(_) => w.err("isaacs", "expected an array of control rows"),
    }
    if equation == EquationKind::Isaacs && isaacs.is_empty() {
        w.err("isaacs", "required (nonempty control rows) for equation = \"isaacs\"");
    }
    if equation != EquationKind::Isaacs && root.contains_key("isaacs") {
        w.err(
            "isaacs",
            format!("only valid for equation = \"isaacs\" (got \"{}\")", equation.as_str()),
        );
    }

    // solver ---------------------------------------------------------------
    let solver_tbl = match root.get("solver") {
        Some(Value::Table(t)) => t,
        Some(_) => {
            w.err("solver", "expected a table");
            &empty
        }
        None => &empty,
    };
    w.check_keys(
        solver_tbl,
        "solver",
        &["s", "cfl", "t_end", "output_stride", "lambda", "big_lambda", "a_bound"],
    );
    let s = w.f64_at(solver_tbl, "solver.", "s", 0.5);
    if !(s > 0.0 && s < 1.0) {
        w.err("solver.s", format!("must lie in the open interval (0,1), got {s}"));
    }
    let lambda = w.f64_at(solver_tbl, "solver.", "lambda", 1.0);
    let big_lambda = w.f64_at(solver_tbl, "solver.", "big_lambda", 1.0);
    if !(lambda > 0.0) {
        w.err("solver.lambda", format!("must be > 0, got {lambda}"));
    }
    if lambda > big_lambda {
        w.err(
            "solver.lambda",
            format!("lambda = {lambda} exceeds big_lambda = {big_lambda}; need lambda <= big_lambda"),
        );
        w.err(
            "solver.big_lambda",
            format!("big_lambda = {big_lambda} is below lambda = {lambda}"),
        );
    }
    let a_bound = w.f64_at(solver_tbl, "solver.", "a_bound", 1.0);
    if !(a_bound >= 0.0) {
        w.err("solver.a_bound", format!("must be >= 0, got {a_bound}"));
    }
    let cfl = w.f64_at(solver_tbl, "solver.", "cfl", 0.8);
    if !(cfl > 0.0 && cfl <= 1.0) {
        w.err("solver.cfl", format!("must lie in (0,1], got {cfl}"));
    }
    let t_end = w.f64_at(solver_tbl, "solver.", "t_end", 1.0);
    if !(t_end >= 0.0) {
        w.err("solver.t_end", format!("must be >= 0, got {t_end}"));
    }
    let output_stride = w.usize_at(solver_tbl, "solver.", "output_stride", 8);
    if output_stride == 0 {
        w.err("solver.output_stride", "must be >= 1");
    }

    // diagnostics ----------------------------------------------------------
    let mut diagnostics = vec!["decay".to_string()];
    match root.get("diagnostics") {
        None => {}
        Some(Value::Table(t)) => {
            w.check_keys(t, "diagnostics", &["requested"]);
            if let Some(req) = t.get("requested") {
                match req {
                    Value::Array(items) => {
                        diagnostics.clear();
                        for (i, item) in items.iter().enumerate() {
                            match item {
                                Value::String(name) => {
                                    if KNOWN_DIAGNOSTICS.contains(&name.as_str()) {
                                        diagnostics.push(name.clone());
                                    } else {
                                        w.err(
                                            &format!("diagnostics.requested[{i}]"),
                                            format!(
                                                "unknown diagnostic '{name}'; expected one of {}",
                                                KNOWN_DIAGNOSTICS.join(", ")
                                            ),
                                        );
                                    }
                                }
                                _ => w.err(
                                    &format!("diagnostics.requested[{i}]"),
                                    "expected a string",
                                ),
                            }
                        }
                    }
                    _ => w.err("diagnostics.requested", "expected an array of strings"),
                }
            }
        }
        Some(_) => w.err("diagnostics", "expected a table"),
    }
    if diagnostics.contains(&"shock".to_string()) && equation != EquationKind::Burgers {
        w.err(
            "diagnostics.requested",
            "the shock diagnostic requires equation = \"burgers\"",
        );
    }

    if w.errors.is_empty() {
        Ok(ScenarioConfig {
            equation,
            seed,
            grid_dim,
            grid_n_points,
            grid_period,
            initial,
            hamiltonian,
            drift,
            isaacs,
            s,
            lambda,
            big_lambda,
            a_bound,
            cfl,
            t_end,
            output_stride,
            diagnostics,
        })
    } else {
        Err(w.errors)
    }
}

// ---------------------------------------------------------------------------
// Materialization: turn a validated config into core objects
// ---------------------------------------------------------------------------

impl ScenarioConfig {
    pub fn grid(&self) -> fhjlab_core::Result<Grid> {
        Grid::new(self.grid_dim, self.grid_n_points, self.grid_period)
    }

    pub fn fractional_order(&self) -> fhjlab_core::Result<FractionalOrder> {
        FractionalOrder::new(self.s)
    }

    pub fn solver_config(&self) -> fhjlab_core::Result<SolverConfig> {
        SolverConfig::new(
            self.cfl,
            self.t_end,
            self.output_stride,
            self.fractional_order()?,
        )
    }

    pub fn initial_field(&self, grid: Grid) -> fhjlab_core::Result<ScalarField> {
        match &self.initial {
            InitialSpec::Cos { amplitude, mode } => {
                let (a, m) = (*amplitude, *mode);
                ScalarField::sample(grid, move |p| a * (m * p[0]).cos())
            }
            InitialSpec::Sin { amplitude, mode } => {
                let (a, m) = (*amplitude, *mode);
                ScalarField::sample(grid, move |p| a * (m * p[0]).sin())
            }
            InitialSpec::AbsSin { amplitude } => {
                let a = *amplitude;
                ScalarField::sample(grid, move |p| a * p[0].sin().abs())
            }
            InitialSpec::SquareWave { amplitude } => Ok(synth::square_wave(grid, *amplitude)),
            InitialSpec::Constant { value } => Ok(ScalarField::constant(grid, *value)),
            InitialSpec::RandomFourier { amplitude, max_mode } => {
                synth::random_fourier_field(grid, self.seed, *max_mode, *amplitude)
            }
            InitialSpec::Power { alpha } => Ok(synth::power_profile(grid, [0.0, 0.0], *alpha)),
            InitialSpec::File { path } => match fhjlab_core::read_field(path)? {
                FieldData::Scalar(f) => Ok(f),
                FieldData::SpaceTime(f) => Ok(f.frames().last().unwrap().clone()),
            },
        }
    }

    pub fn closed_form_hamiltonian(&self) -> fhjlab_core::Result<ClosedFormHamiltonian> {
        Ok(match &self.hamiltonian {
            HamiltonianSpec::Zero => ClosedFormHamiltonian::constant(0.0),
            HamiltonianSpec::Constant { c } => ClosedFormHamiltonian::constant(*c),
            HamiltonianSpec::Affine { b, c } => ClosedFormHamiltonian::affine(*b, *c),
            HamiltonianSpec::HalfSquare { p_max } => ClosedFormHamiltonian::half_square(*p_max)?,
            HamiltonianSpec::Norm => ClosedFormHamiltonian::norm(),
        })
    }

    pub fn drift_field(&self, grid: Grid) -> fhjlab_core::Result<DriftField> {
        match &self.drift {
            DriftSpec::Zero => DriftField::constant(grid, [0.0, 0.0], 0.0),
            DriftSpec::Constant { w, bound } => DriftField::constant(grid, *w, *bound),
            DriftSpec::Random { bound } => {
                synth::random_drift_field(grid, self.seed.wrapping_add(1), *bound)
            }
        }
    }

    pub fn isaacs_family(&self, grid: Grid) -> fhjlab_core::Result<IsaacsFamily> {
        let s = FractionalOrder::new(0.5)?;
        let c_half = normalization_constant(grid.dim(), s);
        let mut rows = Vec::new();
        for row in &self.isaacs {
            let mut out = Vec::new();
            for ctl in row {
                let kernel = match ctl.kernel.as_str() {
                    "constant" => {
                        let v = ctl.kernel_value.unwrap_or(c_half);
                        let bounds = EllipticityBounds::new(
                            self.lambda.min(v),
                            self.big_lambda.max(v),
                        )?;
                        Some(KernelSpec::new(grid, bounds, move |_| v)?)
                    }
                    _ => None,
                };
                out.push(Control {
                    c: ctl.c,
                    b: ctl.b,
                    kernel,
                });
            }
            rows.push(out);
        }
        IsaacsFamily::new(rows, self.a_bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
equation = "hj"
[grid]
n_points = 64
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.equation, EquationKind::Hj);
        assert_eq!(cfg.grid_dim, 1);
        assert_eq!(cfg.grid_n_points, 64);
        assert_eq!(cfg.s, 0.5);
        assert_eq!(cfg.cfl, 0.8);
        assert_eq!(cfg.output_stride, 8);
        assert_eq!(cfg.diagnostics, vec!["decay".to_string()]);
        assert_eq!(cfg.hamiltonian, HamiltonianSpec::Zero);
    }

    #[test]
    fn lambda_ordering_error_names_both_keys() {
        let text = r#"
equation = "hj"
[grid]
n_points = 64
[solver]
lambda = 3.0
big_lambda = 1.0
"#;
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.path == "solver.lambda"));
        assert!(errs.iter().any(|e| e.path == "solver.big_lambda"));
    }

    #[test]
    fn s_out_of_range_cites_interval() {
        let text = r#"
equation = "hj"
[grid]
n_points = 64
[solver]
s = 1.5
"#;
        let errs = parse_config(text).unwrap_err();
        let e = errs.iter().find(|e| e.path == "solver.s").unwrap();
        assert!(e.message.contains("(0,1)"), "{}", e.message);
    }

    #[test]
    fn unknown_keys_are_errors_and_all_collected() {
        let text = r#"
equation = "hj"
bogus = 1
[grid]
n_points = 7
wat = 2
[solver]
s = -1.0
"#;
        let errs = parse_config(text).unwrap_err();
        let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
        assert!(paths.contains(&"bogus"));
        assert!(paths.contains(&"grid.wat"));
        assert!(paths.contains(&"grid.n_points"));
        assert!(paths.contains(&"solver.s"));
    }

    #[test]
    fn equation_specific_sections_are_checked() {
        let text = r#"
equation = "burgers"
[grid]
n_points = 64
[hamiltonian]
kind = "norm"
"#;
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.path == "hamiltonian"));
    }

    #[test]
    fn isaacs_rows_parse() {
        let text = r#"
equation = "isaacs"
isaacs = [[{ c = 0.0, b = [1.0], kernel = "fraclap" }], [{ c = 0.5, b = [-1.0] }]]
[grid]
n_points = 64
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.isaacs.len(), 2);
        assert_eq!(cfg.isaacs[0][0].b, [1.0, 0.0]);
        assert_eq!(cfg.isaacs[1][0].c, 0.5);
    }
}
