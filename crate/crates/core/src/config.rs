//! Run configuration: flat `section.key = value` text.
//!
//! Values use TOML syntax. Every key has a default; unknown keys, type
//! mismatches and out-of-range values are rejected with the offending key
//! named. [`RunConfig::dump`] writes every key in a fixed order, so
//! `dump(parse(dump(c))) == dump(c)`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::degenerate::{DegenerateNumerics, Interpolation};
use crate::elliptic::EllipticOptions;
use crate::error::{Error, Result};
use crate::evolution::{Limiter, StepOptions, ZetaScheme};
use crate::fields::{
    grad, make_pinning, perp, preset_initial, random_smooth, Grid2D, InitialPreset, ModelParams, PinningProfile,
    Regime, ScalarField, VectorField,
};
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamsConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinningConfig {
    /// `flat`, `random` or `snapshot`
    pub preset: String,
    pub amplitude: f64,
    pub modes: usize,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingConfig {
    /// `zero`, `current` (`Ψ = F⊥ − ∇⊥h`) or `snapshot`
    pub preset: String,
    pub fx: f64,
    pub fy: f64,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    /// `zero`, `patch`, `gaussian`, `ring` or `snapshot`
    pub preset: String,
    pub c: f64,
    pub radius: f64,
    pub ramp: f64,
    pub amplitude: f64,
    pub sigma: f64,
    pub width: f64,
    pub normalize: bool,
    pub path: String,
    pub zeta_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub elliptic_tol: f64,
    pub limiter: Limiter,
    pub zeta_scheme: ZetaScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputsConfig {
    pub dir: String,
    pub emit_snapshots: bool,
    pub emit_csv: bool,
    pub emit_plotdata: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    /// Mean of the initial vorticity.
    Mean,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateConfig {
    /// Output times; empty means `[time.T]`.
    pub times: Vec<f64>,
    /// `0` selects half the largest admissible step.
    pub ds: f64,
    pub interpolation: Interpolation,
    pub background: Background,
    /// `field` (from `v°`) or `constant_f`
    pub scenario: String,
    pub f0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub pinning: PinningConfig,
    pub forcing: ForcingConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    pub solver: SolverConfig,
    pub outputs: OutputsConfig,
    pub degenerate: DegenerateConfig,
    pub diagnostics: DiagnosticsConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig { n: 128, l: 8.0 },
            params: ParamsConfig {
                alpha: 1.0,
                beta: 0.0,
                lambda: 0.0,
                regime: Regime::Incompressible,
            },
            pinning: PinningConfig {
                preset: "flat".into(),
                amplitude: 0.0,
                modes: 2,
                path: String::new(),
            },
            forcing: ForcingConfig {
                preset: "zero".into(),
                fx: 0.0,
                fy: 0.0,
                path: String::new(),
            },
            initial: InitialConfig {
                preset: "gaussian".into(),
                c: 4.0,
                radius: 1.0 / (4.0 * std::f64::consts::PI).sqrt(),
                ramp: 0.0,
                amplitude: 1.0,
                sigma: 0.5,
                width: 0.2,
                normalize: true,
                path: String::new(),
                zeta_amplitude: 0.0,
            },
            time: TimeConfig {
                t_end: 1.0,
                cfl: 0.4,
                dt_max: 0.05,
                snapshot_stride: 10,
            },
            solver: SolverConfig {
                elliptic_tol: 1e-10,
                limiter: Limiter::VanLeer,
                zeta_scheme: ZetaScheme::Imex,
            },
            outputs: OutputsConfig {
                dir: "out".into(),
                emit_snapshots: true,
                emit_csv: true,
                emit_plotdata: true,
            },
            degenerate: DegenerateConfig {
                times: Vec::new(),
                ds: 0.0,
                interpolation: Interpolation::Bicubic,
                background: Background::Mean,
                scenario: "field".into(),
                f0: 1.0,
            },
            diagnostics: DiagnosticsConfig { p: 4.0 },
            seed: 0,
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses the text into a table without validating keys.
pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })
}

/// Sets `section.key` (or a top-level key) from a TOML literal; bare words
/// are taken as strings.
pub fn set_override(table: &mut Table, key: &str, literal: &str) -> Result<()> {
    let value = format!("v = {literal}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(literal.to_string()));
    match key.split_once('.') {
        Some((section, k)) => {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            match entry {
                Value::Table(t) => {
                    t.insert(k.to_string(), value);
                }
                _ => return Err(Error::validation(key, "section is not a table")),
            }
        }
        None => {
            table.insert(key.to_string(), value);
        }
    }
    Ok(())
}

struct Reader<'a> {
    table: &'a Table,
}

impl<'a> Reader<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a Value> {
        if section.is_empty() {
            return self.table.get(key);
        }
        self.table.get(section)?.as_table()?.get(key)
    }

    fn name(section: &str, key: &str) -> String {
        if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        }
    }

    fn float(&self, section: &str, key: &str, into: &mut f64) -> Result<()> {
        match self.get(section, key) {
            None => Ok(()),
            Some(Value::Float(x)) => {
                *into = *x;
                Ok(())
            }
            Some(Value::Integer(i)) => {
                *into = *i as f64;
                Ok(())
            }
            Some(_) => Err(Error::validation(Self::name(section, key), "expected a number")),
        }
    }

    fn uint(&self, section: &str, key: &str, into: &mut u64) -> Result<()> {
        match self.get(section, key) {
            None => Ok(()),
            Some(Value::Integer(i)) if *i >= 0 => {
                *into = *i as u64;
                Ok(())
            }
            Some(_) => Err(Error::validation(
                Self::name(section, key),
                "expected a non-negative integer",
            )),
        }
    }

    fn usize(&self, section: &str, key: &str, into: &mut usize) -> Result<()> {
        let mut v = *into as u64;
        self.uint(section, key, &mut v)?;
        *into = v as usize;
        Ok(())
    }

    fn boolean(&self, section: &str, key: &str, into: &mut bool) -> Result<()> {
        match self.get(section, key) {
            None => Ok(()),
            Some(Value::Boolean(b)) => {
                *into = *b;
                Ok(())
            }
            Some(_) => Err(Error::validation(Self::name(section, key), "expected true or false")),
        }
    }

    fn string(&self, section: &str, key: &str, into: &mut String) -> Result<()> {
        match self.get(section, key) {
            None => Ok(()),
            Some(Value::String(s)) => {
                *into = s.clone();
                Ok(())
            }
            Some(_) => Err(Error::validation(Self::name(section, key), "expected a string")),
        }
    }

    fn choice<T>(&self, section: &str, key: &str, into: &mut T, parse: impl Fn(&str) -> Option<T>) -> Result<()> {
        let mut s = String::new();
        if self.get(section, key).is_none() {
            return Ok(());
        }
        self.string(section, key, &mut s)?;
        *into = parse(&s).ok_or_else(|| Error::validation(Self::name(section, key), format!("unknown value `{s}`")))?;
        Ok(())
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["n", "l"]),
    ("params", &["alpha", "beta", "lambda", "regime"]),
    ("pinning", &["preset", "amplitude", "modes", "path"]),
    ("forcing", &["preset", "fx", "fy", "path"]),
    (
        "initial",
        &[
            "preset",
            "c",
            "radius",
            "ramp",
            "amplitude",
            "sigma",
            "width",
            "normalize",
            "path",
            "zeta_amplitude",
        ],
    ),
    ("time", &["T", "cfl", "dt_max", "snapshot_stride"]),
    ("solver", &["elliptic_tol", "limiter", "zeta_scheme"]),
    ("outputs", &["dir", "emit_snapshots", "emit_csv", "emit_plotdata"]),
    ("degenerate", &["times", "ds", "interpolation", "background", "scenario", "f0"]),
    ("diagnostics", &["p"]),
];

fn check_keys(table: &Table) -> Result<()> {
    for (section, value) in table {
        if section == "seed" {
            continue;
        }
        let Some((_, keys)) = KEYS.iter().find(|(s, _)| s == section) else {
            return Err(Error::validation(section.as_str(), "unknown key"));
        };
        let Value::Table(inner) = value else {
            return Err(Error::validation(section.as_str(), "expected `section.key = value` entries"));
        };
        for k in inner.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(Error::validation(format!("{section}.{k}"), "unknown key"));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        Self::from_table(&parse_table(text)?)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        check_keys(table)?;
        let r = Reader { table };
        let mut c = RunConfig::default();
        r.usize("grid", "n", &mut c.grid.n)?;
        r.float("grid", "l", &mut c.grid.l)?;
        r.float("params", "alpha", &mut c.params.alpha)?;
        r.float("params", "beta", &mut c.params.beta)?;
        r.float("params", "lambda", &mut c.params.lambda)?;
        r.choice("params", "regime", &mut c.params.regime, Regime::from_name)?;
        r.string("pinning", "preset", &mut c.pinning.preset)?;
        r.float("pinning", "amplitude", &mut c.pinning.amplitude)?;
        r.usize("pinning", "modes", &mut c.pinning.modes)?;
        r.string("pinning", "path", &mut c.pinning.path)?;
        r.string("forcing", "preset", &mut c.forcing.preset)?;
        r.float("forcing", "fx", &mut c.forcing.fx)?;
        r.float("forcing", "fy", &mut c.forcing.fy)?;
        r.string("forcing", "path", &mut c.forcing.path)?;
        let i = &mut c.initial;
        r.string("initial", "preset", &mut i.preset)?;
        r.float("initial", "c", &mut i.c)?;
        r.float("initial", "radius", &mut i.radius)?;
        r.float("initial", "ramp", &mut i.ramp)?;
        r.float("initial", "amplitude", &mut i.amplitude)?;
        r.float("initial", "sigma", &mut i.sigma)?;
        r.float("initial", "width", &mut i.width)?;
        r.boolean("initial", "normalize", &mut i.normalize)?;
        r.string("initial", "path", &mut i.path)?;
        r.float("initial", "zeta_amplitude", &mut i.zeta_amplitude)?;
        r.float("time", "T", &mut c.time.t_end)?;
        r.float("time", "cfl", &mut c.time.cfl)?;
        r.float("time", "dt_max", &mut c.time.dt_max)?;
        r.usize("time", "snapshot_stride", &mut c.time.snapshot_stride)?;
        r.float("solver", "elliptic_tol", &mut c.solver.elliptic_tol)?;
        r.choice("solver", "limiter", &mut c.solver.limiter, Limiter::from_name)?;
        r.choice("solver", "zeta_scheme", &mut c.solver.zeta_scheme, ZetaScheme::from_name)?;
        r.string("outputs", "dir", &mut c.outputs.dir)?;
        r.boolean("outputs", "emit_snapshots", &mut c.outputs.emit_snapshots)?;
        r.boolean("outputs", "emit_csv", &mut c.outputs.emit_csv)?;
        r.boolean("outputs", "emit_plotdata", &mut c.outputs.emit_plotdata)?;
        let d = &mut c.degenerate;
        match r.get("degenerate", "times") {
            None => {}
            Some(Value::Array(a)) => {
                d.times = a
                    .iter()
                    .map(|v| match v {
                        Value::Float(x) => Some(*x),
                        Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::validation("degenerate.times", "expected a list of numbers"))?;
            }
            Some(_) => return Err(Error::validation("degenerate.times", "expected a list of numbers")),
        }
        r.float("degenerate", "ds", &mut d.ds)?;
        r.choice("degenerate", "interpolation", &mut d.interpolation, Interpolation::from_name)?;
        match r.get("degenerate", "background") {
            None => {}
            Some(Value::String(s)) if s == "mean" => d.background = Background::Mean,
            Some(Value::Float(x)) => d.background = Background::Value(*x),
            Some(Value::Integer(i)) => d.background = Background::Value(*i as f64),
            Some(_) => {
                return Err(Error::validation(
                    "degenerate.background",
                    "expected a number or \"mean\"",
                ))
            }
        }
        r.string("degenerate", "scenario", &mut d.scenario)?;
        r.float("degenerate", "f0", &mut d.f0)?;
        r.float("diagnostics", "p", &mut c.diagnostics.p)?;
        r.uint("", "seed", &mut c.seed)?;
        c.validate()?;
        Ok(c)
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, r: &str| Err(Error::validation(f, r));
        let finite = |f: &str, x: f64| -> Result<()> {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(f, "must be finite"))
            }
        };
        if self.grid.n < 8 || !self.grid.n.is_power_of_two() {
            return bad("grid.n", "must be a power of two >= 8");
        }
        if !(self.grid.l > 0.0 && self.grid.l.is_finite()) {
            return bad("grid.l", "must be > 0");
        }
        let p = &self.params;
        finite("params.alpha", p.alpha)?;
        finite("params.beta", p.beta)?;
        finite("params.lambda", p.lambda)?;
        if p.alpha < 0.0 {
            return bad("params.alpha", "must be >= 0");
        }
        if p.lambda < 0.0 {
            return bad("params.lambda", "must be >= 0");
        }
        if p.regime == Regime::DegenerateParabolic {
            if p.beta != 0.0 {
                return bad("params.beta", "the degenerate parabolic regime requires beta = 0");
            }
            if p.lambda != 0.0 {
                return bad("params.lambda", "the degenerate parabolic regime requires lambda = 0");
            }
            if !(p.alpha > 0.0) {
                return bad("params.alpha", "the degenerate parabolic regime requires alpha > 0");
            }
        }
        let exists = |f: &str, path: &str| -> Result<()> {
            if path.is_empty() {
                return Err(Error::validation(f, "a path is required by the snapshot preset"));
            }
            if !Path::new(path).is_file() {
                return Err(Error::validation(f, format!("file `{path}` does not exist")));
            }
            Ok(())
        };
        match self.pinning.preset.as_str() {
            "flat" => {}
            "random" => {
                finite("pinning.amplitude", self.pinning.amplitude)?;
                if self.pinning.modes == 0 {
                    return bad("pinning.modes", "must be >= 1");
                }
            }
            "snapshot" => exists("pinning.path", &self.pinning.path)?,
            _ => return bad("pinning.preset", "expected flat, random or snapshot"),
        }
        if self.pinning.amplitude.abs() > crate::fields::MAX_PINNING_AMPLITUDE {
            return bad("pinning.amplitude", "must be at most 500 in magnitude");
        }
        match self.forcing.preset.as_str() {
            "zero" => {}
            "current" => {
                finite("forcing.fx", self.forcing.fx)?;
                finite("forcing.fy", self.forcing.fy)?;
            }
            "snapshot" => exists("forcing.path", &self.forcing.path)?,
            _ => return bad("forcing.preset", "expected zero, current or snapshot"),
        }
        let i = &self.initial;
        match i.preset.as_str() {
            "zero" | "patch" | "gaussian" | "ring" => {}
            "snapshot" => exists("initial.path", &i.path)?,
            _ => return bad("initial.preset", "expected zero, patch, gaussian, ring or snapshot"),
        }
        for (f, x) in [
            ("initial.c", i.c),
            ("initial.radius", i.radius),
            ("initial.ramp", i.ramp),
            ("initial.amplitude", i.amplitude),
            ("initial.sigma", i.sigma),
            ("initial.width", i.width),
            ("initial.zeta_amplitude", i.zeta_amplitude),
        ] {
            finite(f, x)?;
        }
        let t = &self.time;
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return bad("time.T", "must be >= 0");
        }
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            return bad("time.cfl", "must lie in (0, 1]");
        }
        if !(t.dt_max > 0.0 && t.dt_max.is_finite()) {
            return bad("time.dt_max", "must be > 0");
        }
        if t.snapshot_stride == 0 {
            return bad("time.snapshot_stride", "must be >= 1");
        }
        if !(self.solver.elliptic_tol > 0.0 && self.solver.elliptic_tol < 1.0) {
            return bad("solver.elliptic_tol", "must lie in (0, 1)");
        }
        if self.outputs.dir.is_empty() {
            return bad("outputs.dir", "must not be empty");
        }
        let d = &self.degenerate;
        if d.times.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return bad("degenerate.times", "times must be >= 0");
        }
        if !(d.ds >= 0.0 && d.ds.is_finite()) {
            return bad("degenerate.ds", "must be >= 0 (0 selects automatically)");
        }
        if let Background::Value(x) = d.background {
            finite("degenerate.background", x)?;
        }
        match d.scenario.as_str() {
            "field" => {}
            "constant_f" => {
                if !(d.f0 >= 0.0 && d.f0.is_finite()) {
                    return bad("degenerate.f0", "must be >= 0");
                }
            }
            _ => return bad("degenerate.scenario", "expected field or constant_f"),
        }
        if !(self.diagnostics.p >= 1.0) {
            return bad("diagnostics.p", "must be >= 1");
        }
        Ok(())
    }

    /// Every key in a fixed order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let f = |x: f64| format!("{x:?}");
        let q = |x: &str| Value::String(x.to_string()).to_string();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("grid.n", self.grid.n.to_string());
        line("grid.l", f(self.grid.l));
        line("params.alpha", f(self.params.alpha));
        line("params.beta", f(self.params.beta));
        line("params.lambda", f(self.params.lambda));
        line("params.regime", q(self.params.regime.name()));
        line("pinning.preset", q(&self.pinning.preset));
        line("pinning.amplitude", f(self.pinning.amplitude));
        line("pinning.modes", self.pinning.modes.to_string());
        line("pinning.path", q(&self.pinning.path));
        line("forcing.preset", q(&self.forcing.preset));
        line("forcing.fx", f(self.forcing.fx));
        line("forcing.fy", f(self.forcing.fy));
        line("forcing.path", q(&self.forcing.path));
        let i = &self.initial;
        line("initial.preset", q(&i.preset));
        line("initial.c", f(i.c));
        line("initial.radius", f(i.radius));
        line("initial.ramp", f(i.ramp));
        line("initial.amplitude", f(i.amplitude));
        line("initial.sigma", f(i.sigma));
        line("initial.width", f(i.width));
        line("initial.normalize", i.normalize.to_string());
        line("initial.path", q(&i.path));
        line("initial.zeta_amplitude", f(i.zeta_amplitude));
        line("time.T", f(self.time.t_end));
        line("time.cfl", f(self.time.cfl));
        line("time.dt_max", f(self.time.dt_max));
        line("time.snapshot_stride", self.time.snapshot_stride.to_string());
        line("solver.elliptic_tol", f(self.solver.elliptic_tol));
        line("solver.limiter", q(self.solver.limiter.name()));
        line("solver.zeta_scheme", q(self.solver.zeta_scheme.name()));
        line("outputs.dir", q(&self.outputs.dir));
        line("outputs.emit_snapshots", self.outputs.emit_snapshots.to_string());
        line("outputs.emit_csv", self.outputs.emit_csv.to_string());
        line("outputs.emit_plotdata", self.outputs.emit_plotdata.to_string());
        let d = &self.degenerate;
        line(
            "degenerate.times",
            format!("[{}]", d.times.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", ")),
        );
        line("degenerate.ds", f(d.ds));
        line("degenerate.interpolation", q(d.interpolation.name()));
        line(
            "degenerate.background",
            match d.background {
                Background::Mean => q("mean"),
                Background::Value(x) => f(x),
            },
        );
        line("degenerate.scenario", q(&d.scenario));
        line("degenerate.f0", f(d.f0));
        line("diagnostics.p", f(self.diagnostics.p));
        line("seed", self.seed.to_string());
        s
    }

    pub fn grid2d(&self) -> Result<Grid2D> {
        Grid2D::new(self.grid.n, self.grid.l)
    }

    pub fn model_params(&self) -> ModelParams {
        let p = &self.params;
        match p.regime {
            Regime::Incompressible => ModelParams::incompressible(p.alpha, p.beta),
            Regime::Compressible => ModelParams::compressible(p.alpha, p.beta, p.lambda),
            Regime::DegenerateParabolic => ModelParams::degenerate(p.alpha),
        }
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            cfl: self.time.cfl,
            dt_max: self.time.dt_max,
            limiter: self.solver.limiter,
            zeta_scheme: self.solver.zeta_scheme,
            elliptic: EllipticOptions::with_tol(self.solver.elliptic_tol),
        }
    }

    /// Output directory, with `MEANVORT_OUT` taking precedence.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os("MEANVORT_OUT") {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(&self.outputs.dir),
        }
    }

    fn read_scalar(&self, field: &str, path: &str, grid: Grid2D) -> Result<ScalarField> {
        let f = Snapshot::read(Path::new(path))?
            .into_scalar()
            .ok_or_else(|| Error::validation(field, "expected a scalar snapshot"))?;
        if f.grid() != &grid {
            return Err(Error::validation(field, "snapshot grid differs from grid.n/grid.l"));
        }
        Ok(f)
    }

    pub fn pinning_profile(&self) -> Result<PinningProfile> {
        let grid = self.grid2d()?;
        match self.pinning.preset.as_str() {
            "flat" => Ok(PinningProfile::flat(grid)),
            "random" => make_pinning(random_smooth(grid, self.pinning.modes, self.pinning.amplitude, self.seed)),
            _ => make_pinning(self.read_scalar("pinning.path", &self.pinning.path, grid)?),
        }
    }

    pub fn forcing_field(&self, pin: &PinningProfile) -> Result<VectorField> {
        let grid = self.grid2d()?;
        match self.forcing.preset.as_str() {
            "zero" => Ok(VectorField::zeros(grid)),
            "current" => {
                // Ψ = F⊥ − ∇⊥h
                let f = VectorField::from_fn(grid, |_, _| [-self.forcing.fy, self.forcing.fx]);
                Ok(f.sub(&perp(&grad(&pin.h))))
            }
            _ => {
                let v = Snapshot::read(Path::new(&self.forcing.path))?
                    .into_vector()
                    .ok_or_else(|| Error::validation("forcing.path", "expected a vector snapshot"))?;
                if v.grid() != &grid {
                    return Err(Error::validation("forcing.path", "snapshot grid differs from grid.n/grid.l"));
                }
                Ok(v)
            }
        }
    }

    /// `(ω°, ζ°)`.
    pub fn initial_fields(&self) -> Result<(ScalarField, ScalarField)> {
        let grid = self.grid2d()?;
        let i = &self.initial;
        let center = grid.center();
        let preset = match i.preset.as_str() {
            "zero" => InitialPreset::Zero,
            "patch" => InitialPreset::UniformPatch {
                c: i.c,
                r: i.radius,
                center,
                ramp: i.ramp,
            },
            "gaussian" => InitialPreset::Gaussian {
                amplitude: i.amplitude,
                sigma: i.sigma,
                center,
            },
            "ring" => InitialPreset::MollifiedRing {
                amplitude: i.amplitude,
                radius: i.radius,
                width: i.width,
                center,
            },
            _ => {
                let mut w = self.read_scalar("initial.path", &i.path, grid)?;
                if i.normalize {
                    let m = w.integral();
                    if m > 0.0 {
                        w = w.scale(1.0 / m);
                    }
                }
                return Ok((w, self.initial_zeta(grid)));
            }
        };
        let (w, _) = preset_initial(&preset, grid, i.normalize)?;
        Ok((w, self.initial_zeta(grid)))
    }

    fn initial_zeta(&self, grid: Grid2D) -> ScalarField {
        if self.initial.zeta_amplitude == 0.0 || !self.params.regime.evolves_zeta() {
            ScalarField::zeros(grid)
        } else {
            random_smooth(grid, 3, self.initial.zeta_amplitude, self.seed.wrapping_add(1))
        }
    }

    pub fn degenerate_numerics(&self, omega0: &ScalarField) -> DegenerateNumerics {
        DegenerateNumerics {
            ds: (self.degenerate.ds > 0.0).then_some(self.degenerate.ds),
            interpolation: self.degenerate.interpolation,
            background: match self.degenerate.background {
                Background::Mean => omega0.mean(),
                Background::Value(x) => x,
            },
        }
    }

    pub fn degenerate_times(&self) -> Vec<f64> {
        if self.degenerate.times.is_empty() {
            vec![self.time.t_end]
        } else {
            self.degenerate.times.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults_and_dump_is_a_fixed_point() {
        let c = RunConfig::parse_str("grid.n = 64\nparams.regime = \"compressible\"\n").unwrap();
        assert_eq!(c.grid.n, 64);
        assert_eq!(c.params.regime, Regime::Compressible);
        assert_eq!(c.time, RunConfig::default().time);
        let d1 = c.dump();
        let c2 = RunConfig::parse_str(&d1).unwrap();
        assert_eq!(c2, c);
        assert_eq!(c2.dump(), d1);
    }

    #[test]
    fn unknown_key_is_named() {
        match RunConfig::parse_str("params.gamma = 1.0\n") {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "params.gamma"),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse_str("colour = 1\n") {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "colour"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_regime_rejects_beta() {
        let text = "params.regime = \"degenerate_parabolic\"\nparams.beta = 0.1\n";
        match RunConfig::parse_str(text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "params.beta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        match RunConfig::parse_str("grid.n = 64\ngrid.l = = 3\n") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column >= 8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_and_range_errors() {
        let field = |t: &str| match RunConfig::parse_str(t) {
            Err(Error::Validation { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field("grid.n = 100\n"), "grid.n");
        assert_eq!(field("time.T = -1.0\n"), "time.T");
        assert_eq!(field("time.cfl = \"fast\"\n"), "time.cfl");
        assert_eq!(field("solver.limiter = \"superbee\"\n"), "solver.limiter");
        assert_eq!(field("initial.preset = \"snapshot\"\ninitial.path = \"/nonexistent/w.mvf\"\n"), "initial.path");
    }

    #[test]
    fn overrides() {
        let mut t = parse_table("grid.n = 32\n").unwrap();
        set_override(&mut t, "params.alpha", "0.25").unwrap();
        set_override(&mut t, "solver.limiter", "minmod").unwrap();
        set_override(&mut t, "seed", "7").unwrap();
        let c = RunConfig::from_table(&t).unwrap();
        assert_eq!(c.params.alpha, 0.25);
        assert_eq!(c.solver.limiter, Limiter::MinMod);
        assert_eq!(c.seed, 7);
    }
}
