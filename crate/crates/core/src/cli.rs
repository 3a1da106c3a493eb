//! Command line front end behind the `meanvort` binary.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 solver error,
//! 4 failed check.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{parse_table, set_override, RunConfig};
use crate::degenerate::{degenerate_solutions, kappa_fields, DegenerateSetup};
use crate::diagnostics::{
    check_decay_remark44, diagnostics_rows, mass_drift, read_csv, write_csv, DiagOptions, DiagRow, CSV_HEADER,
};
use crate::error::Error;
use crate::evolution::{initial_state, run_observed, Limiter, RunSetup, Trajectory};
use crate::fields::{perp, Regime, ScalarField, State, VectorField};
use crate::snapshot::Snapshot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

/// Relative mass drift accepted by `check`.
pub const MASS_TOL: f64 = 1e-10;
/// Undershoot below zero accepted by `check`.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Largest accepted ratio to the `L^p` decay bounds.
pub const DECAY_MARGIN: f64 = 1.05;

#[derive(Parser, Debug)]
#[command(name = "meanvort", version, about = "Mean-field supercurrent and vortex-density simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evolve the configured model and write diagnostics and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Explicit characteristic solution of the degenerate parabolic model.
    Degenerate {
        #[arg(long)]
        config: PathBuf,
        /// Run directory of an evolution run to compare against.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Recompute diagnostics from a run directory and check the invariants.
    Check { dir: PathBuf },
    /// Run one child per value combination of the varied keys.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `section.key=v1,v2,...`; repeat for a product sweep.
        #[arg(long, required = true)]
        vary: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::InvalidGrid(_)
        | Error::PinningOverflow { .. }
        | Error::PatchTooLarge { .. }
        | Error::InvalidParameter(_)
        | Error::RegimeMismatch(_)
        | Error::NegativeVorticity { .. }
        | Error::Snapshot { .. } => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("meanvort: {e}");
    exit_code(e)
}

pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Degenerate { config, compare } => cmd_degenerate(&config, compare.as_deref()),
        Cmd::Check { dir } => cmd_check(&dir),
        Cmd::Sweep { config, vary, jobs } => cmd_sweep(&config, &vary, jobs),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::validation("outputs.dir", format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn snapshot_name(kind: &str, index: usize) -> String {
    format!("{kind}_{index:05}.mvf")
}

fn write_plotdata(dir: &Path, rows: &[DiagRow]) -> Result<(), Error> {
    let plot = dir.join("plot");
    fs::create_dir_all(&plot).map_err(|e| io_err(&plot, e))?;
    let names: Vec<&str> = CSV_HEADER.split(',').collect();
    for (k, name) in names.iter().enumerate().skip(1) {
        if *name == "p" {
            continue;
        }
        let mut s = format!("# t {name}\n");
        for r in rows {
            let v = r.values();
            s.push_str(&format!("{:e} {:e}\n", v[0], v[k]));
        }
        write_file(&plot.join(format!("{name}.dat")), s.as_bytes())?;
    }
    Ok(())
}

fn write_manifest(dir: &Path, cfg: &RunConfig, command: &str, extra: &[(String, String)]) -> Result<(), Error> {
    let mut s = String::new();
    s.push_str(&format!("meanvort_version = {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str("snapshot_format = MVF1\n");
    s.push_str(&format!("csv_schema = {CSV_HEADER}\n"));
    s.push_str(&format!("command = {command}\n"));
    for (k, v) in extra {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s.push_str("\n# configuration\n");
    s.push_str(&cfg.dump());
    write_file(&dir.join("manifest.txt"), s.as_bytes())?;
    write_file(&dir.join("config.toml"), cfg.dump().as_bytes())
}

struct Scenario {
    cfg: RunConfig,
    setup: RunSetup,
}

fn load_scenario(path: &Path) -> Result<Scenario, Error> {
    let cfg = RunConfig::parse_file(path).map_err(|e| match e {
        Error::Io(io) => Error::validation("--config", format!("{}: {io}", path.display())),
        e => e,
    })?;
    let pin = cfg.pinning_profile()?;
    let psi = cfg.forcing_field(&pin)?;
    let (omega, zeta) = cfg.initial_fields()?;
    let params = cfg.model_params();
    params.validate()?;
    let opts = cfg.step_options();
    opts.validate()?;
    let initial = initial_state(omega, zeta, &pin, &params, &opts)?;
    let setup = RunSetup {
        initial,
        pin,
        psi,
        params,
        t_end: cfg.time.t_end,
        opts,
        snapshot_stride: cfg.time.snapshot_stride,
    };
    Ok(Scenario { cfg, setup })
}

pub fn cmd_run(config: &Path) -> i32 {
    let started = Instant::now();
    let sc = match load_scenario(config) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let dir = sc.cfg.output_dir();
    if let Err(e) = prepare_dir(&dir) {
        return fail(&e);
    }
    let snap_dir = dir.join("snapshots");
    let emit_snapshots = sc.cfg.outputs.emit_snapshots;
    if emit_snapshots {
        if let Err(e) = fs::create_dir_all(&snap_dir) {
            return fail(&io_err(&snap_dir, e));
        }
    }
    let mut index = 0;
    let mut write_error = None;
    let (traj, solver_error) = run_observed(&sc.setup, |state, _| {
        if !emit_snapshots || write_error.is_some() {
            return;
        }
        let r = Snapshot::scalar(state.t, state.omega.clone())
            .write(&snap_dir.join(snapshot_name("omega", index)))
            .and_then(|_| Snapshot::vector(state.t, state.v.clone()).write(&snap_dir.join(snapshot_name("v", index))))
            .and_then(|_| {
                Snapshot::scalar(state.t, state.zeta.clone()).write(&snap_dir.join(snapshot_name("zeta", index)))
            });
        if let Err(e) = r {
            write_error = Some(e);
        }
        index += 1;
    });
    if let Some(e) = write_error {
        return fail(&e);
    }
    let diag = DiagOptions {
        p: sc.cfg.diagnostics.p,
        reference: None,
    };
    let rows = diagnostics_rows(&traj, &sc.setup.pin, &sc.setup.psi, &sc.setup.params, &diag);
    let emitted = (|| -> Result<(), Error> {
        if sc.cfg.outputs.emit_csv {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            write_file(&dir.join("diagnostics.csv"), &buf)?;
            let mut steps = String::from("step,t,dt,mass,min,max,div_a_v_rel,elliptic_iters\n");
            for r in &traj.records {
                steps.push_str(&format!(
                    "{},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                    r.step, r.t, r.dt, r.mass, r.min, r.max, r.div_a_v_rel, r.elliptic_iters
                ));
            }
            write_file(&dir.join("steps.csv"), steps.as_bytes())?;
        }
        if sc.cfg.outputs.emit_plotdata {
            write_plotdata(&dir, &rows)?;
        }
        let status = match &solver_error {
            None => "ok".to_string(),
            Some(e) => format!("failed: {e}"),
        };
        write_manifest(
            &dir,
            &sc.cfg,
            "run",
            &[
                ("status".into(), status),
                ("steps".into(), (traj.records.len() - 1).to_string()),
                ("snapshots".into(), traj.snapshots.len().to_string()),
                ("wall_clock_seconds".into(), format!("{:.3}", started.elapsed().as_secs_f64())),
            ],
        )
    })();
    if let Some(e) = solver_error {
        return fail(&e);
    }
    if let Err(e) = emitted {
        return fail(&e);
    }
    EXIT_OK
}

/// Finds `(t, v)` snapshots of an evolution run directory.
fn load_run_velocities(dir: &Path) -> Result<Vec<(f64, VectorField)>, Error> {
    let snap = dir.join("snapshots");
    let mut out = Vec::new();
    for path in sorted_snapshots(&snap, "v")? {
        let s = Snapshot::read(&path)?;
        let t = s.t;
        if let Some(v) = s.into_vector() {
            out.push((t, v));
        }
    }
    Ok(out)
}

fn sorted_snapshots(dir: &Path, kind: &str) -> Result<Vec<PathBuf>, Error> {
    let prefix = format!("{kind}_");
    let entries = fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&prefix) && n.ends_with(".mvf"))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn cmd_degenerate(config: &Path, compare: Option<&Path>) -> i32 {
    match degenerate_inner(config, compare) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(&e),
    }
}

fn degenerate_inner(config: &Path, compare: Option<&Path>) -> Result<(), Error> {
    let started = Instant::now();
    let cfg = RunConfig::parse_file(config).map_err(|e| match e {
        Error::Io(io) => Error::validation("--config", format!("{}: {io}", config.display())),
        e => e,
    })?;
    if cfg.params.regime != Regime::DegenerateParabolic {
        return Err(Error::RegimeMismatch(format!(
            "degenerate needs params.regime = \"degenerate_parabolic\", found \"{}\"",
            cfg.params.regime.name()
        )));
    }
    let reference = match compare {
        Some(d) => Some(load_run_velocities(d).map_err(|e| Error::validation("--compare", e.to_string()))?),
        None => None,
    };
    let pin = cfg.pinning_profile()?;
    let psi = cfg.forcing_field(&pin)?;
    let (omega, zeta) = cfg.initial_fields()?;
    let params = cfg.model_params();
    let opts = cfg.step_options();
    let state = initial_state(omega, zeta, &pin, &params, &opts)?;
    let v0 = state.v.clone();
    let times = cfg.degenerate_times();
    // the flow depends on alpha only through alpha t
    let scaled: Vec<f64> = times.iter().map(|t| params.alpha * t).collect();
    let numerics = cfg.degenerate_numerics(&state.omega);
    let constant_f = cfg.degenerate.scenario == "constant_f";
    let solutions: Vec<(VectorField, ScalarField)> = if constant_f {
        let grid = *v0.grid();
        let setup = DegenerateSetup::from_fields(
            perp(&psi.add(&v0)),
            ScalarField::constant(grid, cfg.degenerate.f0),
            ScalarField::zeros(grid),
            numerics.interpolation,
        )?;
        kappa_fields(&setup, &scaled, numerics.ds)?
            .into_iter()
            .map(|k| {
                let u = psi.add(&v0).scale_by(&k);
                (u.sub(&psi), k)
            })
            .collect()
    } else {
        degenerate_solutions(&v0, &psi, &scaled, &numerics)?
    };

    let dir = cfg.output_dir();
    prepare_dir(&dir)?;
    let mut csv = String::from("t,kappa_min,kappa_max,kappa_mean,kappa_closed_form,max_abs_err\n");
    let fmt = |x: f64| if x.is_nan() { "nan".to_string() } else { format!("{x:e}") };
    for (t, (_, k)) in times.iter().zip(&solutions) {
        let (exact, err) = if constant_f {
            let e = 1.0 / (1.0 + cfg.degenerate.f0 * params.alpha * t);
            (e, k.data().iter().map(|x| (x - e).abs()).fold(0.0, f64::max))
        } else {
            (f64::NAN, f64::NAN)
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(*t),
            fmt(k.min()),
            fmt(k.max()),
            fmt(k.mean()),
            fmt(exact),
            fmt(err)
        ));
    }
    if cfg.outputs.emit_csv {
        write_file(&dir.join("degenerate.csv"), csv.as_bytes())?;
    }
    if cfg.outputs.emit_snapshots {
        let snap = dir.join("snapshots");
        fs::create_dir_all(&snap).map_err(|e| io_err(&snap, e))?;
        Snapshot::vector(0.0, v0.clone()).write(&snap.join("v0.mvf"))?;
        for (i, (t, (v, k))) in times.iter().zip(&solutions).enumerate() {
            Snapshot::vector(*t, v.clone()).write(&snap.join(snapshot_name("v", i)))?;
            Snapshot::scalar(*t, k.clone()).write(&snap.join(snapshot_name("kappa", i)))?;
        }
    }
    if let Some(reference) = reference {
        let mut s = String::from("t,t_reference,rel_l2_v_diff\n");
        for (t, (v, _)) in times.iter().zip(&solutions) {
            let hit = reference
                .iter()
                .filter(|(tr, r)| (tr - t).abs() <= 1e-9 * t.abs().max(1.0) && r.grid() == v.grid())
                .next_back();
            match hit {
                Some((tr, r)) => {
                    let d = v.sub(r).l2_norm() / r.l2_norm().max(f64::MIN_POSITIVE);
                    s.push_str(&format!("{},{},{}\n", fmt(*t), fmt(*tr), fmt(d)));
                }
                None => s.push_str(&format!("{},nan,nan\n", fmt(*t))),
            }
        }
        write_file(&dir.join("comparison.csv"), s.as_bytes())?;
    }
    write_manifest(
        &dir,
        &cfg,
        "degenerate",
        &[
            ("status".into(), "ok".into()),
            ("background".into(), format!("{:e}", numerics.background)),
            ("wall_clock_seconds".into(), format!("{:.3}", started.elapsed().as_secs_f64())),
        ],
    )
}

struct CheckLine {
    name: &'static str,
    pass: Option<bool>,
    value: f64,
    limit: f64,
}

pub fn cmd_check(dir: &Path) -> i32 {
    let usage = |msg: String| {
        eprintln!("meanvort check: {msg}");
        eprintln!("usage: meanvort check DIR   (DIR produced by `meanvort run`)");
        EXIT_CONFIG
    };
    let cfg_path = dir.join("config.toml");
    if !cfg_path.is_file() {
        return usage(format!("{} is not a run directory (no config.toml)", dir.display()));
    }
    let cfg = match RunConfig::parse_file(&cfg_path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let snap = dir.join("snapshots");
    let omegas = match sorted_snapshots(&snap, "omega") {
        Ok(p) if !p.is_empty() => p,
        _ => return usage(format!("{} holds no snapshots", dir.display())),
    };
    let traj = match load_trajectory(&snap, &omegas) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let pin = match cfg.pinning_profile() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let psi = match cfg.forcing_field(&pin) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let params = cfg.model_params();
    let diag = DiagOptions {
        p: cfg.diagnostics.p,
        reference: None,
    };
    let rows = diagnostics_rows(&traj, &pin, &psi, &params, &diag);

    let mut lines = Vec::new();
    lines.push(CheckLine {
        name: "mass",
        pass: Some(mass_drift(&traj) <= MASS_TOL),
        value: mass_drift(&traj),
        limit: MASS_TOL,
    });
    let min = traj.snapshots.iter().map(|s| s.omega.min()).fold(f64::INFINITY, f64::min);
    lines.push(CheckLine {
        name: "positivity",
        pass: (cfg.solver.limiter != Limiter::None).then_some(min >= -POSITIVITY_TOL),
        value: min,
        limit: -POSITIVITY_TOL,
    });
    let omega0 = traj.snapshots[0].omega.clone();
    for (name, p) in [("decay_r44_p", cfg.diagnostics.p), ("decay_r44_inf", f64::INFINITY)] {
        match check_decay_remark44(&traj, &omega0, &params, &psi, &pin, p) {
            Ok(m) => {
                let worst = m
                    .iter()
                    .filter(|x| x.t > 0.0)
                    .map(|x| x.sharp.max(x.universal))
                    .fold(0.0, f64::max);
                lines.push(CheckLine {
                    name,
                    pass: Some(worst <= DECAY_MARGIN),
                    value: worst,
                    limit: DECAY_MARGIN,
                });
            }
            Err(_) => lines.push(CheckLine {
                name,
                pass: None,
                value: f64::NAN,
                limit: DECAY_MARGIN,
            }),
        }
    }
    let stored = fs::read_to_string(dir.join("diagnostics.csv")).ok().and_then(|t| read_csv(&t));
    let consistent = stored.map(|s| {
        s.len() == rows.len()
            && s.iter().zip(&rows).all(|(a, b)| {
                a.values()
                    .iter()
                    .zip(b.values())
                    .all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
            })
    });

    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{:<16} {:<6} {:>14} {:>14}", "check", "status", "value", "limit");
    let mut failed = false;
    for l in &lines {
        let status = match l.pass {
            Some(true) => "pass",
            Some(false) => {
                failed = true;
                "FAIL"
            }
            None => "skip",
        };
        let _ = writeln!(out, "{:<16} {:<6} {:>14.6e} {:>14.6e}", l.name, status, l.value, l.limit);
    }
    let note = match consistent {
        Some(true) => "matches",
        Some(false) => "differs",
        None => "absent",
    };
    let _ = writeln!(out, "stored diagnostics.csv {note} the recomputed rows ({} rows)", rows.len());
    if failed {
        EXIT_CHECK
    } else {
        EXIT_OK
    }
}

fn load_trajectory(snap: &Path, omegas: &[PathBuf]) -> Result<Trajectory, Error> {
    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        records: Vec::new(),
    };
    for path in omegas {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let suffix = name.trim_start_matches("omega_");
        let s = Snapshot::read(path)?;
        let t = s.t;
        let bad = |p: &Path, what: &str| Error::Snapshot {
            path: p.to_path_buf(),
            reason: what.to_string(),
        };
        let omega = s.into_scalar().ok_or_else(|| bad(path, "expected a scalar snapshot"))?;
        let vp = snap.join(format!("v_{suffix}"));
        let v = Snapshot::read(&vp)?.into_vector().ok_or_else(|| bad(&vp, "expected a vector snapshot"))?;
        let zp = snap.join(format!("zeta_{suffix}"));
        let zeta = Snapshot::read(&zp)?.into_scalar().ok_or_else(|| bad(&zp, "expected a scalar snapshot"))?;
        if v.grid() != omega.grid() || zeta.grid() != omega.grid() {
            return Err(Error::GridMismatch);
        }
        traj.times.push(t);
        traj.snapshots.push(State { t, v, omega, zeta });
    }
    Ok(traj)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-=".contains(c) { c } else { '_' })
        .collect()
}

pub fn cmd_sweep(config: &Path, vary: &[String], jobs: usize) -> i32 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => return fail(&Error::validation("--config", format!("{}: {e}", config.display()))),
    };
    let base = match parse_table(&text) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let base_cfg = match RunConfig::from_table(&base) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let mut axes: Vec<(String, Vec<String>)> = Vec::new();
    for v in vary {
        let Some((key, values)) = v.split_once('=') else {
            return fail(&Error::validation("--vary", format!("`{v}` is not key=v1,v2,...")));
        };
        let values: Vec<String> = values.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        if values.is_empty() {
            return fail(&Error::validation("--vary", format!("no values for `{key}`")));
        }
        axes.push((key.trim().to_string(), values));
    }
    // cartesian product in the order given
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    let root = base_cfg.output_dir();
    if let Err(e) = prepare_dir(&root) {
        return fail(&e);
    }
    let mut children = Vec::new();
    for combo in &combos {
        let mut table = base.clone();
        for (k, v) in combo {
            if let Err(e) = set_override(&mut table, k, v) {
                return fail(&e);
            }
        }
        let label = sanitize(&combo.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(","));
        let dir = root.join(&label);
        let cfg = match RunConfig::from_table(&table) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        };
        if let Err(e) = prepare_dir(&dir) {
            return fail(&e);
        }
        let path = dir.join("input.toml");
        if let Err(e) = write_file(&path, cfg.dump().as_bytes()) {
            return fail(&e);
        }
        children.push((label, dir, path));
    }
    let exe = match std::env::current_exe() {
        Ok(p) => p,
        Err(e) => return fail(&Error::Io(e)),
    };
    let jobs = jobs.max(1);
    let mut codes = vec![0; children.len()];
    let mut running: Vec<(usize, std::process::Child)> = Vec::new();
    let mut next = 0;
    while next < children.len() || !running.is_empty() {
        while running.len() < jobs && next < children.len() {
            let (_, dir, path) = &children[next];
            match Command::new(&exe)
                .arg("run")
                .arg("--config")
                .arg(path)
                .env("MEANVORT_OUT", dir)
                .spawn()
            {
                Ok(c) => running.push((next, c)),
                Err(e) => return fail(&Error::Io(e)),
            }
            next += 1;
        }
        // wait for the oldest child; keeps the bookkeeping simple
        let (i, mut child) = running.remove(0);
        codes[i] = match child.wait() {
            Ok(s) => s.code().unwrap_or(EXIT_SOLVER),
            Err(_) => EXIT_SOLVER,
        };
    }
    let mut summary = String::from("label,exit_code\n");
    for ((label, _, _), code) in children.iter().zip(&codes) {
        summary.push_str(&format!("{label},{code}\n"));
    }
    if let Err(e) = write_file(&root.join("sweep.csv"), summary.as_bytes()) {
        return fail(&e);
    }
    codes.into_iter().max().unwrap_or(EXIT_OK)
}
