use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use meanvort::diagnostics::{read_csv, CSV_HEADER};
use meanvort::fields::ScalarField;
use meanvort::snapshot::Snapshot;

fn meanvort(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meanvort"))
        .args(args)
        .env("MEANVORT_OUT", out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PATCH: &str = "grid.n = 32\ninitial.preset = \"patch\"\ninitial.radius = 0.5\ninitial.normalize = false\ntime.T = 0.4\ntime.snapshot_stride = 3\n";

#[test]
fn zero_horizon_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "grid.n = 16\ntime.T = 0.0\n");
    let out = tmp.path().join("o");
    let r = meanvort(&["run", "--config", &cfg], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    let snaps: Vec<_> = fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 3);
    assert!(out.join("snapshots/omega_00000.mvf").is_file());
    assert!(out.join("manifest.txt").is_file());
}

#[test]
fn repeated_runs_are_byte_identical_and_check_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", PATCH);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(meanvort(&["run", "--config", &cfg], &a).status.code(), Some(0));
    assert_eq!(meanvort(&["run", "--config", &cfg], &b).status.code(), Some(0));
    let ca = fs::read(a.join("diagnostics.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("diagnostics.csv")).unwrap());
    let rows = read_csv(std::str::from_utf8(&ca).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.margin_r44_sharp.is_finite()));
    let r = meanvort(&["check", a.to_str().unwrap()], &a);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));

    // negate one cell of the last vorticity snapshot
    let last = fs::read_dir(a.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with("omega_"))
        .max()
        .unwrap();
    let snap = Snapshot::read(&last).unwrap();
    let t = snap.t;
    let mut w: ScalarField = snap.into_scalar().unwrap();
    let k = w.data().iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
    w.data_mut()[k] = -w.data()[k];
    Snapshot::scalar(t, w).write(&last).unwrap();
    let r = meanvort(&["check", a.to_str().unwrap()], &a);
    assert_eq!(r.status.code(), Some(4));
    let table = String::from_utf8_lossy(&r.stdout);
    assert!(table.lines().any(|l| l.starts_with("positivity") && l.contains("FAIL")), "{table}");
}

#[test]
fn usage_and_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(meanvort(&["check", empty.to_str().unwrap()], &empty).status.code(), Some(2));
    let bad = write_config(tmp.path(), "bad.toml", "params.gamma = 1.0\n");
    let r = meanvort(&["run", "--config", &bad], &tmp.path().join("o"));
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("params.gamma"));
    let deg = write_config(
        tmp.path(),
        "deg.toml",
        "params.regime = \"degenerate_parabolic\"\nparams.beta = 0.1\n",
    );
    assert_eq!(meanvort(&["run", "--config", &deg], &tmp.path().join("o")).status.code(), Some(2));
    let inc = write_config(tmp.path(), "inc.toml", "grid.n = 16\n");
    assert_eq!(
        meanvort(&["degenerate", "--config", &inc], &tmp.path().join("o")).status.code(),
        Some(2)
    );
    assert_eq!(meanvort(&["frobnicate"], &tmp.path().join("o")).status.code(), Some(2));
}

#[test]
fn solver_error_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "grid.n = 16\npinning.preset = \"random\"\npinning.amplitude = 0.5\nsolver.elliptic_tol = 1e-300\ntime.T = 0.1\n",
    );
    let r = meanvort(&["run", "--config", &cfg], &tmp.path().join("o"));
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn degenerate_constant_f_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "grid.n = 16\nparams.regime = \"degenerate_parabolic\"\ndegenerate.scenario = \"constant_f\"\n\
         degenerate.f0 = 2.0\ndegenerate.times = [0.0, 1.0, 4.0]\n",
    );
    let out = tmp.path().join("o");
    let r = meanvort(&["degenerate", "--config", &cfg], &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(out.join("degenerate.csv")).unwrap();
    assert!(csv_column(&csv, "max_abs_err").iter().all(|e| *e <= 1e-6));
    assert_eq!(csv_column(&csv, "kappa_closed_form")[2], 1.0 / 9.0);
}

#[test]
fn degenerate_irrotational_data_is_unchanged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "grid.n = 16\nparams.regime = \"degenerate_parabolic\"\ninitial.preset = \"zero\"\n\
         initial.normalize = false\ninitial.zeta_amplitude = 0.5\nforcing.preset = \"current\"\nforcing.fx = 0.3\n\
         degenerate.times = [0.5, 1.0]\n",
    );
    let out = tmp.path().join("o");
    assert_eq!(meanvort(&["degenerate", "--config", &cfg], &out).status.code(), Some(0));
    let v0 = Snapshot::read(&out.join("snapshots/v0.mvf")).unwrap().into_vector().unwrap();
    assert!(v0.max_norm() > 0.1);
    for i in 0..2 {
        let v = Snapshot::read(&out.join(format!("snapshots/v_{i:05}.mvf")))
            .unwrap()
            .into_vector()
            .unwrap();
        assert!(v.sub(&v0).max_norm() <= 1e-12);
    }
}

#[test]
fn degenerate_compare_against_evolution_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.toml",
        "grid.n = 32\nparams.regime = \"degenerate_parabolic\"\ninitial.sigma = 0.7\ntime.T = 0.5\n\
         time.snapshot_stride = 1000\n",
    );
    let run = tmp.path().join("run");
    assert_eq!(meanvort(&["run", "--config", &cfg], &run).status.code(), Some(0));
    let deg = tmp.path().join("deg");
    let r = meanvort(&["degenerate", "--config", &cfg, "--compare", run.to_str().unwrap()], &deg);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(deg.join("comparison.csv")).unwrap();
    let d = csv_column(&csv, "rel_l2_v_diff");
    assert_eq!(d.len(), 1);
    assert!(d[0] < 0.02, "{d:?}");
}

#[test]
fn sweep_spawns_one_run_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "grid.n = 16\ntime.T = 0.1\n");
    let out = tmp.path().join("sweep");
    let r = meanvort(
        &["sweep", "--config", &cfg, "--vary", "params.alpha=0.5,1.0", "--jobs", "2"],
        &out,
    );
    assert_eq!(r.status.code(), Some(0));
    for label in ["params.alpha=0.5", "params.alpha=1.0"] {
        let dir = out.join(label);
        assert!(dir.join("diagnostics.csv").is_file(), "{label}");
        let dumped = fs::read_to_string(dir.join("config.toml")).unwrap();
        assert!(dumped.contains(&format!("params.alpha = {}", &label[13..])));
    }
    let summary = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}
