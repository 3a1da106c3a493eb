//! Drive a run from a configuration string, the way the binary does, and
//! print the diagnostics CSV.

use meanvort::config::RunConfig;
use meanvort::diagnostics::{diagnostics_rows, write_csv, DiagOptions};
use meanvort::evolution::{initial_state, run, RunSetup};

const CONFIG: &str = r#"
seed = 3

[grid]
n = 64
l = 8.0

[params]
alpha = 1.0
beta = 0.3

[pinning]
preset = "random"
amplitude = 0.2

[initial]
preset = "ring"

[time]
T = 0.5
snapshot_stride = 5
"#;

fn main() -> meanvort::Result<()> {
    let cfg = RunConfig::parse_str(CONFIG)?;
    let pin = cfg.pinning_profile()?;
    let psi = cfg.forcing_field(&pin)?;
    let (omega, zeta) = cfg.initial_fields()?;
    let params = cfg.model_params();
    let opts = cfg.step_options();
    let initial = initial_state(omega, zeta, &pin, &params, &opts)?;
    let traj = run(&RunSetup {
        initial,
        pin: pin.clone(),
        psi: psi.clone(),
        params,
        t_end: cfg.time.t_end,
        opts,
        snapshot_stride: cfg.time.snapshot_stride,
    })?;
    let rows = diagnostics_rows(&traj, &pin, &psi, &params, &DiagOptions::default());
    write_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}
