//! Uniform vortex patch under the incompressible flow with beta = 0. The
//! peak should follow c / (1 + alpha c t).

use meanvort::diagnostics::{lp_norm, universal_bound};
use meanvort::evolution::{initial_state, run, RunSetup, StepOptions};
use meanvort::fields::{preset_initial, Grid2D, InitialPreset, ModelParams, PinningProfile, VectorField};

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(128, 8.0)?;
    let c = 4.0;
    let r = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    let preset = InitialPreset::UniformPatch { c, r, center: grid.center(), ramp: 0.0 };
    let (omega, zeta) = preset_initial(&preset, grid, false)?;
    let pin = PinningProfile::flat(grid);
    let params = ModelParams::incompressible(1.0, 0.0);
    let opts = StepOptions::default();
    let initial = initial_state(omega, zeta, &pin, &params, &opts)?;
    let traj = run(&RunSetup {
        initial,
        pin,
        psi: VectorField::zeros(grid),
        params,
        t_end: 2.0,
        opts,
        snapshot_stride: 10,
    })?;
    println!("{:>6} {:>10} {:>10} {:>8} {:>10} {:>10}", "t", "max w", "c/(1+ct)", "ratio", "|w|_2", "bound");
    for s in &traj.snapshots {
        let exact = c / (1.0 + c * s.t);
        let bound = if s.t > 0.0 { universal_bound(1.0, s.t, 2.0) } else { f64::INFINITY };
        println!(
            "{:6.3} {:10.5} {:10.5} {:8.4} {:10.5} {:10.5}",
            s.t,
            s.omega.max(),
            exact,
            s.omega.max() / exact,
            lp_norm(&s.omega, 2.0),
            bound
        );
    }
    Ok(())
}
