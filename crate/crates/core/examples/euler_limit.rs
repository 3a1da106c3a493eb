//! With alpha = 0 and a radial vorticity the flow is a steady Euler vortex;
//! the vorticity should barely move.

use meanvort::evolution::{initial_state, run, RunSetup, StepOptions};
use meanvort::fields::{preset_initial, Grid2D, InitialPreset, ModelParams, PinningProfile, VectorField};

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(128, 8.0)?;
    let preset = InitialPreset::Gaussian { amplitude: 1.0, sigma: 0.5, center: grid.center() };
    let (omega, zeta) = preset_initial(&preset, grid, true)?;
    let pin = PinningProfile::flat(grid);
    let params = ModelParams::incompressible(0.0, 1.0);
    let opts = StepOptions::default();
    let initial = initial_state(omega.clone(), zeta, &pin, &params, &opts)?;
    let traj = run(&RunSetup {
        initial,
        pin,
        psi: VectorField::zeros(grid),
        params,
        t_end: 1.0,
        opts,
        snapshot_stride: 1000,
    })?;
    let change = traj.last().omega.sub(&omega).max_abs() / omega.max_abs();
    println!("{} steps, relative change at t = 1: {change:.3e}", traj.records.len() - 1);
    Ok(())
}
