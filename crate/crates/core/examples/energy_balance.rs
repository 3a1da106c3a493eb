//! Energy balance for the compressible regime with pinning and forcing.

use meanvort::diagnostics::{energy, energy_identity_residual, EnergyReference};
use meanvort::evolution::{initial_state, run, RunSetup, StepOptions};
use meanvort::fields::{gaussian_bump, make_pinning, random_smooth, Grid2D, ModelParams, VectorField};

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(64, 8.0)?;
    let k = 2.0 * std::f64::consts::PI / grid.l();
    let pin = make_pinning(random_smooth(grid, 2, 0.3, 4))?;
    let psi = VectorField::from_fn(grid, |x, y| [0.2 * (k * y).sin(), 0.1 * (k * x).cos()]);
    let omega = gaussian_bump(grid, 0.6, grid.center());
    let omega = omega.scale(1.0 / omega.integral());
    let zeta = random_smooth(grid, 3, 1.0, 11);
    let params = ModelParams::compressible(1.0, 0.0, 0.5);
    let opts = StepOptions::default();
    let initial = initial_state(omega, zeta, &pin, &params, &opts)?;
    let traj = run(&RunSetup { initial, pin: pin.clone(), psi: psi.clone(), params, t_end: 0.5, opts, snapshot_stride: 1 })?;
    let reference = EnergyReference::zero(grid);
    let res = energy_identity_residual(&traj, &pin, &psi, &params, &reference)?;
    for ((t, r), s) in res.iter().zip(&traj.snapshots[1..]).step_by(4) {
        println!("t = {t:.4}  E = {:.6}  residual {r:.2e}", energy(s, &pin, &reference));
    }
    Ok(())
}
