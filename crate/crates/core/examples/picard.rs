//! Picard iteration for short times; successive iterates should contract.

use meanvort::evolution::{initial_state, picard_local, run, RunSetup, StepOptions};
use meanvort::fields::{gaussian_bump, make_pinning, random_smooth, Grid2D, ModelParams, VectorField};

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(64, 8.0)?;
    let pin = make_pinning(random_smooth(grid, 2, 0.3, 4))?;
    let psi = VectorField::zeros(grid);
    let omega = gaussian_bump(grid, 0.6, grid.center());
    let omega = omega.scale(1.0 / omega.integral());
    let params = ModelParams::compressible(1.0, 0.0, 0.5);
    let opts = StepOptions::default();
    let initial = initial_state(omega, random_smooth(grid, 3, 0.2, 11), &pin, &params, &opts)?;
    let (limit, report) = picard_local(&initial, &pin, &psi, &params, 0.1, 15, &opts)?;
    for (k, d) in report.sup_diffs.iter().enumerate() {
        println!("iterate {:2}  sup |v_(n+1) - v_n| = {d:.3e}", k + 1);
    }
    let traj = run(&RunSetup { initial, pin, psi, params, t_end: 0.1, opts, snapshot_stride: 1 })?;
    let a = &limit.last().v;
    let b = &traj.last().v;
    println!("Picard limit vs time stepper: {:.3e}", a.sub(b).l2_norm() / b.l2_norm());
    Ok(())
}
