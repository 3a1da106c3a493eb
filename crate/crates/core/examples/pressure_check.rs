//! Pressure recovered from a state and checked against the momentum form.

use meanvort::diagnostics::pressure_consistency;
use meanvort::elliptic::{pressure, reconstruct_velocity, EllipticOptions};
use meanvort::fields::{gaussian_bump, make_pinning, random_smooth, Grid2D, ModelParams, ScalarField, State, VectorField};

fn main() -> meanvort::Result<()> {
    let opts = EllipticOptions::default();
    for n in [64, 128, 256] {
        let grid = Grid2D::new(n, 8.0)?;
        let pin = make_pinning(random_smooth(grid, 2, 0.3, 4))?;
        let psi = VectorField::from_fn(grid, |_, y| [0.1 * (0.785 * y).sin(), 0.0]);
        let omega = gaussian_bump(grid, 0.7, grid.center());
        let zeta = ScalarField::zeros(grid);
        let (v, _) = reconstruct_velocity(&omega, &zeta, &pin, &opts)?;
        let params = ModelParams::incompressible(1.0, 0.5);
        let state = State { t: 0.0, omega, zeta, v };
        let (p, _) = pressure(&state.omega, &state.v, &pin, &psi, &params, &opts)?;
        let rel = pressure_consistency(&state, &pin, &psi, &params, &opts)?;
        println!("n = {n:4}  P in [{:.4}, {:.4}]  relative mismatch {rel:.2e}", p.min(), p.max());
    }
    Ok(())
}
