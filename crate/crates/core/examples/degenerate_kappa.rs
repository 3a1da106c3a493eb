//! The explicit solver for the degenerate regime: first the constant-f case
//! with its closed form, then a full velocity field at a few times.

use meanvort::degenerate::{degenerate_solutions, kappa_fields, DegenerateNumerics, DegenerateSetup, Interpolation};
use meanvort::elliptic::{reconstruct_velocity, EllipticOptions};
use meanvort::fields::{gaussian_bump, random_smooth, Grid2D, PinningProfile, ScalarField, VectorField};

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(32, 6.0)?;
    let w = VectorField::from_components(random_smooth(grid, 3, 0.8, 1), random_smooth(grid, 3, 0.8, 2))?;
    let f0 = 2.0;
    let setup = DegenerateSetup::from_fields(w, ScalarField::constant(grid, f0), ScalarField::zeros(grid), Interpolation::Bicubic)?;
    let times = [0.0, 0.5, 1.0, 2.0, 4.0];
    for (t, k) in times.iter().zip(kappa_fields(&setup, &times, None)?) {
        let exact = 1.0 / (1.0 + f0 * t);
        let err = k.data().iter().map(|x| (x - exact).abs()).fold(0.0, f64::max);
        println!("t = {t:3.1}  kappa = {:.6}  closed form {exact:.6}  err {err:.1e}", k.mean());
    }

    let grid = Grid2D::new(64, 8.0)?;
    let omega = gaussian_bump(grid, 0.7, grid.center());
    let omega = omega.scale(1.0 / omega.integral());
    let pin = PinningProfile::flat(grid);
    let (v0, _) = reconstruct_velocity(&omega, &ScalarField::zeros(grid), &pin, &EllipticOptions::default())?;
    let numerics = DegenerateNumerics { background: omega.mean(), ..DegenerateNumerics::default() };
    let times = [0.25, 0.5, 1.0];
    for (t, (v, kappa)) in times.iter().zip(degenerate_solutions(&v0, &VectorField::zeros(grid), &times, &numerics)?) {
        println!("t = {t:4.2}  |v|inf = {:.5}  kappa in [{:.4}, {:.4}]", v.max_norm(), kappa.min(), kappa.max());
    }
    Ok(())
}
