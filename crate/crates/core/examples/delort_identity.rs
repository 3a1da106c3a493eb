//! Residual of the weak vorticity identity on refining grids.

use meanvort::diagnostics::delort_residual;
use meanvort::elliptic::{reconstruct_velocity, EllipticOptions};
use meanvort::fields::{gaussian_bump, make_pinning, random_smooth, Grid2D, ScalarField};

fn main() -> meanvort::Result<()> {
    let mut prev: Option<f64> = None;
    for n in [32, 64, 128, 256] {
        let grid = Grid2D::new(n, 8.0)?;
        let pin = make_pinning(random_smooth(grid, 2, 0.5, 4))?;
        let omega = gaussian_bump(grid, 0.8, grid.center());
        let (v, _) = reconstruct_velocity(&omega, &ScalarField::zeros(grid), &pin, &EllipticOptions::default())?;
        let r = delort_residual(&v, &pin);
        match prev {
            Some(p) => println!("n = {n:4}  residual {r:.3e}  order {:.2}", (p / r).log2()),
            None => println!("n = {n:4}  residual {r:.3e}"),
        }
        prev = Some(r);
    }
    Ok(())
}
