//! Solve div(b grad u) = f for a random smooth coefficient and compare with
//! the manufactured solution.

use meanvort::elliptic::{apply_operator, solve_div_b_grad, EllipticOptions};
use meanvort::fields::{random_smooth, Grid2D, ScalarField};
use meanvort::spectral::Spectral;

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(128, 2.0 * std::f64::consts::PI)?;
    let sp = Spectral::new(&grid);
    let b = random_smooth(grid, 3, 1.0, 7).map(f64::exp);
    let u = random_smooth(grid, 4, 1.0, 8);
    let f = ScalarField::from_vec(grid, apply_operator(&sp, b.data(), u.data()))?;
    let (sol, report) = solve_div_b_grad(&b, &f, &EllipticOptions::default())?;
    let err = sol.sub(&u).max_abs() / u.max_abs();
    println!("b in [{:.3}, {:.3}]", b.min(), b.max());
    println!("{} iterations, residual {:.2e}, relative error {err:.2e}", report.iters, report.residual);
    Ok(())
}
