//! Write a vorticity field to an MVF1 snapshot and read it back.

use meanvort::fields::{random_smooth, Grid2D};
use meanvort::snapshot::Snapshot;

fn main() -> meanvort::Result<()> {
    let grid = Grid2D::new(32, 4.0)?;
    let omega = random_smooth(grid, 3, 1.0, 5);
    let path = std::env::temp_dir().join("meanvort_example.mvf");
    Snapshot::scalar(0.25, omega.clone()).write(&path)?;
    let back = Snapshot::read(&path)?;
    println!("{}: t = {}, n = {}, {} bytes", path.display(), back.t, back.grid().n(), std::fs::metadata(&path)?.len());
    let same = back.into_scalar().is_some_and(|w| w == omega);
    println!("round trip exact: {same}");
    Ok(())
}
