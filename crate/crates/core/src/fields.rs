//! Grid, field containers, spectral calculus, pinning data and initial
//! vorticity presets.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Allowed vorticity undershoot after limiting.
pub const TOL_POS: f64 = 1e-12;

/// Uniform periodic `n x n` grid on a square box of side `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= 8"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("l = {l} must be positive")));
        }
        Ok(Grid2D { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Flat index of node `(i, j)`; `i` runs along x.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let dx = self.dx();
        [i as f64 * dx, j as f64 * dx]
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * self.l, 0.5 * self.l]
    }

    /// Minimum-image displacement `x - c` on the torus.
    #[inline]
    pub fn displacement(&self, x: [f64; 2], c: [f64; 2]) -> [f64; 2] {
        let wrap = |d: f64| d - self.l * (d / self.l).round();
        [wrap(x[0] - c[0]), wrap(x[1] - c[1])]
    }

    fn check(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        ScalarField {
            grid,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(ScalarField { grid, data })
    }

    pub(crate) fn from_raw(grid: Grid2D, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        ScalarField { grid, data }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let [x, y] = grid.point(i, j);
                data.push(f(x, y));
            }
        }
        ScalarField { grid, data }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.index(i, j)]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Box integral `sum * dx^2`.
    pub fn integral(&self) -> f64 {
        self.sum() * self.grid.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Continuous L2 norm on the box.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        ScalarField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }

    pub fn offset(&self, c: f64) -> Self {
        self.map(|x| x + c)
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }
}

/// Two component planes on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        VectorField {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn from_components(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.grid.check(&y.grid)?;
        Ok(VectorField {
            grid: x.grid,
            x: x.data,
            y: y.data,
        })
    }

    pub(crate) fn from_raw(grid: Grid2D, x: Vec<f64>, y: Vec<f64>) -> Self {
        debug_assert!(x.len() == grid.len() && y.len() == grid.len());
        VectorField { grid, x, y }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = VectorField::zeros(grid);
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let [x, y] = grid.point(i, j);
                let [a, b] = f(x, y);
                let k = grid.index(i, j);
                out.x[k] = a;
                out.y[k] = b;
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn component_x(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.x.clone())
    }

    pub fn component_y(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.y.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn add(&self, o: &VectorField) -> Self {
        assert_eq!(self.grid, o.grid, "grid mismatch");
        VectorField {
            grid: self.grid,
            x: self.x.iter().zip(&o.x).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&o.y).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &VectorField) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        VectorField {
            grid: self.grid,
            x: self.x.iter().map(|a| s * a).collect(),
            y: self.y.iter().map(|a| s * a).collect(),
        }
    }

    /// Pointwise product with a scalar field.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        assert_eq!(self.grid, s.grid, "grid mismatch");
        VectorField {
            grid: self.grid,
            x: self.x.iter().zip(&s.data).map(|(a, b)| a * b).collect(),
            y: self.y.iter().zip(&s.data).map(|(a, b)| a * b).collect(),
        }
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, other: &VectorField, b: f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        VectorField {
            grid: self.grid,
            x: self.x.iter().zip(&other.x).map(|(p, q)| a * p + b * q).collect(),
            y: self.y.iter().zip(&other.y).map(|(p, q)| a * p + b * q).collect(),
        }
    }

    /// Pointwise `|v|^2`.
    pub fn norm_sq(&self) -> ScalarField {
        ScalarField::from_raw(
            self.grid,
            self.x.iter().zip(&self.y).map(|(a, b)| a * a + b * b).collect(),
        )
    }

    /// Pointwise dot product.
    pub fn dot(&self, o: &VectorField) -> ScalarField {
        ScalarField::from_raw(
            self.grid,
            (0..self.grid.len())
                .map(|k| self.x[k] * o.x[k] + self.y[k] * o.y[k])
                .collect(),
        )
    }

    pub fn max_norm(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .fold(0.0, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    /// `max|v_x| + max|v_y|`, the speed entering the transport CFL bound.
    pub fn cfl_speed(&self) -> f64 {
        let mx = self.x.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let my = self.y.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        mx + my
    }

    /// Continuous L2 norm.
    pub fn l2_norm(&self) -> f64 {
        (self.x.iter().chain(&self.y).map(|a| a * a).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn mean(&self) -> [f64; 2] {
        let n = self.grid.len() as f64;
        [self.x.iter().sum::<f64>() / n, self.y.iter().sum::<f64>() / n]
    }
}

/// Four component planes; `xy` is row x, column y.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid2D,
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yx: Vec<f64>,
    pub yy: Vec<f64>,
    symmetric: bool,
}

impl TensorField {
    /// Stress-energy tensor `v ⊗ v - ½ Id |v|^2`.
    pub fn stress_energy(v: &VectorField) -> Self {
        let len = v.grid.len();
        let mut t = TensorField {
            grid: v.grid,
            xx: vec![0.0; len],
            xy: vec![0.0; len],
            yx: vec![0.0; len],
            yy: vec![0.0; len],
            symmetric: true,
        };
        for k in 0..len {
            let (a, b) = (v.x[k], v.y[k]);
            let half = 0.5 * (a * a + b * b);
            t.xx[k] = a * a - half;
            t.xy[k] = a * b;
            t.yx[k] = a * b;
            t.yy[k] = b * b - half;
        }
        t
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn scale_by(&self, s: &ScalarField) -> Self {
        let m = |p: &Vec<f64>| p.iter().zip(s.data()).map(|(a, b)| a * b).collect();
        TensorField {
            grid: self.grid,
            xx: m(&self.xx),
            xy: m(&self.xy),
            yx: m(&self.yx),
            yy: m(&self.yy),
            symmetric: self.symmetric,
        }
    }

    /// Row-wise divergence `(div T)_i = ∂_j T_ij`.
    pub fn div_rows(&self) -> VectorField {
        let sp = Spectral::new(&self.grid);
        let dx = sp.divergence(&self.xx, &self.xy);
        let dy = sp.divergence(&self.yx, &self.yy);
        VectorField::from_raw(self.grid, dx, dy)
    }
}

/// `∂₁v₂ − ∂₂v₁`, spectral.
pub fn curl(v: &VectorField) -> ScalarField {
    let sp = Spectral::new(&v.grid);
    ScalarField::from_raw(v.grid, sp.curl(&v.x, &v.y))
}

/// `∂₁v₁ + ∂₂v₂`, spectral.
pub fn div(v: &VectorField) -> ScalarField {
    let sp = Spectral::new(&v.grid);
    ScalarField::from_raw(v.grid, sp.divergence(&v.x, &v.y))
}

pub fn grad(s: &ScalarField) -> VectorField {
    let sp = Spectral::new(&s.grid);
    let (gx, gy) = sp.gradient(&s.data);
    VectorField::from_raw(s.grid, gx, gy)
}

/// `(−v₂, v₁)`.
pub fn perp(v: &VectorField) -> VectorField {
    VectorField {
        grid: v.grid,
        x: v.y.iter().map(|a| -a).collect(),
        y: v.x.clone(),
    }
}

pub fn laplacian(s: &ScalarField) -> ScalarField {
    let sp = Spectral::new(&s.grid);
    ScalarField::from_raw(s.grid, sp.laplacian(&s.data))
}

/// Pinning potential `h` with weight `a = e^h`, `1/a` and `∇h`.
#[derive(Debug, Clone)]
pub struct PinningProfile {
    pub h: ScalarField,
    pub a: ScalarField,
    pub a_inv: ScalarField,
    pub grad_h: VectorField,
}

pub const MAX_PINNING_AMPLITUDE: f64 = 500.0;

pub fn make_pinning(h: ScalarField) -> Result<PinningProfile> {
    if !h.is_finite() {
        return Err(Error::NonFinite("pinning potential"));
    }
    let max_h = h.max_abs();
    if max_h > MAX_PINNING_AMPLITUDE {
        return Err(Error::PinningOverflow { max_h });
    }
    let a = h.map(f64::exp);
    let a_inv = h.map(|x| (-x).exp());
    let grad_h = grad(&h);
    Ok(PinningProfile { h, a, a_inv, grad_h })
}

impl PinningProfile {
    pub fn flat(grid: Grid2D) -> Self {
        PinningProfile {
            h: ScalarField::zeros(grid),
            a: ScalarField::constant(grid, 1.0),
            a_inv: ScalarField::constant(grid, 1.0),
            grad_h: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.h.grid()
    }

    /// True when `h` is identically zero.
    pub fn is_flat(&self) -> bool {
        self.h.data().iter().all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Incompressible,
    Compressible,
    DegenerateParabolic,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Incompressible => "incompressible",
            Regime::Compressible => "compressible",
            Regime::DegenerateParabolic => "degenerate_parabolic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "incompressible" => Some(Regime::Incompressible),
            "compressible" => Some(Regime::Compressible),
            "degenerate_parabolic" => Some(Regime::DegenerateParabolic),
            _ => None,
        }
    }

    /// Whether `zeta` is evolved.
    pub fn evolves_zeta(&self) -> bool {
        !matches!(self, Regime::Incompressible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub regime: Regime,
}

impl ModelParams {
    pub fn incompressible(alpha: f64, beta: f64) -> Self {
        ModelParams {
            alpha,
            beta,
            lambda: 0.0,
            regime: Regime::Incompressible,
        }
    }

    pub fn compressible(alpha: f64, beta: f64, lambda: f64) -> Self {
        ModelParams {
            alpha,
            beta,
            lambda,
            regime: Regime::Compressible,
        }
    }

    pub fn degenerate(alpha: f64) -> Self {
        ModelParams {
            alpha,
            beta: 0.0,
            lambda: 0.0,
            regime: Regime::DegenerateParabolic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be >= 0",
                self.lambda
            )));
        }
        if self.regime == Regime::DegenerateParabolic {
            if self.lambda != 0.0 || self.beta != 0.0 {
                return Err(Error::InvalidParameter(
                    "degenerate parabolic regime requires lambda = beta = 0".into(),
                ));
            }
            if self.alpha <= 0.0 {
                return Err(Error::InvalidParameter(
                    "degenerate parabolic regime requires alpha > 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Diffusion coefficient acting on `zeta` (zero unless compressible).
    pub fn effective_lambda(&self) -> f64 {
        match self.regime {
            Regime::Compressible => self.lambda,
            _ => 0.0,
        }
    }

    /// `β = 0` and `α > 0`.
    pub fn is_parabolic(&self) -> bool {
        self.beta == 0.0 && self.alpha > 0.0
    }
}

/// Time `t` with supercurrent `v`, vorticity `omega` and weighted divergence `zeta`.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub v: VectorField,
    pub omega: ScalarField,
    pub zeta: ScalarField,
}

impl State {
    pub fn grid(&self) -> &Grid2D {
        self.omega.grid()
    }
}

// ---------------------------------------------------------------------------
// presets

/// C∞ step from 0 (x ≤ 0) to 1 (x ≥ 1).
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Cutoff equal to 1 inside radius l/8 and 0 beyond l/4.
fn box_cutoff(rho: f64, l: f64) -> f64 {
    1.0 - smooth_step((rho - l / 8.0) / (l / 8.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPreset {
    Zero,
    /// Amplitude `c` on a disc of radius `r`, edge mollified over `ramp`
    /// (at least `4 dx`).
    UniformPatch {
        c: f64,
        r: f64,
        center: [f64; 2],
        ramp: f64,
    },
    Gaussian {
        amplitude: f64,
        sigma: f64,
        center: [f64; 2],
    },
    MollifiedRing {
        amplitude: f64,
        radius: f64,
        width: f64,
        center: [f64; 2],
    },
}

impl InitialPreset {
    pub fn name(&self) -> &'static str {
        match self {
            InitialPreset::Zero => "zero",
            InitialPreset::UniformPatch { .. } => "uniform_patch",
            InitialPreset::Gaussian { .. } => "gaussian",
            InitialPreset::MollifiedRing { .. } => "mollified_ring",
        }
    }
}

/// Builds `(omega0, zeta0)`; `zeta0` is zero for every preset.
pub fn preset_initial(
    preset: &InitialPreset,
    grid: Grid2D,
    normalize: bool,
) -> Result<(ScalarField, ScalarField)> {
    let l = grid.l();
    let omega = match *preset {
        InitialPreset::Zero => ScalarField::zeros(grid),
        InitialPreset::UniformPatch { c, r, center, ramp } => {
            if r >= l / 4.0 {
                return Err(Error::PatchTooLarge {
                    radius: r,
                    limit: l / 4.0,
                });
            }
            if !(c >= 0.0 && r > 0.0) {
                return Err(Error::InvalidParameter(
                    "patch needs c >= 0 and r > 0".into(),
                ));
            }
            let w = ramp.max(4.0 * grid.dx());
            ScalarField::from_fn(grid, |x, y| {
                let d = grid.displacement([x, y], center);
                let rho = d[0].hypot(d[1]);
                c * (1.0 - smooth_step((rho - (r - 0.5 * w)) / w)) * box_cutoff(rho, l)
            })
        }
        InitialPreset::Gaussian {
            amplitude,
            sigma,
            center,
        } => {
            if !(amplitude >= 0.0 && sigma > 0.0) {
                return Err(Error::InvalidParameter(
                    "gaussian needs amplitude >= 0 and sigma > 0".into(),
                ));
            }
            ScalarField::from_fn(grid, |x, y| {
                let d = grid.displacement([x, y], center);
                let rho2 = d[0] * d[0] + d[1] * d[1];
                amplitude * (-rho2 / (2.0 * sigma * sigma)).exp() * box_cutoff(rho2.sqrt(), l)
            })
        }
        InitialPreset::MollifiedRing {
            amplitude,
            radius,
            width,
            center,
        } => {
            if !(amplitude >= 0.0 && width > 0.0 && radius > 0.0) {
                return Err(Error::InvalidParameter(
                    "ring needs amplitude >= 0, radius > 0, width > 0".into(),
                ));
            }
            if radius >= l / 4.0 {
                return Err(Error::PatchTooLarge {
                    radius,
                    limit: l / 4.0,
                });
            }
            ScalarField::from_fn(grid, |x, y| {
                let d = grid.displacement([x, y], center);
                let rho = d[0].hypot(d[1]);
                let s = (rho - radius) / width;
                amplitude * (-0.5 * s * s).exp() * box_cutoff(rho, l)
            })
        }
    };
    let omega = if normalize {
        let mass = omega.integral();
        if mass > 0.0 {
            omega.scale(1.0 / mass)
        } else {
            omega
        }
    } else {
        omega
    };
    Ok((omega, ScalarField::zeros(grid)))
}

/// Gaussian bump `exp(-|x-c|²/2σ²)` with the box cutoff applied.
pub fn gaussian_bump(grid: Grid2D, sigma: f64, center: [f64; 2]) -> ScalarField {
    let l = grid.l();
    ScalarField::from_fn(grid, |x, y| {
        let d = grid.displacement([x, y], center);
        let rho2 = d[0] * d[0] + d[1] * d[1];
        (-rho2 / (2.0 * sigma * sigma)).exp() * box_cutoff(rho2.sqrt(), l)
    })
}

/// Random trigonometric field with wavenumbers `|m| <= modes` per axis,
/// amplitudes decaying like `1/(1+|m|²)`, scaled to `max|h| = amplitude`.
pub fn random_smooth(grid: Grid2D, modes: usize, amplitude: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 2.0 * PI / grid.l();
    let m = modes as i64;
    let mut terms = Vec::new();
    for mx in -m..=m {
        for my in 0..=m {
            if my == 0 && mx <= 0 {
                continue;
            }
            let decay = 1.0 / (1.0 + (mx * mx + my * my) as f64);
            let a: f64 = rng.random_range(-1.0..1.0) * decay;
            let b: f64 = rng.random_range(-1.0..1.0) * decay;
            terms.push((mx as f64 * base, my as f64 * base, a, b));
        }
    }
    let raw = ScalarField::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(kx, ky, a, b)| {
                let ph = kx * x + ky * y;
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    });
    let peak = raw.max_abs();
    if peak > 0.0 {
        raw.scale(amplitude / peak)
    } else {
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid2D::new(4, 1.0).is_err());
        assert!(Grid2D::new(24, 1.0).is_err());
        assert!(Grid2D::new(16, 0.0).is_err());
        assert!(Grid2D::new(16, 1.0).is_ok());
    }

    #[test]
    fn curl_of_rotating_eigenmode() {
        let g = Grid2D::new(32, 3.0).unwrap();
        let k = 2.0 * PI / 3.0;
        let v = VectorField::from_fn(g, |x, y| [-(k * y).sin(), (k * x).sin()]);
        let c = curl(&v);
        let want = ScalarField::from_fn(g, |x, y| k * ((k * x).cos() + (k * y).cos()));
        assert!(c.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_field_is_curl_free() {
        let g = grid(32);
        let phi = random_smooth(g, 5, 1.0, 3);
        assert!(curl(&grad(&phi)).max_abs() < 1e-10);
    }

    #[test]
    fn perp_twice_negates() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |x, y| [x.sin() * y, y.cos() + x]);
        assert_eq!(perp(&perp(&v)), v.scale(-1.0));
    }

    #[test]
    fn div_perp_grad_vanishes() {
        let g = grid(32);
        let s = random_smooth(g, 6, 2.0, 11);
        assert!(div(&perp(&grad(&s))).max_abs() < 1e-10);
    }

    #[test]
    fn grad_of_sine() {
        let g = Grid2D::new(16, 5.0).unwrap();
        let k = 2.0 * PI / 5.0;
        let s = ScalarField::from_fn(g, |x, _| (k * x).sin());
        let gr = grad(&s);
        for j in 0..16 {
            for i in 0..16 {
                let [x, _] = g.point(i, j);
                let idx = g.index(i, j);
                assert!((gr.x[idx] - k * (k * x).cos()).abs() < 1e-12);
                assert!(gr.y[idx].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_annihilate_constants() {
        let g = grid(16);
        let s = ScalarField::constant(g, 3.7);
        assert!(grad(&s).max_norm() < 1e-12);
        let v = VectorField::from_fn(g, |_, _| [1.5, -2.0]);
        assert!(div(&v).max_abs() < 1e-12);
        assert!(curl(&v).max_abs() < 1e-12);
    }

    #[test]
    fn spectral_exact_on_sampled_modes() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let base = 2.0 * PI / 4.0;
        let modes = [(1, 0), (0, 1), (2, 3), (5, -4), (7, 7), (15, 1), (-9, 12), (3, -15)];
        for &(mx, my) in &modes {
            let (kx, ky) = (mx as f64 * base, my as f64 * base);
            let s = ScalarField::from_fn(g, |x, y| (kx * x + ky * y).sin());
            let gr = grad(&s);
            let want = ScalarField::from_fn(g, |x, y| (kx * x + ky * y).cos());
            assert!(gr.component_x().sub(&want.scale(kx)).max_abs() < 1e-12 * (1.0 + kx.abs()));
            assert!(gr.component_y().sub(&want.scale(ky)).max_abs() < 1e-12 * (1.0 + ky.abs()));
        }
    }

    #[test]
    fn curl_matches_centered_differences() {
        // band-limited field: spectral curl against second-order differences
        let errs: Vec<f64> = [32usize, 64]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let v = VectorField::from_fn(g, |x, y| {
                    [(x + 2.0 * y).sin() + 0.3 * (3.0 * y).cos(), (2.0 * x - y).cos()]
                });
                let c = curl(&v);
                let dx = g.dx();
                let mut err: f64 = 0.0;
                for j in 0..n {
                    for i in 0..n {
                        let ip = (i + 1) % n;
                        let im = (i + n - 1) % n;
                        let jp = (j + 1) % n;
                        let jm = (j + n - 1) % n;
                        let fd = (v.y[g.index(ip, j)] - v.y[g.index(im, j)]) / (2.0 * dx)
                            - (v.x[g.index(i, jp)] - v.x[g.index(i, jm)]) / (2.0 * dx);
                        err = err.max((fd - c.at(i, j)).abs());
                    }
                }
                err
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn flat_pinning() {
        let g = grid(16);
        let p = make_pinning(ScalarField::zeros(g)).unwrap();
        assert!(p.a.data().iter().all(|&x| x == 1.0));
        assert!(p.grad_h.max_norm() == 0.0);
        assert!(p.is_flat());
    }

    #[test]
    fn cosine_pinning_gradient() {
        let g = Grid2D::new(32, 6.0).unwrap();
        let k = 2.0 * PI / 6.0;
        let eps = 0.3;
        let p = make_pinning(ScalarField::from_fn(g, |x, _| eps * (k * x).cos())).unwrap();
        let want = ScalarField::from_fn(g, |x, _| -eps * k * (k * x).sin());
        assert!(p.grad_h.component_x().sub(&want).max_abs() < 1e-12);
        assert!(p.grad_h.component_y().max_abs() < 1e-12);
    }

    #[test]
    fn pinning_inverse_and_log() {
        let g = grid(32);
        let h = random_smooth(g, 4, 2.0, 5);
        let p = make_pinning(h.clone()).unwrap();
        assert!(p.a.mul(&p.a_inv).offset(-1.0).max_abs() <= 1e-12);
        assert!(p.a.map(f64::ln).sub(&h).max_abs() <= 1e-12);
    }

    #[test]
    fn pinning_overflow_rejected() {
        let g = grid(16);
        let err = make_pinning(ScalarField::constant(g, 501.0)).unwrap_err();
        assert!(matches!(err, Error::PinningOverflow { .. }));
    }

    #[test]
    fn zero_preset() {
        let g = grid(16);
        let (w, z) = preset_initial(&InitialPreset::Zero, g, true).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn normalized_patch_has_unit_mass() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let p = InitialPreset::UniformPatch {
            c: 1.0 / PI,
            r: 1.0,
            center: g.center(),
            ramp: 0.0,
        };
        let (w, _) = preset_initial(&p, g, true).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-10);
        assert!(w.min() >= 0.0);
    }

    #[test]
    fn oversized_patch_rejected() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let p = InitialPreset::UniformPatch {
            c: 1.0,
            r: 1.0,
            center: g.center(),
            ramp: 0.0,
        };
        assert!(matches!(
            preset_initial(&p, g, false),
            Err(Error::PatchTooLarge { .. })
        ));
    }

    #[test]
    fn gaussian_peaks_at_center_and_decreases() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let c = g.center();
        let p = InitialPreset::Gaussian {
            amplitude: 1.0,
            sigma: 0.5,
            center: c,
        };
        let (w, _) = preset_initial(&p, g, false).unwrap();
        let mid = g.n() / 2;
        assert_eq!(w.max(), w.at(mid, mid));
        for i in mid..g.n() - 1 {
            assert!(w.at(i + 1, mid) <= w.at(i, mid));
        }
    }

    #[test]
    fn stress_energy_is_symmetric_and_traceless() {
        let g = grid(16);
        let v = VectorField::from_fn(g, |x, y| [x.sin(), y.cos() * 2.0]);
        let t = TensorField::stress_energy(&v);
        assert!(t.is_symmetric());
        for k in 0..g.len() {
            assert_eq!(t.xy[k], t.yx[k]);
            assert!((t.xx[k] + t.yy[k]).abs() < 1e-14);
        }
    }
}
