//! Explicit solver for the degenerate parabolic case `λ = β = 0`.
//!
//! The supercurrent is `v^t = −Ψ + κ^t (Ψ + v°)` where `κ` is computed node
//! by node from the characteristics of `W = (Ψ + v°)⊥` and the σ-flow
//! attached to each characteristic.
//!
//! On the torus the reconstructed `v°` has `curl v° = ω° − m` with `m` the
//! mean vortex density. Taking `f = curl v° + m` and `g = curl Ψ − m`
//! reproduces the dynamics of the evolution solver, whose transport uses
//! the full density `ω`; `m = 0` is the whole-plane convention.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{curl, perp, Grid2D, ScalarField, VectorField};

/// Time step of the RK4 integration of the σ-flow.
pub const SIGMA_STEP: f64 = 0.02;
/// Absolute tolerance of the bisection for `(σ_x^t)^{-1}(0)`.
pub const INVERT_TOL: f64 = 1e-10;
/// Relative undershoot of `curl v° + m` tolerated (and clipped) as roundoff.
pub const SIGN_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Bilinear,
    Bicubic,
}

impl Interpolation {
    pub fn name(&self) -> &'static str {
        match self {
            Interpolation::Bilinear => "bilinear",
            Interpolation::Bicubic => "bicubic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "bilinear" => Some(Interpolation::Bilinear),
            "bicubic" => Some(Interpolation::Bicubic),
            _ => None,
        }
    }
}

/// Periodic off-grid evaluation of several fields sharing one stencil.
struct Sampler<'a> {
    grid: Grid2D,
    fields: Vec<&'a [f64]>,
    kind: Interpolation,
}

#[inline]
fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

impl<'a> Sampler<'a> {
    fn sample<const K: usize>(&self, p: [f64; 2]) -> [f64; K] {
        let n = self.grid.n();
        let inv = 1.0 / self.grid.dx();
        let gx = p[0] * inv;
        let gy = p[1] * inv;
        let fx = gx.floor();
        let fy = gy.floor();
        let tx = gx - fx;
        let ty = gy - fy;
        let ni = n as i64;
        let i0 = (fx as i64).rem_euclid(ni) as usize;
        let j0 = (fy as i64).rem_euclid(ni) as usize;
        let mut out = [0.0; K];
        match self.kind {
            Interpolation::Bilinear => {
                let i1 = (i0 + 1) % n;
                let j1 = (j0 + 1) % n;
                let w = [
                    (j0 * n + i0, (1.0 - tx) * (1.0 - ty)),
                    (j0 * n + i1, tx * (1.0 - ty)),
                    (j1 * n + i0, (1.0 - tx) * ty),
                    (j1 * n + i1, tx * ty),
                ];
                for (o, f) in out.iter_mut().zip(&self.fields) {
                    *o = w.iter().map(|&(k, c)| c * f[k]).sum();
                }
            }
            Interpolation::Bicubic => {
                let wx = catmull_rom(tx);
                let wy = catmull_rom(ty);
                let ii = [(i0 + n - 1) % n, i0, (i0 + 1) % n, (i0 + 2) % n];
                for (b, &wyb) in wy.iter().enumerate() {
                    let row = ((j0 + n - 1 + b) % n) * n;
                    for (o, f) in out.iter_mut().zip(&self.fields) {
                        let r = wx[0] * f[row + ii[0]]
                            + wx[1] * f[row + ii[1]]
                            + wx[2] * f[row + ii[2]]
                            + wx[3] * f[row + ii[3]];
                        *o += wyb * r;
                    }
                }
            }
        }
        out
    }
}

/// Data of the κ construction: `W = (Ψ + v°)⊥`, `f`, `g`.
#[derive(Debug, Clone)]
pub struct DegenerateSetup {
    pub w: VectorField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub interpolation: Interpolation,
}

impl DegenerateSetup {
    /// `W = (Ψ + v°)⊥`, `f = curl v° + background`, `g = curl Ψ − background`.
    pub fn new(
        v0: &VectorField,
        psi: &VectorField,
        background: f64,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if v0.grid() != psi.grid() {
            return Err(Error::GridMismatch);
        }
        let w = perp(&psi.add(v0));
        let mut f = curl(v0).offset(background);
        // spectral ringing of the curl below zero
        let floor = -SIGN_TOL * f.max_abs().max(1.0);
        let min = f.min();
        if min < floor {
            return Err(Error::NegativeVorticity { min });
        }
        f = f.map(|x| x.max(0.0));
        let g = curl(psi).offset(-background);
        Self::from_fields(w, f, g, interpolation)
    }

    pub fn from_fields(
        w: VectorField,
        f: ScalarField,
        g: ScalarField,
        interpolation: Interpolation,
    ) -> Result<Self> {
        if w.grid() != f.grid() || f.grid() != g.grid() {
            return Err(Error::GridMismatch);
        }
        if !(w.is_finite() && f.is_finite() && g.is_finite()) {
            return Err(Error::NonFinite("degenerate setup"));
        }
        let min = f.min();
        if min < -1e-12 {
            return Err(Error::NegativeVorticity { min });
        }
        Ok(DegenerateSetup {
            w,
            f,
            g,
            interpolation,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        self.f.grid()
    }

    /// Largest characteristic step allowed, `0.1 / (1 + max|W|)`.
    pub fn max_ds(&self) -> f64 {
        0.1 / (1.0 + self.w.max_norm())
    }

    fn sampler(&self) -> Sampler<'_> {
        Sampler {
            grid: *self.grid(),
            fields: vec![&self.w.x, &self.w.y, self.f.data(), self.g.data()],
            kind: self.interpolation,
        }
    }
}

/// Characteristic `s ↦ ψ_x^s` of `−W` sampled on a uniform grid of
/// `[−S, S]`, with `f` and `g` along it and their cumulative integrals.
#[derive(Debug, Clone)]
pub struct CharCurve {
    pub x: [f64; 2],
    pub s_samples: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub f_samples: Vec<f64>,
    pub g_samples: Vec<f64>,
    ds: f64,
    /// index of s = 0
    origin: usize,
    /// `H(s) = ∫_0^s (f+g)`
    h: Vec<f64>,
    /// `F(s) = ∫_0^s f e^{H}`
    big_f: Vec<f64>,
    exp_h: Vec<f64>,
}

/// `(∫_0^θ e^{aτ}dτ, ∫_0^θ τ e^{aτ}dτ)`
#[inline]
fn exp_moments(a: f64, theta: f64) -> (f64, f64) {
    let x = a * theta;
    if x.abs() < 1e-3 {
        let i0 = theta * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x / 24.0)));
        let i1 = theta * theta * (0.5 + x * (1.0 / 3.0 + x * (0.125 + x / 30.0)));
        (i0, i1)
    } else {
        let e = x.exp();
        let i0 = (e - 1.0) / a;
        let i1 = (theta * e - i0) / a;
        (i0, i1)
    }
}

impl CharCurve {
    pub fn s_min(&self) -> f64 {
        self.s_samples[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s_samples.last().unwrap()
    }

    /// Segment index and local coordinate of `s`.
    #[inline]
    fn locate(&self, s: f64) -> Result<(usize, f64)> {
        let (lo, hi) = (self.s_min(), self.s_max());
        let slack = 1e-12 * (1.0 + hi);
        if !(s >= lo - slack && s <= hi + slack) {
            return Err(Error::OutOfRange { value: s, lo, hi });
        }
        let u = ((s - lo) / self.ds).max(0.0);
        let k = (u.floor() as usize).min(self.s_samples.len() - 2);
        Ok((k, u - k as f64))
    }

    /// `(H(s), F(s))`; on each segment `f` is linear and `H` is
    /// interpolated linearly, so the exponential is integrated exactly.
    #[inline]
    fn cumulative(&self, s: f64) -> Result<(f64, f64)> {
        let (k, theta) = self.locate(s)?;
        let dh = self.h[k + 1] - self.h[k];
        let df = self.f_samples[k + 1] - self.f_samples[k];
        let (i0, i1) = exp_moments(dh, theta);
        let big_f = self.big_f[k] + self.ds * self.exp_h[k] * (self.f_samples[k] * i0 + df * i1);
        Ok((self.h[k] + dh * theta, big_f))
    }

    /// `Z(σ, σ°) = max{0, 1 − ∫_{σ°}^{σ} f(ψ^s) e^{−∫_s^σ (f+g)} ds}`.
    pub fn z(&self, sigma: f64, sigma0: f64) -> Result<f64> {
        let (h1, f1) = self.cumulative(sigma)?;
        let (_, f0) = self.cumulative(sigma0)?;
        Ok((1.0 - (f1 - f0) * (-h1).exp()).max(0.0))
    }
}

/// RK4 integration of `∂_s ψ = −W(ψ)` from `x` on `[−s_max, s_max]`.
pub fn characteristic_flow(
    x: [f64; 2],
    s_max: f64,
    ds: f64,
    setup: &DegenerateSetup,
) -> Result<CharCurve> {
    if !(ds > 0.0 && ds <= setup.max_ds() * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "characteristic step {ds} must lie in (0, {}]",
            setup.max_ds()
        )));
    }
    if !(s_max >= 0.0 && s_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon {s_max} must be >= 0")));
    }
    let half = ((s_max / ds).ceil() as usize).max(1);
    let ds = if s_max > 0.0 { s_max / half as f64 } else { ds };
    let s = setup.sampler();
    let vel = |p: [f64; 2]| {
        let [wx, wy] = s.sample::<2>(p);
        [-wx, -wy]
    };
    let rk4 = |p: [f64; 2], h: f64| {
        let k1 = vel(p);
        let k2 = vel([p[0] + 0.5 * h * k1[0], p[1] + 0.5 * h * k1[1]]);
        let k3 = vel([p[0] + 0.5 * h * k2[0], p[1] + 0.5 * h * k2[1]]);
        let k4 = vel([p[0] + h * k3[0], p[1] + h * k3[1]]);
        [
            p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    let m = 2 * half + 1;
    let mut points = vec![x; m];
    for k in 0..half {
        points[half + k + 1] = rk4(points[half + k], ds);
        points[half - k - 1] = rk4(points[half - k], -ds);
    }
    let mut f_samples = Vec::with_capacity(m);
    let mut g_samples = Vec::with_capacity(m);
    for p in &points {
        let [_, _, f, g] = s.sample::<4>(*p);
        f_samples.push(f);
        g_samples.push(g);
    }
    let s_samples: Vec<f64> = (0..m).map(|k| (k as f64 - half as f64) * ds).collect();

    // cumulative integrals anchored at s = 0
    let q: Vec<f64> = f_samples.iter().zip(&g_samples).map(|(f, g)| f + g).collect();
    let mut h = vec![0.0; m];
    for k in half..m - 1 {
        h[k + 1] = h[k] + 0.5 * ds * (q[k] + q[k + 1]);
    }
    for k in (0..half).rev() {
        h[k] = h[k + 1] - 0.5 * ds * (q[k] + q[k + 1]);
    }
    let exp_h: Vec<f64> = h.iter().map(|x| x.exp()).collect();
    let seg = |k: usize| {
        let (i0, i1) = exp_moments(h[k + 1] - h[k], 1.0);
        ds * exp_h[k] * (f_samples[k] * i0 + (f_samples[k + 1] - f_samples[k]) * i1)
    };
    let mut big_f = vec![0.0; m];
    for k in half..m - 1 {
        big_f[k + 1] = big_f[k] + seg(k);
    }
    for k in (0..half).rev() {
        big_f[k] = big_f[k + 1] - seg(k);
    }
    Ok(CharCurve {
        x,
        s_samples,
        points,
        f_samples,
        g_samples,
        ds,
        origin: half,
        h,
        big_f,
        exp_h,
    })
}

/// `σ_x^t(σ°)`: RK4 in `t` on `∂_t σ = Z(σ, σ°)`.
pub fn sigma_forward(curve: &CharCurve, t: f64, sigma0: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    curve.locate(sigma0)?;
    curve.locate(sigma0 + t)?;
    if t == 0.0 {
        return Ok(sigma0);
    }
    let steps = (t / SIGMA_STEP).ceil() as usize;
    let h = t / steps as f64;
    let hi = sigma0 + t;
    // stages are clamped to the a priori bracket [σ°, σ° + t]
    let z = |s: f64| curve.z(s.clamp(sigma0, hi), sigma0);
    let mut s = sigma0;
    for _ in 0..steps {
        let k1 = z(s)?;
        let k2 = z(s + 0.5 * h * k1)?;
        let k3 = z(s + 0.5 * h * k2)?;
        let k4 = z(s + h * k3)?;
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(s.clamp(sigma0, hi))
}

/// `(σ_x^t)^{-1}(0)` by bisection on `[−t, 0]`.
pub fn invert_sigma(curve: &CharCurve, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let at_lower = sigma_forward(curve, t, -t)?;
    let at_upper = sigma_forward(curve, t, 0.0)?;
    let tol = 1e-9;
    if at_lower > tol || at_upper < -tol {
        return Err(Error::BracketFailure { at_lower, at_upper });
    }
    let (mut lo, mut hi) = (-t, 0.0);
    if at_lower >= 0.0 {
        return Ok(lo);
    }
    while hi - lo > INVERT_TOL {
        let mid = 0.5 * (lo + hi);
        if sigma_forward(curve, t, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `κ^t(x) = 1 − ∫_{σ*}^0 f(ψ^s) e^{−∫_s^0 (f+g)} ds = 1 + F(σ*)` with
/// `σ* = (σ_x^t)^{-1}(0)`.
pub fn kappa_at(curve: &CharCurve, t: f64) -> Result<f64> {
    let root = invert_sigma(curve, t)?;
    let (_, big_f) = curve.cumulative(root)?;
    debug_assert_eq!(curve.big_f[curve.origin], 0.0);
    Ok((1.0 + big_f).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegenerateNumerics {
    /// Characteristic step; `None` means half the allowed maximum.
    pub ds: Option<f64>,
    pub interpolation: Interpolation,
    /// Mean vortex density `m` added to `curl v°`.
    pub background: f64,
}

impl Default for DegenerateNumerics {
    fn default() -> Self {
        DegenerateNumerics {
            ds: None,
            interpolation: Interpolation::Bicubic,
            background: 0.0,
        }
    }
}

/// `κ` at every node for each requested time (one characteristic per node).
pub fn kappa_fields(setup: &DegenerateSetup, times: &[f64], ds: Option<f64>) -> Result<Vec<ScalarField>> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    let grid = *setup.grid();
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let ds = ds.unwrap_or(0.5 * setup.max_ds());
    let s_max = t_max + ds;
    let per_node: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let p = grid.point(k % grid.n(), k / grid.n());
            if t_max == 0.0 {
                return Ok(vec![1.0; times.len()]);
            }
            let curve = characteristic_flow(p, s_max, ds, setup)?;
            times.iter().map(|&t| kappa_at(&curve, t)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..times.len())
        .map(|i| ScalarField::from_raw(grid, per_node.iter().map(|k| k[i]).collect()))
        .collect())
}

/// `v^t = −Ψ + κ^t (Ψ + v°)` for each requested time, with `κ^t`.
pub fn degenerate_solutions(
    v0: &VectorField,
    psi: &VectorField,
    times: &[f64],
    numerics: &DegenerateNumerics,
) -> Result<Vec<(VectorField, ScalarField)>> {
    let setup = DegenerateSetup::new(v0, psi, numerics.background, numerics.interpolation)?;
    let kappas = kappa_fields(&setup, times, numerics.ds)?;
    let grid = *v0.grid();
    Ok(kappas
        .into_iter()
        .map(|kappa| {
            let mut v = v0.clone();
            for (k, &kp) in kappa.data().iter().enumerate() {
                if kp != 1.0 {
                    v.x[k] = -psi.x[k] + kp * (psi.x[k] + v0.x[k]);
                    v.y[k] = -psi.y[k] + kp * (psi.y[k] + v0.y[k]);
                }
            }
            debug_assert_eq!(v.grid(), &grid);
            (v, kappa)
        })
        .collect())
}

pub fn degenerate_solution(
    v0: &VectorField,
    psi: &VectorField,
    t: f64,
    numerics: &DegenerateNumerics,
) -> Result<(VectorField, ScalarField)> {
    Ok(degenerate_solutions(v0, psi, &[t], numerics)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{grad, random_smooth};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_setup(n: usize, w: [f64; 2], f0: f64, g0: f64) -> DegenerateSetup {
        let grid = Grid2D::new(n, 4.0).unwrap();
        DegenerateSetup::from_fields(
            VectorField::from_fn(grid, |_, _| w),
            ScalarField::constant(grid, f0),
            ScalarField::constant(grid, g0),
            Interpolation::Bicubic,
        )
        .unwrap()
    }

    fn curve(setup: &DegenerateSetup, s_max: f64) -> CharCurve {
        characteristic_flow([1.3, 2.1], s_max, 0.5 * setup.max_ds(), setup).unwrap()
    }

    #[test]
    fn still_and_uniform_flows() {
        let st = uniform_setup(16, [0.0, 0.0], 0.0, 0.0);
        let c = curve(&st, 2.0);
        assert!(c.points.iter().all(|p| *p == [1.3, 2.1]));
        let w = [0.4, -0.7];
        let st = uniform_setup(16, w, 0.0, 0.0);
        let c = curve(&st, 2.0);
        for (s, p) in c.s_samples.iter().zip(&c.points) {
            assert!((p[0] - (1.3 - s * w[0])).abs() < 1e-13);
            assert!((p[1] - (2.1 - s * w[1])).abs() < 1e-13);
        }
    }

    #[test]
    fn orbits_follow_level_sets() {
        // W = ∇⊥φ with φ = sin(kx) sin(ky): closed orbits around the cell centre
        let l = 2.0 * std::f64::consts::PI;
        let grid = Grid2D::new(128, l).unwrap();
        let phi = |p: [f64; 2]| p[0].sin() * p[1].sin();
        let w = VectorField::from_fn(grid, |x, y| [-x.sin() * y.cos(), x.cos() * y.sin()]);
        let zero = ScalarField::zeros(grid);
        let setup = DegenerateSetup::from_fields(w, zero.clone(), zero, Interpolation::Bicubic).unwrap();
        let x = [1.0, 1.9];
        let curve = characteristic_flow(x, 6.0, 0.5 * setup.max_ds(), &setup).unwrap();
        let drift = curve
            .points
            .iter()
            .map(|p| (phi(*p) - phi(x)).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-5, "level drift {drift}");
        let far = curve.points.iter().map(|p| (p[0] - x[0]).hypot(p[1] - x[1])).fold(0.0, f64::max);
        assert!(far > 0.5);
    }

    #[test]
    fn free_streaming_sigma() {
        let st = uniform_setup(16, [0.3, 0.1], 0.0, 0.0);
        let c = curve(&st, 3.0);
        assert_eq!(sigma_forward(&c, 1.7, -0.5).unwrap(), -0.5 + 1.7);
        let st = uniform_setup(16, [0.3, 0.1], 0.0, 0.8);
        let c = curve(&st, 3.0);
        assert_eq!(sigma_forward(&c, 1.7, -0.5).unwrap(), -0.5 + 1.7);
        assert_eq!(invert_sigma(&c, 1.2).unwrap(), -1.2);
        assert_eq!(kappa_at(&c, 2.5).unwrap(), 1.0);
    }

    #[test]
    fn riccati_closed_forms() {
        for f0 in [0.5, 2.0] {
            let st = uniform_setup(16, [0.2, -0.3], f0, 0.0);
            let c = curve(&st, 4.5);
            for &t in &[0.0, 0.3, 1.0, 2.5, 4.0] {
                let s = sigma_forward(&c, t, -0.2).unwrap();
                assert!((s - (-0.2 + (1.0 + f0 * t).ln() / f0)).abs() < 1e-8);
                let inv = invert_sigma(&c, t).unwrap();
                assert!((inv + (1.0 + f0 * t).ln() / f0).abs() < 1e-8);
                let k = kappa_at(&c, t).unwrap();
                assert!((k - 1.0 / (1.0 + f0 * t)).abs() < 1e-8, "f0 {f0} t {t}: {k}");
            }
        }
    }

    #[test]
    fn out_of_range_query() {
        let st = uniform_setup(16, [0.2, 0.0], 1.0, 0.0);
        let c = curve(&st, 1.0);
        assert!(matches!(sigma_forward(&c, 2.0, 0.0), Err(Error::OutOfRange { .. })));
    }

    fn generic_setup() -> DegenerateSetup {
        let grid = Grid2D::new(32, 6.0).unwrap();
        let w = VectorField::from_components(random_smooth(grid, 3, 1.0, 1), random_smooth(grid, 3, 1.0, 2)).unwrap();
        let f = random_smooth(grid, 3, 1.0, 3).offset(1.0).map(|x| x.max(0.0));
        let g = random_smooth(grid, 3, 1.0, 4);
        DegenerateSetup::from_fields(w, f, g, Interpolation::Bicubic).unwrap()
    }

    #[test]
    fn sigma_bracket_and_monotonicity() {
        let setup = generic_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ds = 0.5 * setup.max_ds();
        for _ in 0..100 {
            let x = [rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)];
            let t: f64 = rng.random_range(0.0..1.5);
            let s0: f64 = rng.random_range(-1.0..0.0);
            let c = characteristic_flow(x, 3.0, ds, &setup).unwrap();
            let s = sigma_forward(&c, t, s0).unwrap();
            assert!(s >= s0 - 1e-9 && s <= s0 + t + 1e-9);
            let s1 = sigma_forward(&c, t, s0 + 0.1).unwrap();
            assert!(s1 > s);
        }
    }

    #[test]
    fn kappa_bounds_and_decay() {
        let mut setup = generic_setup();
        let ds = 0.5 * setup.max_ds();
        let times = [0.0, 0.25, 0.5, 1.0, 1.5];
        for p in [[0.5, 0.5], [3.0, 1.0], [5.5, 4.2]] {
            let c = characteristic_flow(p, 2.0, ds, &setup).unwrap();
            for &t in &times {
                let k = kappa_at(&c, t).unwrap();
                assert!((0.0..=1.0).contains(&k));
            }
        }
        setup.g = ScalarField::zeros(*setup.grid());
        for p in [[0.5, 0.5], [3.0, 1.0], [5.5, 4.2]] {
            let c = characteristic_flow(p, 2.0, ds, &setup).unwrap();
            let ks: Vec<f64> = times.iter().map(|&t| kappa_at(&c, t).unwrap()).collect();
            for w in ks.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn irrotational_data_is_stationary() {
        let grid = Grid2D::new(16, 4.0).unwrap();
        let v0 = grad(&random_smooth(grid, 3, 1.0, 5));
        let psi = VectorField::from_fn(grid, |x, y| [0.1 * y.cos(), 0.2 * x.sin()]);
        let (v, k) = degenerate_solution(&v0, &psi, 0.7, &DegenerateNumerics::default()).unwrap();
        assert!(k.data().iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(v.sub(&v0).max_norm() < 1e-12);
        let (v, _) = degenerate_solution(&v0, &psi, 0.0, &DegenerateNumerics::default()).unwrap();
        assert_eq!(v, v0);
    }
}
