//! Weighted elliptic solves on the torus, velocity reconstruction from
//! `(omega, zeta)` and pressure recovery.

use crate::error::{Error, Result};
use crate::fields::{perp, ModelParams, PinningProfile, ScalarField, VectorField};
use crate::spectral::{project_range, Spectral};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    SpectralLaplacian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticOptions {
    pub tol: f64,
    /// `None` means `10 * n`.
    pub max_iter: Option<usize>,
    pub precond: Preconditioner,
}

impl Default for EllipticOptions {
    fn default() -> Self {
        EllipticOptions {
            tol: 1e-10,
            max_iter: None,
            precond: Preconditioner::SpectralLaplacian,
        }
    }
}

impl EllipticOptions {
    pub fn with_tol(tol: f64) -> Self {
        EllipticOptions {
            tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "elliptic tol = {} must lie in (0, 1)",
                self.tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    fn iter_cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EllipticReport {
    pub iters: usize,
    pub residual: f64,
    pub mean_removed: f64,
}

impl EllipticReport {
    /// Combines the reports of two solves (worst residual, summed iterations).
    pub fn merge(self, other: EllipticReport) -> EllipticReport {
        EllipticReport {
            iters: self.iters + other.iters,
            residual: self.residual.max(other.residual),
            mean_removed: self.mean_removed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `u -> -div(b grad u)` with spectral derivatives.
pub fn apply_operator(spectral: &Spectral, b: &[f64], u: &[f64]) -> Vec<f64> {
    let (mut gx, mut gy) = spectral.gradient(u);
    for k in 0..b.len() {
        gx[k] *= b[k];
        gy[k] *= b[k];
    }
    let mut d = spectral.divergence(&gx, &gy);
    for x in d.iter_mut() {
        *x = -*x;
    }
    d
}

fn precondition(spectral: &Spectral, b_mean: f64, r: &[f64]) -> Vec<f64> {
    spectral.apply_symbol(r, |p| {
        let k2 = spectral.k2_deriv(p);
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / (b_mean * k2)
        }
    })
}

/// Solves `-div(b grad u) = f - mean(f)` for the zero-mean `u`.
///
/// Besides the mean, the three checkerboard modes that the spectral
/// operator cannot reach are projected out of `f` and of `u`. Constant `b`
/// is inverted directly in Fourier space; otherwise PCG runs until both the
/// relative residual and the relative preconditioned residual are below
/// `tol`.
pub fn solve_div_b_grad(
    b: &ScalarField,
    f: &ScalarField,
    opts: &EllipticOptions,
) -> Result<(ScalarField, EllipticReport)> {
    opts.validate()?;
    if b.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    if !f.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("elliptic input"));
    }
    let bmin = b.min();
    if bmin <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coefficient must be positive, min b = {bmin}"
        )));
    }
    let grid = *f.grid();
    let sp = Spectral::new(&grid);
    let mean_removed = f.mean();
    let mut rhs = f.data().to_vec();
    project_range(&sp, &mut rhs);
    let f_norm = norm(&rhs);
    if f_norm == 0.0 {
        return Ok((
            ScalarField::zeros(grid),
            EllipticReport {
                iters: 0,
                residual: 0.0,
                mean_removed,
            },
        ));
    }
    let bd = b.data();
    let b_mean = b.mean();
    let constant = bd.iter().all(|&x| x == bd[0]);

    if constant {
        let mut u = precondition(&sp, b_mean, &rhs);
        project_range(&sp, &mut u);
        let r = apply_operator(&sp, bd, &u);
        let res = norm(&r.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>()) / f_norm;
        return Ok((
            ScalarField::from_raw(grid, u),
            EllipticReport {
                iters: 0,
                residual: res,
                mean_removed,
            },
        ));
    }

    let cap = opts.iter_cap(grid.n());
    let len = rhs.len();
    let mut u = vec![0.0; len];
    let mut r = rhs.clone();
    let mut z = precondition(&sp, b_mean, &r);
    let z0 = norm(&z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iters = 0;
    while iters < cap {
        iters += 1;
        let ap = apply_operator(&sp, bd, &p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for k in 0..len {
            u[k] += step * p[k];
            r[k] -= step * ap[k];
        }
        let res = norm(&r) / f_norm;
        z = precondition(&sp, b_mean, &r);
        if res <= opts.tol && norm(&z) <= opts.tol * z0 {
            break;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..len {
            p[k] = z[k] + beta * p[k];
        }
    }
    project_range(&sp, &mut u);
    // true residual, not the recursively updated one
    let au = apply_operator(&sp, bd, &u);
    let true_res = norm(&au.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>()) / f_norm;
    let residual = true_res;
    if residual > opts.tol {
        return Err(Error::NonConvergence { iters, residual });
    }
    Ok((
        ScalarField::from_raw(grid, u),
        EllipticReport {
            iters,
            residual,
            mean_removed,
        },
    ))
}

/// Velocity with `curl v = omega - mean(omega)` and
/// `div(a v) = zeta - mean(zeta)`:
/// `v = a^{-1} grad⊥ u + grad q`, `-div(a^{-1} grad u) = -omega'`,
/// `-div(a grad q) = -zeta'`.
///
/// The returned field has no harmonic component in the `a`-weighted sense.
pub fn reconstruct_velocity(
    omega: &ScalarField,
    zeta: &ScalarField,
    pin: &PinningProfile,
    opts: &EllipticOptions,
) -> Result<(VectorField, EllipticReport)> {
    if omega.grid() != zeta.grid() || omega.grid() != pin.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = *omega.grid();
    let sp = Spectral::new(&grid);
    let (u, rep) = solve_div_b_grad(&pin.a_inv, &omega.scale(-1.0), opts)?;
    let (gx, gy) = sp.gradient(u.data());
    let ai = pin.a_inv.data();
    let mut vx: Vec<f64> = (0..grid.len()).map(|k| -gy[k] * ai[k]).collect();
    let mut vy: Vec<f64> = (0..grid.len()).map(|k| gx[k] * ai[k]).collect();
    let mut report = EllipticReport {
        mean_removed: -rep.mean_removed,
        ..rep
    };
    if zeta.data().iter().any(|&x| x != 0.0) {
        let (q, rep2) = solve_div_b_grad(&pin.a, &zeta.scale(-1.0), opts)?;
        let (qx, qy) = sp.gradient(q.data());
        for k in 0..grid.len() {
            vx[k] += qx[k];
            vy[k] += qy[k];
        }
        report = report.merge(rep2);
    }
    Ok((VectorField::from_raw(grid, vx, vy), report))
}

/// `ω(−α(Ψ+v) + β(Ψ+v)⊥)`, the flux appearing in the pressure identity.
pub fn pressure_flux(
    omega: &ScalarField,
    v: &VectorField,
    psi: &VectorField,
    params: &ModelParams,
) -> VectorField {
    let u = psi.add(v);
    u.lincomb(-params.alpha, &perp(&u), params.beta).scale_by(omega)
}

/// Zero-mean `P = (−div a∇)^{-1} div(a ω(−α(Ψ+v) + β(Ψ+v)⊥))`.
pub fn pressure(
    omega: &ScalarField,
    v: &VectorField,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    opts: &EllipticOptions,
) -> Result<(ScalarField, EllipticReport)> {
    let grid = *omega.grid();
    if v.grid() != &grid || pin.grid() != &grid || psi.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let sp = Spectral::new(&grid);
    let flux = pressure_flux(omega, v, psi, params).scale_by(&pin.a);
    let src = ScalarField::from_raw(grid, sp.divergence(&flux.x, &flux.y));
    solve_div_b_grad(&pin.a, &src, opts)
}

/// Constant-direction harmonic fields `e_i + grad φ_i` with
/// `div(a (e_i + grad φ_i)) = 0`.
pub fn harmonic_basis(pin: &PinningProfile, opts: &EllipticOptions) -> Result<[VectorField; 2]> {
    let grid = *pin.grid();
    let sp = Spectral::new(&grid);
    let (ax, ay) = sp.gradient(pin.a.data());
    let mut out = Vec::with_capacity(2);
    for (dir, da) in [(0usize, ax), (1, ay)] {
        // -div(a grad φ) = div(a e) = ∂_e a
        let (phi, _) = solve_div_b_grad(&pin.a, &ScalarField::from_raw(grid, da), opts)?;
        let (px, py) = sp.gradient(phi.data());
        let (mut hx, mut hy) = (px, py);
        if dir == 0 {
            hx.iter_mut().for_each(|x| *x += 1.0);
        } else {
            hy.iter_mut().for_each(|x| *x += 1.0);
        }
        out.push(VectorField::from_raw(grid, hx, hy));
    }
    let second = out.pop().unwrap();
    let first = out.pop().unwrap();
    Ok([first, second])
}

/// Removes the `a`-weighted projection onto the harmonic fields.
pub fn remove_harmonic(
    v: &VectorField,
    pin: &PinningProfile,
    opts: &EllipticOptions,
) -> Result<VectorField> {
    if pin.is_flat() {
        let [mx, my] = v.mean();
        return Ok(VectorField::from_raw(
            *v.grid(),
            v.x.iter().map(|a| a - mx).collect(),
            v.y.iter().map(|a| a - my).collect(),
        ));
    }
    let [h1, h2] = harmonic_basis(pin, opts)?;
    let ip = |p: &VectorField, q: &VectorField| p.dot(q).mul(&pin.a).sum();
    let g11 = ip(&h1, &h1);
    let g12 = ip(&h1, &h2);
    let g22 = ip(&h2, &h2);
    let b1 = ip(v, &h1);
    let b2 = ip(v, &h2);
    let det = g11 * g22 - g12 * g12;
    let c1 = (g22 * b1 - g12 * b2) / det;
    let c2 = (g11 * b2 - g12 * b1) / det;
    Ok(v.sub(&h1.lincomb(c1, &h2, c2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{curl, div, grad, make_pinning, random_smooth, Grid2D};
    use std::f64::consts::PI;

    fn rel_inf(a: &ScalarField, b: &ScalarField) -> f64 {
        a.sub(b).max_abs() / b.max_abs()
    }

    #[test]
    fn laplacian_eigenmode() {
        let g = Grid2D::new(32, 5.0).unwrap();
        let k = 2.0 * PI / 5.0;
        let f = ScalarField::from_fn(g, |x, _| k * k * (k * x).sin());
        let b = ScalarField::constant(g, 1.0);
        let (u, _) = solve_div_b_grad(&b, &f, &EllipticOptions::default()).unwrap();
        let want = ScalarField::from_fn(g, |x, _| (k * x).sin());
        assert!(u.sub(&want).max_abs() < 1e-10);
    }

    #[test]
    fn constant_rhs_gives_zero() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let b = random_smooth(g, 3, 1.0, 2).map(f64::exp);
        let f = ScalarField::constant(g, 2.5);
        let (u, rep) = solve_div_b_grad(&b, &f, &EllipticOptions::default()).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert!((rep.mean_removed - 2.5).abs() < 1e-14);
    }

    #[test]
    fn manufactured_variable_coefficient() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let opts = EllipticOptions::default();
        for seed in 0..3 {
            let b = random_smooth(g, 4, 1.0, 100 + seed).map(f64::exp);
            let mut us = random_smooth(g, 5, 1.0, 200 + seed).into_vec();
            let sp = Spectral::new(&g);
            project_range(&sp, &mut us);
            let us = ScalarField::from_vec(g, us).unwrap();
            let f = ScalarField::from_raw(g, apply_operator(&sp, b.data(), us.data()));
            let (u, rep) = solve_div_b_grad(&b, &f, &opts).unwrap();
            assert!(rep.residual <= opts.tol);
            assert!(rel_inf(&u, &us) <= 10.0 * opts.tol, "seed {seed}: {}", rel_inf(&u, &us));
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let b = random_smooth(g, 3, 2.0, 9).map(f64::exp);
        let f = random_smooth(g, 3, 1.0, 10);
        let opts = EllipticOptions {
            max_iter: Some(1),
            ..Default::default()
        };
        assert!(matches!(
            solve_div_b_grad(&b, &f, &opts),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn operator_is_symmetric_and_coercive() {
        let g = Grid2D::new(32, 3.0).unwrap();
        let sp = Spectral::new(&g);
        let b = random_smooth(g, 3, 1.0, 1).map(f64::exp);
        for s in 0..5 {
            let mut u1 = random_smooth(g, 6, 1.0, 10 + s).into_vec();
            let mut u2 = random_smooth(g, 6, 1.0, 20 + s).into_vec();
            project_range(&sp, &mut u1);
            project_range(&sp, &mut u2);
            let a1 = apply_operator(&sp, b.data(), &u1);
            let a2 = apply_operator(&sp, b.data(), &u2);
            let lhs = dot(&a1, &u2);
            let rhs = dot(&u1, &a2);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
            let k0 = 2.0 * PI / 3.0;
            assert!(dot(&a1, &u1) >= k0 * k0 * b.min() * dot(&u1, &u1));
        }
    }

    #[test]
    fn reconstruct_zero() {
        let g = Grid2D::new(16, 1.0).unwrap();
        let pin = make_pinning(random_smooth(g, 2, 0.5, 1)).unwrap();
        let z = ScalarField::zeros(g);
        let (v, _) = reconstruct_velocity(&z, &z, &pin, &EllipticOptions::default()).unwrap();
        assert_eq!(v.max_norm(), 0.0);
    }

    #[test]
    fn reconstruct_flat_divergence_free() {
        let g = Grid2D::new(64, 2.0 * PI).unwrap();
        let pin = PinningProfile::flat(g);
        let phi = random_smooth(g, 6, 1.0, 4);
        let vs = perp(&grad(&phi));
        let opts = EllipticOptions::default();
        let (v, _) =
            reconstruct_velocity(&curl(&vs), &ScalarField::zeros(g), &pin, &opts).unwrap();
        assert!(v.sub(&vs).max_norm() <= 10.0 * opts.tol * vs.max_norm());
    }

    #[test]
    fn reconstruct_round_trip_weighted() {
        let g = Grid2D::new(64, 4.0).unwrap();
        let pin = make_pinning(random_smooth(g, 3, 1.0, 7)).unwrap();
        let w = random_smooth(g, 5, 1.0, 8).offset(1.5);
        let z = random_smooth(g, 5, 1.0, 9);
        let opts = EllipticOptions::default();
        let (v, _) = reconstruct_velocity(&w, &z, &pin, &opts).unwrap();
        let wm = w.offset(-w.mean());
        let zm = z.offset(-z.mean());
        let rel2 = |a: &ScalarField, b: &ScalarField| a.sub(b).l2_norm() / b.l2_norm();
        assert!(rel2(&curl(&v), &wm) <= 10.0 * opts.tol);
        let av = v.scale_by(&pin.a);
        assert!(rel2(&div(&av), &zm) <= 10.0 * opts.tol);
    }

    #[test]
    fn reconstruct_is_linear() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let pin = make_pinning(random_smooth(g, 3, 0.8, 17)).unwrap();
        let opts = EllipticOptions::default();
        let w1 = random_smooth(g, 4, 1.0, 1);
        let w2 = random_smooth(g, 4, 1.0, 2);
        let z1 = random_smooth(g, 4, 1.0, 3);
        let z2 = random_smooth(g, 4, 1.0, 4);
        let (v1, _) = reconstruct_velocity(&w1, &z1, &pin, &opts).unwrap();
        let (v2, _) = reconstruct_velocity(&w2, &z2, &pin, &opts).unwrap();
        let (v12, _) = reconstruct_velocity(&w1.add(&w2), &z1.add(&z2), &pin, &opts).unwrap();
        let d = v12.sub(&v1.add(&v2)).l2_norm();
        assert!(d <= 20.0 * opts.tol * v12.l2_norm(), "{d}");
    }

    #[test]
    fn flat_weight_is_helmholtz() {
        let g = Grid2D::new(32, 2.0 * PI).unwrap();
        let sp = Spectral::new(&g);
        let pin = PinningProfile::flat(g);
        let w = random_smooth(g, 5, 1.0, 31);
        let z = random_smooth(g, 5, 1.0, 32);
        let (v, _) = reconstruct_velocity(&w, &z, &pin, &EllipticOptions::default()).unwrap();
        let inv = |a: &ScalarField| {
            ScalarField::from_raw(
                g,
                sp.apply_symbol(a.data(), |p| {
                    let k2 = sp.k2_deriv(p);
                    if k2 == 0.0 {
                        0.0
                    } else {
                        -1.0 / k2
                    }
                }),
            )
        };
        let want = perp(&grad(&inv(&w))).add(&grad(&inv(&z)));
        assert!(v.sub(&want).max_norm() <= 1e-9 * want.max_norm());
    }

    #[test]
    fn pressure_vanishes_for_zero_source() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let pin = make_pinning(random_smooth(g, 2, 0.5, 3)).unwrap();
        let opts = EllipticOptions::default();
        let v = VectorField::from_fn(g, |x, y| [x.sin(), y.cos()]);
        let psi = VectorField::zeros(g);
        let p1 = ModelParams::incompressible(1.0, 0.5);
        let (p, _) = pressure(&ScalarField::zeros(g), &v, &pin, &psi, &p1, &opts).unwrap();
        assert_eq!(p.max_abs(), 0.0);
        let w = random_smooth(g, 3, 1.0, 4).offset(2.0);
        let p0 = ModelParams::incompressible(0.0, 0.0);
        let (p, _) = pressure(&w, &v, &pin, &psi, &p0, &opts).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn pressure_substitution_flat_weight() {
        // a = 1, alpha = 1, beta = 0: -ΔP = -div(ω v)
        let g = Grid2D::new(64, 8.0).unwrap();
        let pin = PinningProfile::flat(g);
        let opts = EllipticOptions::default();
        let c = g.center();
        let w = ScalarField::from_fn(g, |x, y| {
            let d = g.displacement([x, y], c);
            (-(d[0] * d[0] + d[1] * d[1])).exp()
        });
        let (v, _) = reconstruct_velocity(&w, &ScalarField::zeros(g), &pin, &opts).unwrap();
        let params = ModelParams::incompressible(1.0, 0.0);
        let (p, _) = pressure(&w, &v, &pin, &VectorField::zeros(g), &params, &opts).unwrap();
        let lhs = crate::fields::laplacian(&p).scale(-1.0);
        let rhs = div(&v.scale_by(&w)).scale(-1.0);
        assert!(lhs.sub(&rhs).l2_norm() <= 10.0 * opts.tol * rhs.l2_norm());
    }

    #[test]
    fn harmonic_fields_are_weighted_divergence_free() {
        let g = Grid2D::new(32, 4.0).unwrap();
        let pin = make_pinning(random_smooth(g, 3, 1.0, 5)).unwrap();
        let opts = EllipticOptions::default();
        let hb = harmonic_basis(&pin, &opts).unwrap();
        for h in &hb {
            assert!(curl(h).max_abs() < 1e-9);
            assert!(div(&h.scale_by(&pin.a)).max_abs() < 1e-8);
        }
        let shifted = hb[0].scale(0.3).add(&hb[1].scale(-1.2));
        assert!(remove_harmonic(&shifted, &pin, &opts).unwrap().max_norm() < 1e-9);
    }
}
