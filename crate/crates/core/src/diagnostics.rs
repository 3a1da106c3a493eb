//! Norms, identities and decay bounds evaluated on states and trajectories.

use std::io::Write;

use crate::elliptic::{pressure, remove_harmonic, solve_div_b_grad, EllipticOptions};
use crate::error::{Error, Result};
use crate::evolution::{div_a_v_rel, Trajectory};
use crate::fields::{curl, div, grad, perp, ModelParams, PinningProfile, Regime, ScalarField, State, TensorField, VectorField};

pub const CSV_HEADER: &str =
    "t,mass,linf,l2,lp,p,div_a_v_rel,delort_res,energy,energy_rhs_res,margin_r44_sharp,margin_r44_univ,fitted_C_112";

pub fn mass(omega: &ScalarField) -> f64 {
    omega.integral()
}

/// `(∫|ω|^p)^{1/p}`; `p = ∞` gives the grid maximum of `|ω|`.
pub fn lp_norm(omega: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be >= 1");
    let m = omega.max_abs();
    if p.is_infinite() {
        return m;
    }
    if m == 0.0 {
        return 0.0;
    }
    // scaled to keep |ω/m|^p in range for large p
    let s: f64 = omega.data().iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * (s * omega.grid().cell_area()).powf(1.0 / p)
}

/// `‖ωv − RHS‖₂ / ‖ωv‖₂` for the identity
/// `ωv = −½|v|²∇⊥h − a^{-1}(div(a S_v))⊥`, valid when `div(a v) = 0`;
/// `ω = curl v`.
pub fn delort_residual(v: &VectorField, pin: &PinningProfile) -> f64 {
    let omega = curl(v);
    let lhs = v.scale_by(&omega);
    let norm = lhs.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let stress = TensorField::stress_energy(v).scale_by(&pin.a).div_rows();
    let rhs = perp(&pin.grad_h)
        .scale_by(&v.norm_sq().scale(-0.5))
        .sub(&perp(&stress).scale_by(&pin.a_inv));
    lhs.sub(&rhs).l2_norm() / norm
}

/// Reference pair `(v̄, ζ̄)` of the energy `∫a|v − v̄|²`.
#[derive(Debug, Clone)]
pub struct EnergyReference {
    pub v_ref: VectorField,
    pub zeta_ref: ScalarField,
}

impl EnergyReference {
    pub fn zero(grid: crate::fields::Grid2D) -> Self {
        EnergyReference {
            v_ref: VectorField::zeros(grid),
            zeta_ref: ScalarField::zeros(grid),
        }
    }
}

pub fn energy(state: &State, pin: &PinningProfile, reference: &EnergyReference) -> f64 {
    state.v.sub(&reference.v_ref).norm_sq().mul(&pin.a).integral()
}

/// Terms of the energy balance
/// `d/dt ∫a|v−v̄|² = −2λ∫a⁻¹ζ² + 2λ∫a⁻¹ζζ̄ − 2α∫a|v−v̄|²ω
///  + 2∫a(−α(Ψ+v̄) + β(Ψ+v̄)⊥)·(v−v̄)ω`.
pub fn energy_rhs_terms(
    state: &State,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    reference: &EnergyReference,
) -> [f64; 4] {
    let lambda = params.effective_lambda();
    let d = state.v.sub(&reference.v_ref);
    let z = &state.zeta;
    let w = psi.add(&reference.v_ref);
    let drive = w.lincomb(-params.alpha, &perp(&w), params.beta);
    [
        -2.0 * lambda * z.mul(z).mul(&pin.a_inv).integral(),
        2.0 * lambda * z.mul(&reference.zeta_ref).mul(&pin.a_inv).integral(),
        -2.0 * params.alpha * d.norm_sq().mul(&pin.a).mul(&state.omega).integral(),
        2.0 * drive.dot(&d).mul(&pin.a).mul(&state.omega).integral(),
    ]
}

/// Relative residual of the energy balance at each interior snapshot.
///
/// The time derivative is the three-point difference on the (possibly
/// nonuniform) snapshot times; the residual is divided by the sum of the
/// absolute values of the balance terms. Returns `(t, residual)`.
pub fn energy_identity_residual(
    traj: &Trajectory,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    reference: &EnergyReference,
) -> Result<Vec<(f64, f64)>> {
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientSnapshots(snaps.len()));
    }
    let e: Vec<f64> = snaps.iter().map(|s| energy(s, pin, reference)).collect();
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for i in 1..snaps.len() - 1 {
        let (t0, t1, t2) = (snaps[i - 1].t, snaps[i].t, snaps[i + 1].t);
        let (h0, h1) = (t1 - t0, t2 - t1);
        let de = -h1 / (h0 * (h0 + h1)) * e[i - 1] + (h1 - h0) / (h0 * h1) * e[i]
            + h0 / (h1 * (h0 + h1)) * e[i + 1];
        let terms = energy_rhs_terms(&snaps[i], pin, psi, params, reference);
        let rhs: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|x| x.abs()).sum();
        let res = if scale == 0.0 {
            (de - rhs).abs()
        } else {
            (de - rhs).abs() / scale
        };
        out.push((t1, res));
    }
    Ok(out)
}

/// Measured norm against the two bounds of the `L^p` decay estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayMargin {
    pub t: f64,
    pub lp: f64,
    /// `lp / (∫|ω°|^p (1+αtω°)^{1−p})^{1/p}`
    pub sharp: f64,
    /// `lp / (αt)^{−(1−1/p)}`
    pub universal: f64,
}

fn decay_regime(params: &ModelParams, psi: &VectorField, pin: &PinningProfile) -> Result<()> {
    if !(params.alpha > 0.0) {
        return Err(Error::RegimeMismatch("decay bounds need alpha > 0".into()));
    }
    if psi.max_norm() != 0.0 {
        return Err(Error::RegimeMismatch("decay bounds need Psi = 0".into()));
    }
    let flat_incompressible = params.regime == Regime::Incompressible && pin.is_flat();
    if params.beta != 0.0 && !flat_incompressible {
        return Err(Error::RegimeMismatch(
            "decay bounds need beta = 0 or the flat incompressible model".into(),
        ));
    }
    Ok(())
}

/// `(∫|ω°|^p (1+αtω°)^{1−p})^{1/p}`, the norm of the characteristic profile
/// `ω°/(1+αtω°)`.
pub fn sharp_bound(omega0: &ScalarField, alpha: f64, t: f64, p: f64) -> f64 {
    let q = omega0.map(|w| {
        let w = w.max(0.0);
        w / (1.0 + alpha * t * w)
    });
    if p.is_infinite() {
        return q.max();
    }
    let m = q.max();
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = q
        .data()
        .iter()
        .zip(omega0.data())
        .map(|(qi, w)| (qi / m).powf(p) * (1.0 + alpha * t * w.max(0.0)))
        .sum();
    m * (s * omega0.grid().cell_area()).powf(1.0 / p)
}

pub fn universal_bound(alpha: f64, t: f64, p: f64) -> f64 {
    let e = if p.is_infinite() { 1.0 } else { 1.0 - 1.0 / p };
    (alpha * t).powf(-e)
}

pub fn check_decay_remark44(
    traj: &Trajectory,
    omega0: &ScalarField,
    params: &ModelParams,
    psi: &VectorField,
    pin: &PinningProfile,
    p: f64,
) -> Result<Vec<DecayMargin>> {
    decay_regime(params, psi, pin)?;
    Ok(traj
        .snapshots
        .iter()
        .map(|s| {
            let lp = lp_norm(&s.omega, p);
            let sharp = sharp_bound(omega0, params.alpha, s.t, p);
            let uni = universal_bound(params.alpha, s.t, p);
            DecayMargin {
                t: s.t,
                lp,
                sharp: if sharp > 0.0 { lp / sharp } else { 0.0 },
                universal: lp / uni,
            }
        })
        .collect())
}

/// Smallest `C ≥ 0` with `‖ω^t‖∞ ≤ (αt)^{-1} + C α^{-1} e^{Ct}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound112Fit {
    /// `(t, C needed at t)` for `t > 0`.
    pub per_time: Vec<(f64, f64)>,
    pub c: f64,
}

fn required_c(linf: f64, alpha: f64, t: f64) -> f64 {
    let excess = alpha * (linf - 1.0 / (alpha * t));
    if excess <= 0.0 {
        return 0.0;
    }
    // C e^{Ct} is increasing in C
    let (mut lo, mut hi) = (0.0, excess.max(1.0));
    while hi * (hi * t).exp() < excess {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * (mid * t).exp() < excess {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

pub fn check_bound_112(traj: &Trajectory, params: &ModelParams) -> Result<Bound112Fit> {
    if !(params.alpha > 0.0 && params.beta == 0.0) {
        return Err(Error::RegimeMismatch(
            "the smoothing bound needs beta = 0 and alpha > 0".into(),
        ));
    }
    let per_time: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter(|s| s.t > 0.0)
        .map(|s| (s.t, required_c(s.omega.max_abs(), params.alpha, s.t)))
        .collect();
    let c = per_time.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(Bound112Fit { per_time, c })
}

/// Relative residual of the weighted Helmholtz identity behind the
/// pressure: `a⁻¹∇⊥φ` with `div(a⁻¹∇φ) = div(ω(αu⊥ + βu))`, `u = Ψ + v`,
/// against `ω(−αu + βu⊥) + ∇P` with its harmonic part removed.
pub fn pressure_consistency(
    state: &State,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    opts: &EllipticOptions,
) -> Result<f64> {
    let omega = &state.omega;
    let scale = state.v.scale_by(omega).l2_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let u = psi.add(&state.v);
    let flux = u.lincomb(-params.alpha, &perp(&u), params.beta).scale_by(omega);
    let g = perp(&u).lincomb(params.alpha, &u, params.beta).scale_by(omega);
    let (phi, _) = solve_div_b_grad(&pin.a_inv, &div(&g).scale(-1.0), opts)?;
    let lhs = perp(&grad(&phi)).scale_by(&pin.a_inv);
    let (p, _) = pressure(omega, &state.v, pin, psi, params, opts)?;
    let rhs = remove_harmonic(&flux.add(&grad(&p)), pin, opts)?;
    Ok(lhs.sub(&rhs).l2_norm() / scale)
}

/// Largest relative mass drift over a trajectory.
pub fn mass_drift(traj: &Trajectory) -> f64 {
    let m0 = mass(&traj.snapshots[0].omega);
    traj.snapshots
        .iter()
        .map(|s| (mass(&s.omega) - m0).abs() / m0.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// One line of the diagnostics CSV; NaN marks entries that do not apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRow {
    pub t: f64,
    pub mass: f64,
    pub linf: f64,
    pub l2: f64,
    pub lp: f64,
    pub p: f64,
    pub div_a_v_rel: f64,
    pub delort_res: f64,
    pub energy: f64,
    pub energy_rhs_res: f64,
    pub margin_r44_sharp: f64,
    pub margin_r44_univ: f64,
    pub fitted_c_112: f64,
}

#[derive(Debug, Clone)]
pub struct DiagOptions {
    pub p: f64,
    pub reference: Option<EnergyReference>,
}

impl Default for DiagOptions {
    fn default() -> Self {
        DiagOptions {
            p: 4.0,
            reference: None,
        }
    }
}

/// All rows of a trajectory, one per snapshot.
pub fn diagnostics_rows(
    traj: &Trajectory,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    opts: &DiagOptions,
) -> Vec<DiagRow> {
    let grid = *pin.grid();
    let zero_ref;
    let reference = match &opts.reference {
        Some(r) => r,
        None => {
            zero_ref = EnergyReference::zero(grid);
            &zero_ref
        }
    };
    let omega0 = &traj.snapshots[0].omega;
    let decay = check_decay_remark44(traj, omega0, params, psi, pin, opts.p).ok();
    let fit = check_bound_112(traj, params).ok();
    let energy_res = energy_identity_residual(traj, pin, psi, params, reference).ok();
    traj.snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let nan = f64::NAN;
            let (sharp, univ) = decay
                .as_ref()
                .map_or((nan, nan), |d| (d[i].sharp, d[i].universal));
            let fitted = fit.as_ref().map_or(nan, |f| {
                f.per_time.iter().find(|x| x.0 == s.t).map_or(nan, |x| x.1)
            });
            let eres = energy_res.as_ref().map_or(nan, |r| {
                if i >= 1 && i <= r.len() {
                    r[i - 1].1
                } else {
                    nan
                }
            });
            let delort = if params.regime == Regime::Incompressible {
                delort_residual(&s.v, pin)
            } else {
                nan
            };
            DiagRow {
                t: s.t,
                mass: mass(&s.omega),
                linf: s.omega.max_abs(),
                l2: lp_norm(&s.omega, 2.0),
                lp: lp_norm(&s.omega, opts.p),
                p: opts.p,
                div_a_v_rel: div_a_v_rel(s, pin),
                delort_res: delort,
                energy: energy(s, pin, reference),
                energy_rhs_res: eres,
                margin_r44_sharp: sharp,
                margin_r44_univ: univ,
                fitted_c_112: fitted,
            }
        })
        .collect()
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

impl DiagRow {
    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.mass,
            self.linf,
            self.l2,
            self.lp,
            self.p,
            self.div_a_v_rel,
            self.delort_res,
            self.energy,
            self.energy_rhs_res,
            self.margin_r44_sharp,
            self.margin_r44_univ,
            self.fitted_c_112,
        ]
    }

    pub fn to_csv(&self) -> String {
        self.values().iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(",")
    }

    pub fn from_csv(line: &str) -> Option<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok())
            .collect::<Option<_>>()?;
        if v.len() != 13 {
            return None;
        }
        Some(DiagRow {
            t: v[0],
            mass: v[1],
            linf: v[2],
            l2: v[3],
            lp: v[4],
            p: v[5],
            div_a_v_rel: v[6],
            delort_res: v[7],
            energy: v[8],
            energy_rhs_res: v[9],
            margin_r44_sharp: v[10],
            margin_r44_univ: v[11],
            fitted_c_112: v[12],
        })
    }
}

pub fn write_csv(rows: &[DiagRow], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

/// Parses a diagnostics CSV, rejecting any other header.
pub fn read_csv(text: &str) -> Option<Vec<DiagRow>> {
    let mut lines = text.lines();
    if lines.next()? != CSV_HEADER {
        return None;
    }
    lines.filter(|l| !l.is_empty()).map(DiagRow::from_csv).collect()
}
