//! Time integration of the vorticity formulation for both models and the
//! Picard iteration used to validate local existence.
//!
//! `omega` is moved by a flux-form MUSCL scheme with SSP-RK2 (Heun) in
//! time; `zeta` uses an integrating-factor Heun step in which the heat part
//! is exact in Fourier space. The supercurrent is rebuilt from
//! `(omega, zeta)` after every stage.

use crate::elliptic::{reconstruct_velocity, EllipticOptions};
use crate::error::{Error, Result};
use crate::fields::{perp, Grid2D, ModelParams, PinningProfile, Regime, ScalarField, State, VectorField, TOL_POS};
use crate::spectral::Spectral;

/// Courant number up to which limited MUSCL + Heun keeps `omega >= 0`.
pub const POSITIVITY_CFL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limiter {
    VanLeer,
    MinMod,
    None,
}

impl Limiter {
    pub fn name(&self) -> &'static str {
        match self {
            Limiter::VanLeer => "van_leer",
            Limiter::MinMod => "minmod",
            Limiter::None => "none",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "van_leer" => Some(Limiter::VanLeer),
            "minmod" => Some(Limiter::MinMod),
            "none" => Some(Limiter::None),
            _ => None,
        }
    }

    #[inline]
    fn slope(&self, a: f64, b: f64) -> f64 {
        match self {
            Limiter::VanLeer => {
                if a * b > 0.0 {
                    2.0 * a * b / (a + b)
                } else {
                    0.0
                }
            }
            Limiter::MinMod => {
                if a * b > 0.0 {
                    if a.abs() < b.abs() {
                        a
                    } else {
                        b
                    }
                } else {
                    0.0
                }
            }
            Limiter::None => 0.5 * (a + b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaScheme {
    /// Heat part integrated exactly in Fourier space, drift and source explicit.
    Imex,
    Explicit,
}

impl ZetaScheme {
    pub fn name(&self) -> &'static str {
        match self {
            ZetaScheme::Imex => "imex",
            ZetaScheme::Explicit => "explicit",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "imex" => Some(ZetaScheme::Imex),
            "explicit" => Some(ZetaScheme::Explicit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub cfl: f64,
    pub dt_max: f64,
    pub limiter: Limiter,
    pub zeta_scheme: ZetaScheme,
    pub elliptic: EllipticOptions,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            cfl: 0.4,
            dt_max: 0.05,
            limiter: Limiter::VanLeer,
            zeta_scheme: ZetaScheme::Imex,
            elliptic: EllipticOptions::default(),
        }
    }
}

impl StepOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::InvalidParameter(format!(
                "cfl = {} must lie in (0, 0.9]",
                self.cfl
            )));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt_max = {} must be positive",
                self.dt_max
            )));
        }
        self.elliptic.validate()
    }

    /// Courant bound enforced on the second Heun stage, whose velocity is
    /// only known after the step has started.
    fn stage_cfl(&self) -> f64 {
        self.cfl.max(POSITIVITY_CFL)
    }
}

/// Flux velocity `w = α(Ψ+v)⊥ + β(Ψ+v)`; `omega` is advected by `-w`.
pub fn transport_velocity(v: &VectorField, psi: &VectorField, params: &ModelParams) -> VectorField {
    let u = psi.add(v);
    perp(&u).lincomb(params.alpha, &u, params.beta)
}

/// Advecting velocity `-w` sampled on cell faces: `cx` at `(i+½, j)`,
/// `cy` at `(i, j+½)`.
#[derive(Debug, Clone)]
pub struct FaceVelocity {
    cx: Vec<f64>,
    cy: Vec<f64>,
    speed: f64,
}

impl FaceVelocity {
    pub fn new(w: &VectorField) -> Self {
        let grid = *w.grid();
        let sp = Spectral::new(&grid);
        let (mut cx, mut cy) = sp.face_values(&w.x, &w.y, grid.dx());
        cx.iter_mut().for_each(|c| *c = -*c);
        cy.iter_mut().for_each(|c| *c = -*c);
        let mx = cx.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let my = cy.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        FaceVelocity {
            cx,
            cy,
            speed: mx + my,
        }
    }

    /// `max|c_x| + max|c_y|` over faces.
    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Largest step with Courant number `cfl`.
    pub fn dt_limit(&self, dx: f64, cfl: f64) -> f64 {
        if self.speed == 0.0 {
            f64::INFINITY
        } else {
            cfl * dx / self.speed
        }
    }
}

fn check_cfl(dt: f64, limit: f64) -> Result<()> {
    if dt > limit * (1.0 + 1e-12) {
        Err(Error::CflViolation { dt, limit })
    } else {
        Ok(())
    }
}

/// `-div(omega c)` by limited MUSCL fluxes.
fn transport_rhs(grid: &Grid2D, omega: &[f64], c: &FaceVelocity, limiter: Limiter) -> Vec<f64> {
    let n = grid.n();
    let inv_dx = 1.0 / grid.dx();
    let mut sx = vec![0.0; n * n];
    let mut sy = vec![0.0; n * n];
    for j in 0..n {
        let jp = (j + 1) % n;
        let jm = (j + n - 1) % n;
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let w = omega[j * n + i];
            sx[j * n + i] = limiter.slope(w - omega[j * n + im], omega[j * n + ip] - w);
            sy[j * n + i] = limiter.slope(w - omega[jm * n + i], omega[jp * n + i] - w);
        }
    }
    // upwinded face fluxes: fx[k] at (i+1/2, j), fy[k] at (i, j+1/2)
    let mut fx = vec![0.0; n * n];
    let mut fy = vec![0.0; n * n];
    for j in 0..n {
        let jp = (j + 1) % n;
        for i in 0..n {
            let ip = (i + 1) % n;
            let k = j * n + i;
            let cx = c.cx[k];
            fx[k] = if cx >= 0.0 {
                cx * (omega[k] + 0.5 * sx[k])
            } else {
                let r = j * n + ip;
                cx * (omega[r] - 0.5 * sx[r])
            };
            let cy = c.cy[k];
            fy[k] = if cy >= 0.0 {
                cy * (omega[k] + 0.5 * sy[k])
            } else {
                let u = jp * n + i;
                cy * (omega[u] - 0.5 * sy[u])
            };
        }
    }
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        let jm = (j + n - 1) % n;
        for i in 0..n {
            let im = (i + n - 1) % n;
            let k = j * n + i;
            out[k] = -(fx[k] - fx[j * n + im] + fy[k] - fy[jm * n + i]) * inv_dx;
        }
    }
    out
}

/// Heun step with face velocities `c0` at the start and `c1` at the end.
fn heun_transport(
    omega: &ScalarField,
    c0: &FaceVelocity,
    c1: &FaceVelocity,
    dt: f64,
    limiter: Limiter,
) -> ScalarField {
    let grid = *omega.grid();
    let w0 = omega.data();
    let l0 = transport_rhs(&grid, w0, c0, limiter);
    let w1: Vec<f64> = w0.iter().zip(&l0).map(|(w, l)| w + dt * l).collect();
    let l1 = transport_rhs(&grid, &w1, c1, limiter);
    let out = (0..w0.len())
        .map(|k| 0.5 * (w0[k] + (w1[k] + dt * l1[k])))
        .collect();
    ScalarField::from_raw(grid, out)
}

/// One Heun step of `∂_t omega = div(omega w)` with frozen flux velocity `w`.
pub fn step_vorticity(
    omega: &ScalarField,
    w: &VectorField,
    dt: f64,
    opts: &StepOptions,
) -> Result<ScalarField> {
    if omega.grid() != w.grid() {
        return Err(Error::GridMismatch);
    }
    let c = FaceVelocity::new(w);
    check_cfl(dt, c.dt_limit(omega.grid().dx(), opts.cfl))?;
    Ok(heun_transport(omega, &c, &c, dt, opts.limiter))
}

/// `div(a omega (−α(Ψ+v) + β(Ψ+v)⊥))`, the source of the `zeta` equation.
pub fn zeta_source(
    omega: &ScalarField,
    v: &VectorField,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
) -> ScalarField {
    let grid = *omega.grid();
    let u = psi.add(v);
    let f = u
        .lincomb(-params.alpha, &perp(&u), params.beta)
        .scale_by(omega)
        .scale_by(&pin.a);
    let sp = Spectral::new(&grid);
    ScalarField::from_raw(grid, sp.divergence(&f.x, &f.y))
}

/// Heun-type stepper for `∂_t ζ = λΔζ − λ div(ζ∇h) + s(t)`.
struct ZetaStepper<'a> {
    sp: Spectral,
    pin: &'a PinningProfile,
    lambda: f64,
    dt: f64,
    scheme: ZetaScheme,
}

/// Data carried from the first stage to the second.
struct ZetaCarry {
    zeta0: Vec<f64>,
    predictor: Vec<f64>,
}

impl<'a> ZetaStepper<'a> {
    fn new(pin: &'a PinningProfile, lambda: f64, dt: f64, scheme: ZetaScheme) -> Result<Self> {
        let sp = Spectral::new(pin.grid());
        if scheme == ZetaScheme::Explicit && lambda > 0.0 {
            let n = sp.n();
            let kmax2 = (0..n * n).map(|p| sp.k2_full(p)).fold(0.0, f64::max);
            let limit = 2.0 / (lambda * kmax2);
            check_cfl(dt, limit)?;
        }
        Ok(ZetaStepper {
            sp,
            pin,
            lambda,
            dt,
            scheme,
        })
    }

    /// Explicit part: drift (and diffusion for the explicit scheme) plus source.
    fn nonstiff(&self, zeta: &[f64], source: &ScalarField) -> Vec<f64> {
        let mut out = source.data().to_vec();
        if self.lambda == 0.0 {
            return out;
        }
        let g = &self.pin.grad_h;
        if !self.pin.is_flat() {
            let fx: Vec<f64> = zeta.iter().zip(&g.x).map(|(z, h)| z * h).collect();
            let fy: Vec<f64> = zeta.iter().zip(&g.y).map(|(z, h)| z * h).collect();
            let d = self.sp.divergence(&fx, &fy);
            for (o, d) in out.iter_mut().zip(&d) {
                *o -= self.lambda * d;
            }
        }
        if self.scheme == ZetaScheme::Explicit {
            let lap = self.sp.laplacian(zeta);
            for (o, l) in out.iter_mut().zip(&lap) {
                *o += self.lambda * l;
            }
        }
        out
    }

    fn heat(&self, a: &[f64]) -> Vec<f64> {
        if self.scheme == ZetaScheme::Explicit || self.lambda == 0.0 {
            return a.to_vec();
        }
        let c = self.lambda * self.dt;
        self.sp.apply_symbol(a, |p| (-c * self.sp.k2_full(p)).exp())
    }

    fn stage1(&self, zeta0: &[f64], s0: &ScalarField) -> (Vec<f64>, ZetaCarry) {
        let n0 = self.nonstiff(zeta0, s0);
        let predictor: Vec<f64> = zeta0.iter().zip(&n0).map(|(z, n)| z + self.dt * n).collect();
        let zeta1 = self.heat(&predictor);
        (
            zeta1,
            ZetaCarry {
                zeta0: zeta0.to_vec(),
                predictor,
            },
        )
    }

    fn stage2(&self, carry: ZetaCarry, zeta1: &[f64], s1: &ScalarField) -> Vec<f64> {
        let n1 = self.nonstiff(zeta1, s1);
        let dt = self.dt;
        match self.scheme {
            ZetaScheme::Explicit => (0..zeta1.len())
                .map(|k| 0.5 * (carry.zeta0[k] + zeta1[k] + dt * n1[k]))
                .collect(),
            ZetaScheme::Imex => {
                // E ζ0 + dt/2 (E N0 + N1) = E (ζ0 + predictor)/2 + dt/2 N1
                let mid: Vec<f64> = carry
                    .zeta0
                    .iter()
                    .zip(&carry.predictor)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                let e = self.heat(&mid);
                e.iter().zip(&n1).map(|(e, n)| e + 0.5 * dt * n).collect()
            }
        }
    }
}

/// One step of the `zeta` equation with source `s0` at the start of the step
/// and `s1` at its end.
pub fn step_zeta_with_sources(
    zeta: &ScalarField,
    pin: &PinningProfile,
    lambda: f64,
    dt: f64,
    s0: &ScalarField,
    s1: &ScalarField,
    scheme: ZetaScheme,
) -> Result<ScalarField> {
    let st = ZetaStepper::new(pin, lambda, dt, scheme)?;
    let (z1, carry) = st.stage1(zeta.data(), s0);
    Ok(ScalarField::from_raw(*zeta.grid(), st.stage2(carry, &z1, s1)))
}

/// One step of `∂_t ζ − λΔζ + λ div(ζ∇h) = div(aω(−α(Ψ+v) + β(Ψ+v)⊥))`
/// with `omega` and `v` frozen over the step.
#[allow(clippy::too_many_arguments)]
pub fn step_zeta(
    zeta: &ScalarField,
    omega: &ScalarField,
    v: &VectorField,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<ScalarField> {
    if !params.regime.evolves_zeta() {
        return Err(Error::RegimeMismatch(
            "zeta is not evolved in the incompressible regime".into(),
        ));
    }
    let w = transport_velocity(v, psi, params);
    let c = FaceVelocity::new(&w);
    let dx = omega.grid().dx();
    check_cfl(dt, c.dt_limit(dx, opts.cfl))?;
    let s = zeta_source(omega, v, pin, psi, params);
    step_zeta_with_sources(
        zeta,
        pin,
        params.effective_lambda(),
        dt,
        &s,
        &s,
        opts.zeta_scheme,
    )
}

/// Largest admissible step for the current state: transport CFL plus the
/// explicit drift speed `λ max|∇h|` in compressible runs.
pub fn stable_dt(
    state: &State,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    opts: &StepOptions,
) -> f64 {
    let c = FaceVelocity::new(&transport_velocity(&state.v, psi, params));
    let drift = params.effective_lambda() * pin.grad_h.cfl_speed();
    let speed = c.speed() + drift;
    let limit = if speed == 0.0 {
        f64::INFINITY
    } else {
        opts.cfl * state.grid().dx() / speed
    };
    limit.min(opts.dt_max)
}

/// Builds the initial state, reconstructing `v` from `(omega0, zeta0)`.
pub fn initial_state(
    omega0: ScalarField,
    zeta0: ScalarField,
    pin: &PinningProfile,
    params: &ModelParams,
    opts: &StepOptions,
) -> Result<State> {
    params.validate()?;
    let min = omega0.min();
    if min < -TOL_POS {
        return Err(Error::NegativeVorticity { min });
    }
    let zeta = if params.regime.evolves_zeta() {
        zeta0
    } else {
        ScalarField::zeros(*omega0.grid())
    };
    let (v, _) = reconstruct_velocity(&omega0, &zeta, pin, &opts.elliptic)?;
    Ok(State {
        t: 0.0,
        v,
        omega: omega0,
        zeta,
    })
}

/// Per-step bookkeeping returned by [`advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    pub elliptic_iters: usize,
    pub elliptic_residual: f64,
}

/// Advances `(omega, zeta)` by one Heun step of the coupled system and
/// rebuilds `v`; the second stage uses the velocity of the predicted state.
pub fn advance(
    state: &State,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    dt: f64,
    opts: &StepOptions,
) -> Result<(State, StepInfo)> {
    let grid = *state.grid();
    let dx = grid.dx();
    let w0 = transport_velocity(&state.v, psi, params);
    let c0 = FaceVelocity::new(&w0);
    let drift = params.effective_lambda() * pin.grad_h.cfl_speed();
    let speed0 = c0.speed() + drift;
    if speed0 > 0.0 {
        check_cfl(dt, opts.cfl * dx / speed0)?;
    }
    let evolve_zeta = params.regime.evolves_zeta();
    let zs = ZetaStepper::new(pin, params.effective_lambda(), dt, opts.zeta_scheme)?;

    let l0 = transport_rhs(&grid, state.omega.data(), &c0, opts.limiter);
    let om1: Vec<f64> = state
        .omega
        .data()
        .iter()
        .zip(&l0)
        .map(|(w, l)| w + dt * l)
        .collect();
    let om1 = ScalarField::from_raw(grid, om1);
    let (z1, carry) = if evolve_zeta {
        let s0 = zeta_source(&state.omega, &state.v, pin, psi, params);
        let (z1, carry) = zs.stage1(state.zeta.data(), &s0);
        (ScalarField::from_raw(grid, z1), Some(carry))
    } else {
        (ScalarField::zeros(grid), None)
    };
    let (v1, rep1) = reconstruct_velocity(&om1, &z1, pin, &opts.elliptic)?;

    let w1 = transport_velocity(&v1, psi, params);
    let c1 = FaceVelocity::new(&w1);
    if c1.speed() + drift > 0.0 {
        check_cfl(dt, opts.stage_cfl() * dx / (c1.speed() + drift))?;
    }
    let l1 = transport_rhs(&grid, om1.data(), &c1, opts.limiter);
    let w_old = state.omega.data();
    let om: Vec<f64> = (0..grid.len())
        .map(|k| 0.5 * (w_old[k] + (om1.data()[k] + dt * l1[k])))
        .collect();
    let omega = ScalarField::from_raw(grid, om);
    let zeta = match carry {
        Some(carry) => {
            let s1 = zeta_source(&om1, &v1, pin, psi, params);
            ScalarField::from_raw(grid, zs.stage2(carry, z1.data(), &s1))
        }
        None => ScalarField::zeros(grid),
    };
    if !omega.is_finite() || !zeta.is_finite() {
        return Err(Error::NonFinite("evolved state"));
    }
    let (v, rep2) = reconstruct_velocity(&omega, &zeta, pin, &opts.elliptic)?;
    Ok((
        State {
            t: state.t + dt,
            v,
            omega,
            zeta,
        },
        StepInfo {
            dt,
            elliptic_iters: rep1.iters + rep2.iters,
            elliptic_residual: rep1.residual.max(rep2.residual),
        },
    ))
}

/// Scalars recorded after every step (and for the initial state).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    /// `‖div(a v) − (zeta − mean zeta)‖₂ / ‖v‖₂`
    pub div_a_v_rel: f64,
    pub elliptic_iters: usize,
}

/// Relative defect of the constraint `div(a v) = zeta - mean(zeta)`.
pub fn div_a_v_rel(state: &State, pin: &PinningProfile) -> f64 {
    let vn = state.v.l2_norm();
    if vn == 0.0 {
        return 0.0;
    }
    let av = state.v.scale_by(&pin.a);
    let sp = Spectral::new(state.grid());
    let d = ScalarField::from_raw(*state.grid(), sp.divergence(&av.x, &av.y));
    let target = state.zeta.offset(-state.zeta.mean());
    d.sub(&target).l2_norm() / vn
}

fn record(step: usize, state: &State, dt: f64, iters: usize, pin: &PinningProfile) -> StepRecord {
    StepRecord {
        step,
        t: state.t,
        dt,
        mass: state.omega.integral(),
        min: state.omega.min(),
        max: state.omega.max(),
        div_a_v_rel: div_a_v_rel(state, pin),
        elliptic_iters: iters,
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Snapshot times.
    pub times: Vec<f64>,
    pub snapshots: Vec<State>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

/// Everything a run needs besides the configuration file plumbing.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub initial: State,
    pub pin: PinningProfile,
    pub psi: VectorField,
    pub params: ModelParams,
    pub t_end: f64,
    pub opts: StepOptions,
    /// Keep every `snapshot_stride`-th step (the final state is always kept).
    pub snapshot_stride: usize,
}

/// Runs to `t_end`; on failure returns the trajectory computed so far
/// together with the error.
pub fn run_partial(setup: &RunSetup) -> (Trajectory, Option<Error>) {
    run_observed(setup, |_, _| {})
}

/// [`run_partial`] with a callback invoked on every retained snapshot.
pub fn run_observed(
    setup: &RunSetup,
    mut on_snapshot: impl FnMut(&State, &StepRecord),
) -> (Trajectory, Option<Error>) {
    let mut state = setup.initial.clone();
    let rec0 = record(0, &state, 0.0, 0, &setup.pin);
    on_snapshot(&state, &rec0);
    let mut traj = Trajectory {
        times: vec![state.t],
        snapshots: vec![state.clone()],
        records: vec![rec0],
    };
    let fail = |traj: Trajectory, e: Error| (traj, Some(e));
    if let Err(e) = setup.opts.validate().and_then(|_| setup.params.validate()) {
        return fail(traj, e);
    }
    if !(setup.t_end >= 0.0 && setup.t_end.is_finite()) {
        return fail(
            traj,
            Error::InvalidParameter(format!("T = {} must be >= 0", setup.t_end)),
        );
    }
    let stride = setup.snapshot_stride.max(1);
    let t_end = setup.t_end;
    let eps = 1e-12 * t_end.max(1.0);
    let mut step = 0;
    while state.t < t_end - eps {
        let mut dt = stable_dt(&state, &setup.pin, &setup.psi, &setup.params, &setup.opts);
        let remaining = t_end - state.t;
        if dt >= remaining - eps {
            dt = remaining;
        }
        let mut attempt = 0;
        let (next, info) = loop {
            match advance(&state, &setup.pin, &setup.psi, &setup.params, dt, &setup.opts) {
                Ok(r) => break r,
                Err(Error::CflViolation { .. }) if attempt < 20 => {
                    attempt += 1;
                    dt *= 0.5;
                }
                Err(e) => return fail(traj, e),
            }
        };
        step += 1;
        state = next;
        if (t_end - state.t).abs() <= eps {
            state.t = t_end;
        }
        let rec = record(step, &state, info.dt, info.elliptic_iters, &setup.pin);
        traj.records.push(rec);
        let last = state.t >= t_end - eps;
        if step % stride == 0 || last {
            on_snapshot(&state, &rec);
            traj.times.push(state.t);
            traj.snapshots.push(state.clone());
        }
    }
    (traj, None)
}

pub fn run(setup: &RunSetup) -> Result<Trajectory> {
    match run_partial(setup) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterates: usize,
    /// `max_t ‖v_{n+1} − v_n‖∞` for each completed iterate.
    pub sup_diffs: Vec<f64>,
}

/// Picard iteration on `[0, t_end]`: given `v_n(t)`, solve the linear
/// transport for `omega_{n+1}` and the linear transport-diffusion for
/// `zeta_{n+1}` (source built from `(omega_n, v_n)`), then rebuild
/// `v_{n+1}`. All iterates share one uniform time grid fixed by the CFL
/// condition on `v°`.
#[allow(clippy::too_many_arguments)]
pub fn picard_local(
    initial: &State,
    pin: &PinningProfile,
    psi: &VectorField,
    params: &ModelParams,
    t_end: f64,
    n_iters: usize,
    opts: &StepOptions,
) -> Result<(Trajectory, PicardReport)> {
    opts.validate()?;
    params.validate()?;
    match params.regime {
        Regime::Incompressible => {}
        Regime::Compressible if params.lambda > 0.0 => {}
        _ => {
            return Err(Error::RegimeMismatch(
                "Picard iteration needs the incompressible regime or lambda > 0".into(),
            ))
        }
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("T = {t_end} must be > 0")));
    }
    let grid = *initial.grid();
    let dx = grid.dx();
    let dt0 = stable_dt(initial, pin, psi, params, opts);
    let steps = ((t_end / dt0).ceil() as usize).max(1);
    let dt = t_end / steps as f64;
    let evolve_zeta = params.regime.evolves_zeta();
    let lambda = params.effective_lambda();
    let drift = lambda * pin.grad_h.cfl_speed();

    let mut omegas = vec![initial.omega.clone(); steps + 1];
    let mut zetas = vec![initial.zeta.clone(); steps + 1];
    let mut vs = vec![initial.v.clone(); steps + 1];
    let mut sup_diffs = Vec::new();
    let mut rising = 0;
    for _ in 0..n_iters {
        let faces: Vec<FaceVelocity> = vs
            .iter()
            .map(|v| FaceVelocity::new(&transport_velocity(v, psi, params)))
            .collect();
        for c in &faces {
            if c.speed() + drift > 0.0 {
                check_cfl(dt, opts.stage_cfl() * dx / (c.speed() + drift))?;
            }
        }
        let mut new_omegas = Vec::with_capacity(steps + 1);
        new_omegas.push(initial.omega.clone());
        for k in 0..steps {
            let next = heun_transport(&new_omegas[k], &faces[k], &faces[k + 1], dt, opts.limiter);
            new_omegas.push(next);
        }
        let mut new_zetas = Vec::with_capacity(steps + 1);
        new_zetas.push(initial.zeta.clone());
        if evolve_zeta {
            let sources: Vec<ScalarField> = (0..=steps)
                .map(|k| zeta_source(&omegas[k], &vs[k], pin, psi, params))
                .collect();
            for k in 0..steps {
                let next = step_zeta_with_sources(
                    &new_zetas[k],
                    pin,
                    lambda,
                    dt,
                    &sources[k],
                    &sources[k + 1],
                    opts.zeta_scheme,
                )?;
                new_zetas.push(next);
            }
        } else {
            new_zetas.resize(steps + 1, ScalarField::zeros(grid));
        }
        let mut new_vs = Vec::with_capacity(steps + 1);
        let mut sup: f64 = 0.0;
        let mut vmax: f64 = 0.0;
        for k in 0..=steps {
            let (v, _) = reconstruct_velocity(&new_omegas[k], &new_zetas[k], pin, &opts.elliptic)?;
            sup = sup.max(v.sub(&vs[k]).max_norm());
            vmax = vmax.max(v.max_norm());
            new_vs.push(v);
        }
        omegas = new_omegas;
        zetas = new_zetas;
        vs = new_vs;
        if let Some(&prev) = sup_diffs.last() {
            if sup > prev {
                rising += 1;
            } else {
                rising = 0;
            }
        }
        sup_diffs.push(sup);
        if rising >= 3 {
            return Err(Error::Divergence { sup_diffs });
        }
        if sup <= 10.0 * opts.elliptic.tol * vmax {
            break;
        }
    }
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        snapshots: Vec::with_capacity(steps + 1),
        records: Vec::with_capacity(steps + 1),
    };
    for (k, ((omega, zeta), v)) in omegas.into_iter().zip(zetas).zip(vs).enumerate() {
        let t = if k == steps { t_end } else { k as f64 * dt };
        let state = State { t, v, omega, zeta };
        traj.records.push(record(k, &state, if k == 0 { 0.0 } else { dt }, 0, pin));
        traj.times.push(t);
        traj.snapshots.push(state);
    }
    let report = PicardReport {
        iterates: sup_diffs.len(),
        sup_diffs,
    };
    Ok((traj, report))
}
