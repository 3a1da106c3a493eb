//! Fourier-collocation machinery on the periodic box.
//!
//! Spectra are stored transposed: entry `mx * n + my` holds the mode with
//! integer wavenumbers `(mx, my)`. Derivative symbols zero the Nyquist
//! mode so that derivatives of real fields stay real.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fields::Grid2D;

struct Plan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan(n: usize) -> Arc<Plan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Spectral operator bundle for one grid.
#[derive(Clone)]
pub struct Spectral {
    plan: Arc<Plan>,
    /// 2π / l
    base: f64,
    /// derivative wavenumber per index (Nyquist zeroed), already scaled
    kd: Vec<f64>,
    /// full wavenumber per index (Nyquist kept), scaled
    kf: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: &Grid2D) -> Self {
        let n = grid.n();
        let base = 2.0 * PI / grid.l();
        let signed = |m: usize| -> f64 {
            if m <= n / 2 {
                m as f64
            } else {
                m as f64 - n as f64
            }
        };
        let kd = (0..n)
            .map(|m| if m == n / 2 { 0.0 } else { base * signed(m) })
            .collect();
        let kf = (0..n).map(|m| base * signed(m).abs()).collect();
        Spectral {
            plan: plan(n),
            base,
            kd,
            kf,
        }
    }

    pub fn n(&self) -> usize {
        self.plan.n
    }

    pub fn base_wavenumber(&self) -> f64 {
        self.base
    }

    /// Derivative wavenumbers `(kx, ky)` of spectral index `p`.
    #[inline]
    pub fn k(&self, p: usize) -> (f64, f64) {
        let n = self.plan.n;
        (self.kd[p / n], self.kd[p % n])
    }

    /// Squared magnitude of the full (Nyquist-retaining) wavenumber.
    #[inline]
    pub fn k2_full(&self, p: usize) -> f64 {
        let n = self.plan.n;
        let (a, b) = (self.kf[p / n], self.kf[p % n]);
        a * a + b * b
    }

    /// Symbol of `-div grad` composed from spectral first derivatives.
    #[inline]
    pub fn k2_deriv(&self, p: usize) -> f64 {
        let (a, b) = self.k(p);
        a * a + b * b
    }

    fn fft2_forward(&self, data: &mut [Complex64]) {
        let n = self.plan.n;
        self.plan.forward.process(data);
        transpose(data, n);
        self.plan.forward.process(data);
    }

    fn fft2_inverse(&self, data: &mut [Complex64]) {
        let n = self.plan.n;
        self.plan.inverse.process(data);
        transpose(data, n);
        self.plan.inverse.process(data);
        let norm = 1.0 / (n * n) as f64;
        for z in data.iter_mut() {
            *z *= norm;
        }
    }

    pub fn forward_real(&self, a: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft2_forward(&mut buf);
        buf
    }

    /// Transforms two real fields with one complex transform.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.plan.n;
        let mut z: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.fft2_forward(&mut z);
        let mut sa = vec![Complex64::new(0.0, 0.0); n * n];
        let mut sb = vec![Complex64::new(0.0, 0.0); n * n];
        for mx in 0..n {
            let nx = (n - mx) % n;
            for my in 0..n {
                let ny = (n - my) % n;
                let zk = z[mx * n + my];
                let zc = z[nx * n + ny].conj();
                sa[mx * n + my] = (zk + zc) * 0.5;
                // (zk - zc) / (2i)
                let d = zk - zc;
                sb[mx * n + my] = Complex64::new(d.im * 0.5, -d.re * 0.5);
            }
        }
        (sa, sb)
    }

    /// Inverse transform of a Hermitian spectrum; imaginary rounding is dropped.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.fft2_inverse(&mut spec);
        spec.into_iter().map(|z| z.re).collect()
    }

    /// Inverse of two Hermitian spectra packed into one complex transform.
    pub fn inverse_pair(&self, sa: &[Complex64], sb: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut z: Vec<Complex64> = sa.iter().zip(sb).map(|(&a, &b)| a + i * b).collect();
        self.fft2_inverse(&mut z);
        z.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// `(d/dx a, d/dy a)`.
    pub fn gradient(&self, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let s = self.forward_real(a);
        let i = Complex64::new(0.0, 1.0);
        let mut z: Vec<Complex64> = s
            .iter()
            .enumerate()
            .map(|(p, &c)| {
                let (kx, ky) = self.k(p);
                // i kx c + i * (i ky c)
                i * kx * c - ky * c
            })
            .collect();
        self.fft2_inverse(&mut z);
        z.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// `(div v, curl v)` of a vector field given by components.
    pub fn div_curl(&self, vx: &[f64], vy: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (sx, sy) = self.forward_pair(vx, vy);
        let i = Complex64::new(0.0, 1.0);
        let mut d = Vec::with_capacity(sx.len());
        let mut c = Vec::with_capacity(sx.len());
        for p in 0..sx.len() {
            let (kx, ky) = self.k(p);
            d.push(i * (kx * sx[p] + ky * sy[p]));
            c.push(i * (kx * sy[p] - ky * sx[p]));
        }
        self.inverse_pair(&d, &c)
    }

    pub fn divergence(&self, vx: &[f64], vy: &[f64]) -> Vec<f64> {
        let (sx, sy) = self.forward_pair(vx, vy);
        let i = Complex64::new(0.0, 1.0);
        let d: Vec<Complex64> = (0..sx.len())
            .map(|p| {
                let (kx, ky) = self.k(p);
                i * (kx * sx[p] + ky * sy[p])
            })
            .collect();
        self.inverse_real(d)
    }

    pub fn curl(&self, vx: &[f64], vy: &[f64]) -> Vec<f64> {
        let (sx, sy) = self.forward_pair(vx, vy);
        let i = Complex64::new(0.0, 1.0);
        let c: Vec<Complex64> = (0..sx.len())
            .map(|p| {
                let (kx, ky) = self.k(p);
                i * (kx * sy[p] - ky * sx[p])
            })
            .collect();
        self.inverse_real(c)
    }

    /// Spectral Laplacian with the full wavenumber symbol.
    pub fn laplacian(&self, a: &[f64]) -> Vec<f64> {
        let mut s = self.forward_real(a);
        for (p, c) in s.iter_mut().enumerate() {
            *c *= -self.k2_full(p);
        }
        self.inverse_real(s)
    }

    /// Multiplies each mode by `symbol(p)` and transforms back.
    pub fn apply_symbol(&self, a: &[f64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut s = self.forward_real(a);
        for (p, c) in s.iter_mut().enumerate() {
            *c *= symbol(p);
        }
        self.inverse_real(s)
    }

    /// Values of `ax` shifted half a cell along x and of `ay` shifted half a
    /// cell along y, i.e. band-limited interpolation onto cell faces.
    pub fn face_values(&self, ax: &[f64], ay: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.plan.n;
        let (mut sx, mut sy) = self.forward_pair(ax, ay);
        for mx in 0..n {
            for my in 0..n {
                let p = mx * n + my;
                let (kx, ky) = (self.kd[mx], self.kd[my]);
                let half = 0.5 * dx;
                sx[p] *= Complex64::from_polar(if mx == n / 2 { 0.0 } else { 1.0 }, kx * half);
                sy[p] *= Complex64::from_polar(if my == n / 2 { 0.0 } else { 1.0 }, ky * half);
            }
        }
        self.inverse_pair(&sx, &sy)
    }

    /// Indices of the modes annihilated by `-div(b grad ·)`: the constant
    /// mode and the three modes built from Nyquist/zero wavenumbers.
    pub fn null_modes(&self) -> [usize; 4] {
        let n = self.plan.n;
        let h = n / 2;
        [0, h * n, h, h * n + h]
    }
}

/// Removes the mean and the three Nyquist-only checkerboard components,
/// which lie outside the range of spectral divergence operators.
pub fn project_range(spectral: &Spectral, a: &mut [f64]) {
    let n = spectral.n();
    // real-space projections onto 1, (-1)^i, (-1)^j, (-1)^(i+j)
    let mut c = [0.0f64; 4];
    for j in 0..n {
        for i in 0..n {
            let x = a[j * n + i];
            let si = if i % 2 == 0 { 1.0 } else { -1.0 };
            let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
            c[0] += x;
            c[1] += si * x;
            c[2] += sj * x;
            c[3] += si * sj * x;
        }
    }
    let inv = 1.0 / (n * n) as f64;
    for v in c.iter_mut() {
        *v *= inv;
    }
    for j in 0..n {
        for i in 0..n {
            let si = if i % 2 == 0 { 1.0 } else { -1.0 };
            let sj = if j % 2 == 0 { 1.0 } else { -1.0 };
            a[j * n + i] -= c[0] + c[1] * si + c[2] * sj + c[3] * si * sj;
        }
    }
}
