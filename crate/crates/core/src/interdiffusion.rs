//! Inter-diffusion waves `ξ_i` (and the linear variant `ζ_i`) by a Fourier
//! pseudospectral integrating-factor RK4 scheme, plus the `𝒱`/`𝒲` functionals.

use crate::analysis::{decade_rule, fit_decay, Bounded, DecayFit};
use crate::diffusion::DiffusionWave;
use crate::error::{Error, Result};
use crate::model::{eigen_structure, FluidParams, MassPair};
use crate::quad;
use crate::weights::psi;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Snapshot times `t0 * 2^(k/per_octave)` up to `t1`, with `t1` appended.
pub fn geometric_times(t0: f64, t1: f64, per_octave: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let r = 2f64.powf(1.0 / per_octave as f64);
    let mut k = 0;
    loop {
        let t = t0 * r.powi(k);
        if t >= t1 * (1.0 - 1e-12) {
            break;
        }
        // round to 1e-9 so every run produces identical time stamps
        out.push((t * 1e9).round() / 1e9);
        k += 1;
    }
    out.push(t1);
    out
}

/// Periodic-box discretisation of the wave equations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    /// Half-width of the box `[-L, L)`.
    pub l: f64,
    /// Number of grid points (power of two).
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub snapshot_times: Vec<f64>,
}

impl SpectralConfig {
    /// `c(T+1) + 12 sqrt(ν(T+1))`.
    pub fn min_half_width(p: &FluidParams, t_final: f64) -> f64 {
        p.c * (t_final + 1.0) + 12.0 * (p.nu * (t_final + 1.0)).sqrt()
    }

    /// Box sized for `t_final`, spacing at most `dx`, geometric snapshots from t=1.
    pub fn for_horizon(p: &FluidParams, t_final: f64, dx: f64) -> Self {
        let l = (Self::min_half_width(p, t_final) * 1.05 / 10.0).ceil() * 10.0;
        let n = ((2.0 * l / dx).ceil() as usize).next_power_of_two();
        SpectralConfig {
            l,
            n,
            dt: 0.05,
            t_final,
            dealias: true,
            snapshot_times: geometric_times(1.0, t_final, 8),
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|j| -self.l + j as f64 * h).collect()
    }

    pub fn validate(&self, p: &FluidParams) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(Error::Param(format!("N must be a power of two >= 16, got {}", self.n)));
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            return Err(Error::Param("dt and T must be positive".into()));
        }
        let need = Self::min_half_width(p, self.t_final);
        if self.l < need {
            return Err(Error::Param(format!(
                "box half-width L={} is below c(T+1)+12 sqrt(nu(T+1)) = {need:.3}",
                self.l
            )));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Param("snapshot times must be strictly increasing".into()));
        }
        if self.snapshot_times.iter().any(|&t| t <= 0.0 || t > self.t_final) {
            return Err(Error::Param("snapshot times must lie in (0, T]".into()));
        }
        // explicit part: RK4 stability along the imaginary axis is about 2.8
        let kmax = PI / self.h() * if self.dealias { 2.0 / 3.0 } else { 1.0 };
        if self.dt * kmax * 0.5 > 2.8 {
            return Err(Error::Param(format!(
                "dt={} too large for the resolved advection frequencies; use dt <= {:.3e}",
                self.dt,
                5.6 / kmax
            )));
        }
        Ok(())
    }
}

/// Space-time samples of a scalar field on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl WaveField {
    pub fn h(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.x[0]) / self.h()).round();
        k.clamp(0.0, (self.x.len() - 1) as f64) as usize
    }

    pub fn nearest(&self, snap: usize, x: f64) -> f64 {
        self.values[snap][self.nearest_index(x)]
    }

    /// Four-point Lagrange interpolation.
    pub fn interp(&self, snap: usize, x: f64) -> f64 {
        let h = self.h();
        let n = self.x.len();
        let s = (x - self.x[0]) / h;
        let j = (s.floor() as isize).clamp(1, n as isize - 3) as usize;
        let f = s - j as f64;
        let v = &self.values[snap];
        let (a, b, c, d) = (v[j - 1], v[j], v[j + 1], v[j + 2]);
        -f * (f - 1.0) * (f - 2.0) / 6.0 * a + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * b
            - (f + 1.0) * f * (f - 2.0) / 2.0 * c
            + (f + 1.0) * f * (f - 1.0) / 6.0 * d
    }

    /// Periodic rectangle rule (spectrally accurate on the box).
    pub fn integral(&self, snap: usize) -> f64 {
        self.h() * self.values[snap].iter().sum::<f64>()
    }

    /// Fourth-order central difference `∂_x` of a snapshot.
    pub fn dx(&self, snap: usize) -> Vec<f64> {
        let v = &self.values[snap];
        let n = v.len();
        let h = self.h();
        (0..n)
            .map(|j| {
                let at = |o: isize| v[((j as isize + o).rem_euclid(n as isize)) as usize];
                (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h)
            })
            .collect()
    }

    pub fn snapshot_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Equation {
    Xi,
    Zeta,
}

struct Solver {
    n: usize,
    l: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    mask: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    own: DiffusionWave,
    other: DiffusionWave,
    lambda: f64,
    nu: f64,
    eq: Equation,
    scratch: Vec<Complex64>,
    buf: Vec<Complex64>,
}

struct Coeffs {
    own: Vec<f64>,
    src: Vec<f64>,
}

impl Solver {
    fn coeffs(&self, t: f64) -> Coeffs {
        let h = 2.0 * self.l / self.n as f64;
        let fill = |w: &DiffusionWave, square: bool| {
            let mut out = vec![0.0; self.n];
            if w.mass == 0.0 {
                return out;
            }
            let (lo, hi) = w.support(t, 10.0);
            let j0 = (((lo + self.l) / h).floor().max(0.0)) as usize;
            let j1 = ((((hi + self.l) / h).ceil()) as usize).min(self.n - 1);
            for j in j0..=j1 {
                let th = w.theta(self.x[j], t);
                out[j] = if square { 0.5 * th * th } else { th };
            }
            out
        };
        Coeffs {
            own: if self.eq == Equation::Xi { fill(&self.own, false) } else { Vec::new() },
            src: fill(&self.other, true),
        }
    }

    // -ik · P[ θ_i ξ + θ_{i'}²/2 ] in Fourier space
    fn rhs(&mut self, xi_hat: &[Complex64], co: &Coeffs, out: &mut [Complex64]) {
        let n = self.n;
        let inv_n = 1.0 / n as f64;
        if self.eq == Equation::Xi {
            self.buf.copy_from_slice(xi_hat);
            self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
            for j in 0..n {
                let xi = self.buf[j].re * inv_n;
                self.buf[j] = Complex64::new(co.own[j] * xi + co.src[j], 0.0);
            }
        } else {
            for j in 0..n {
                self.buf[j] = Complex64::new(co.src[j], 0.0);
            }
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        for m in 0..n {
            out[m] = Complex64::new(0.0, -self.k[m]) * self.buf[m] * self.mask[m];
        }
    }

    fn physical(&mut self, hat: &[Complex64]) -> Vec<f64> {
        self.buf.copy_from_slice(hat);
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let inv_n = 1.0 / self.n as f64;
        self.buf.iter().map(|z| z.re * inv_n).collect()
    }
}

fn solve(eq: Equation, i: usize, masses: &MassPair, p: &FluidParams, cfg: &SpectralConfig) -> Result<WaveField> {
    if i != 1 && i != 2 {
        return Err(Error::Param(format!("family index must be 1 or 2, got {i}")));
    }
    cfg.validate(p)?;
    let eig = eigen_structure(p);
    let ip = 3 - i;
    let own = DiffusionWave::family(i, masses, &eig, p)?;
    let other = DiffusionWave::family(ip, masses, &eig, p)?;
    let n = cfg.n;
    let l = cfg.l;
    let x = cfg.grid();
    let mut k = vec![0.0; n];
    let mut mask = vec![1.0; n];
    for m in 0..n {
        let mm = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        k[m] = PI / l * mm;
        if m == n / 2 {
            k[m] = 0.0;
            mask[m] = 0.0;
        }
        if cfg.dealias && (mm.abs() > n as f64 / 3.0) {
            mask[m] = 0.0;
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
    let lambda = eig.lambda_of(i);
    let mut s = Solver {
        n,
        l,
        x: x.clone(),
        k,
        mask,
        fwd,
        inv,
        own,
        other,
        lambda,
        nu: p.nu,
        eq,
        scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        buf: vec![Complex64::new(0.0, 0.0); n],
    };

    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut k1 = u.clone();
    let mut k2 = u.clone();
    let mut k3 = u.clone();
    let mut k4 = u.clone();
    let mut stage = u.clone();

    let mut events: Vec<f64> = cfg.snapshot_times.clone();
    if events.last().map_or(true, |&t| t < cfg.t_final) {
        events.push(cfg.t_final);
    }
    let mut field = WaveField { x, times: Vec::new(), values: Vec::new() };
    let mut t = 0.0;
    let mut running_max: f64 = 0.0;
    let edge = (n / 100).max(4);
    for &target in &events {
        let span = target - t;
        if span <= 0.0 {
            continue;
        }
        let steps = (span / cfg.dt).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let (e_full, e_half): (Vec<Complex64>, Vec<Complex64>) = s
            .k
            .iter()
            .map(|&kk| {
                let lk = Complex64::new(-0.5 * s.nu * kk * kk, -s.lambda * kk);
                ((lk * dt).exp(), (lk * (0.5 * dt)).exp())
            })
            .unzip();
        let mut c_now = s.coeffs(t);
        for step in 0..steps {
            let tn = if step + 1 == steps { target } else { t + dt };
            let c_half = s.coeffs(t + 0.5 * dt);
            let c_next = s.coeffs(tn);
            s.rhs(&u, &c_now, &mut k1);
            for m in 0..n {
                stage[m] = e_half[m] * (u[m] + 0.5 * dt * k1[m]);
            }
            s.rhs(&stage, &c_half, &mut k2);
            for m in 0..n {
                stage[m] = e_half[m] * u[m] + 0.5 * dt * k2[m];
            }
            s.rhs(&stage, &c_half, &mut k3);
            for m in 0..n {
                stage[m] = e_full[m] * u[m] + dt * e_half[m] * k3[m];
            }
            s.rhs(&stage, &c_next, &mut k4);
            for m in 0..n {
                u[m] = e_full[m] * u[m]
                    + dt / 6.0 * (e_full[m] * k1[m] + 2.0 * e_half[m] * (k2[m] + k3[m]) + k4[m]);
            }
            t = tn;
            c_now = c_next;
            if step % 64 == 63 || step + 1 == steps {
                let amp = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if !amp.is_finite() {
                    return Err(Error::Instability(format!("non-finite spectrum at t={t:.4}; try dt <= {:.3e}", 0.5 * cfg.dt)));
                }
                if t > 1.0 && running_max > 0.0 && amp > 10.0 * running_max {
                    return Err(Error::Instability(format!(
                        "spectral norm grew more than 10x at t={t:.4}; try dt <= {:.3e}",
                        0.5 * cfg.dt
                    )));
                }
                running_max = running_max.max(amp);
            }
        }
        let phys = s.physical(&u);
        let boundary = phys[..edge].iter().chain(&phys[n - edge..]).map(|v| v.abs()).fold(0.0, f64::max);
        if boundary > 1e-12 {
            return Err(Error::Resolution(format!(
                "wave reached the periodic boundary at t={t:.3} (|value|={boundary:.3e}); enlarge L"
            )));
        }
        if cfg.snapshot_times.iter().any(|&st| (st - t).abs() <= 1e-12 * t.max(1.0)) {
            field.times.push(t);
            field.values.push(phys);
        }
    }
    Ok(field)
}

/// Solves `ξ_t + λ_i ξ_x + (θ_i ξ)_x + (θ_{i'}²/2)_x = (ν/2) ξ_xx`, `ξ(·,0) = 0`.
pub fn solve_xi(i: usize, masses: &MassPair, p: &FluidParams, cfg: &SpectralConfig) -> Result<WaveField> {
    solve(Equation::Xi, i, masses, p, cfg)
}

/// Same as [`solve_xi`] without the `(θ_i ζ)_x` term.
pub fn solve_zeta(i: usize, masses: &MassPair, p: &FluidParams, cfg: &SpectralConfig) -> Result<WaveField> {
    solve(Equation::Zeta, i, masses, p, cfg)
}

/// Sup ratio of `|∂^k ξ_i - (-1)^i (4c)^{-1} ∂^k θ_{i'}²|` to `(t+1)^{-k/2} ψ_{3/2}(·;λ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub per_time: Vec<(f64, f64)>,
    pub constant: f64,
    pub bounded: Bounded,
}

pub fn xi_relation_check(i: usize, xi: &WaveField, p: &FluidParams, masses: &MassPair, k: usize, t_min: f64) -> Result<RatioReport> {
    if k > 1 {
        return Err(Error::Param(format!("derivative order {k} not supported (k in {{0,1}})")));
    }
    let eig = eigen_structure(p);
    let ip = 3 - i;
    let other = DiffusionWave::family(ip, masses, &eig, p)?;
    let li = eig.lambda_of(i);
    let sign = if i == 1 { -1.0 } else { 1.0 };
    let coef = sign / (4.0 * p.c);
    let mut per_time = Vec::new();
    for (s, &t) in xi.times.iter().enumerate() {
        if t < t_min {
            continue;
        }
        let vals = if k == 0 { xi.values[s].clone() } else { xi.dx(s) };
        let mut sup: f64 = 0.0;
        for (j, &x) in xi.x.iter().enumerate() {
            let (th, thx) = other.theta_and_dx(x, t);
            let target = if k == 0 { coef * th * th } else { coef * 2.0 * th * thx };
            let w = (t + 1.0).powf(-0.5 * k as f64) * psi(x, t, 1.5, li);
            sup = sup.max((vals[j] - target).abs() / w);
        }
        per_time.push((t, sup));
    }
    if per_time.is_empty() {
        return Err(Error::Grid(format!("no snapshots with t >= {t_min}")));
    }
    let constant = per_time.iter().map(|r| r.1).fold(0.0, f64::max);
    let bounded = decade_rule(&per_time);
    Ok(RatioReport { per_time, constant, bounded })
}

/// Panel counts for the `𝒱`/`𝒲` double integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalQuadrature {
    pub s_panels: usize,
    pub y_panels: usize,
}

impl Default for FunctionalQuadrature {
    fn default() -> Self {
        FunctionalQuadrature { s_panels: 400, y_panels: 2000 }
    }
}

// ∫_{√t}^{t} ∫ (t-s)^{-1/2} exp(-(y+λ(t-s))²/(2ν(t-s))) f(y,s) dy ds, with
// y = -λτ + sqrt(2ντ) η (τ = t-s) so that the inner integral is smooth up to s = t.
fn heat_functional<F: Fn(f64, f64) -> f64>(t: f64, lambda: f64, nu: f64, q: FunctionalQuadrature, f: F) -> f64 {
    let eta_max = 10.0 / 2f64.sqrt();
    let inner = |s: f64| {
        let tau = t - s;
        let b = (2.0 * nu * tau).sqrt();
        (2.0 * nu).sqrt() * quad::simpson(|eta| (-eta * eta).exp() * f(-lambda * tau + b * eta, s), -eta_max, eta_max, q.y_panels)
    };
    quad::simpson(inner, t.sqrt(), t, q.s_panels)
}

/// `𝒱_i(t)`, the family-`i` part of `𝒱`.
pub fn v_component(i: usize, t: f64, masses: &MassPair, p: &FluidParams, q: FunctionalQuadrature) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::Param(format!("functionals need t >= 1, got {t}")));
    }
    let eig = eigen_structure(p);
    let other = DiffusionWave::family(3 - i, masses, &eig, p)?;
    let sign = if i == 1 { -1.0 } else { 1.0 };
    let pref = sign * p.nu.sqrt() / (4.0 * p.c * (2.0 * PI).sqrt());
    let val = heat_functional(t, eig.lambda_of(i), p.nu, q, |y, s| {
        let d = other.theta_dx(y, s);
        d * d
    });
    Ok(pref * val)
}

/// `𝒱(t) = (2c²/p″(1)) (𝒱_1 + 𝒱_2)(t)`.
pub fn v_functional_with(t: f64, masses: &MassPair, p: &FluidParams, q: FunctionalQuadrature) -> Result<f64> {
    let v1 = v_component(1, t, masses, p, q)?;
    let v2 = v_component(2, t, masses, p, q)?;
    Ok(2.0 * p.c * p.c / p.p2 * (v1 + v2))
}

pub fn v_functional(t: f64, masses: &MassPair, p: &FluidParams) -> Result<f64> {
    v_functional_with(t, masses, p, FunctionalQuadrature::default())
}

/// `𝒲(t)`, the Gaussian surrogate of `𝒱` built from `∂_xΘ_1(·;-c,2ν)`.
pub fn w_functional_with(t: f64, masses: &MassPair, p: &FluidParams, q: FunctionalQuadrature) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::Param(format!("functionals need t >= 1, got {t}")));
    }
    let c = p.c;
    let nu = p.nu;
    let pref = c * masses.discriminant() / (4.0 * PI * p.p2 * (2.0 * PI * nu).sqrt());
    let val = heat_functional(t, c, nu, q, |y, s| {
        let sp = s + 1.0;
        let d = y + c * sp;
        let th = sp.powf(-0.5) * (-d * d / (2.0 * nu * sp)).exp();
        let dth = -d / (nu * sp) * th;
        dth * dth
    });
    Ok(pref * val)
}

pub fn w_functional(t: f64, masses: &MassPair, p: &FluidParams) -> Result<f64> {
    w_functional_with(t, masses, p, FunctionalQuadrature::default())
}

/// Comparison of `(2c²/p″(1))(ξ_1+ξ_2)(0,t)` with `𝒱(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryAsymptotics {
    /// `(t, wave_sum, V_functional, difference)`
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub difference_fit: Option<DecayFit>,
    pub sum_fit: Option<DecayFit>,
}

pub fn xi_boundary_asymptotics(
    masses: &MassPair,
    p: &FluidParams,
    xi1: &WaveField,
    xi2: &WaveField,
    window: (f64, f64),
) -> Result<BoundaryAsymptotics> {
    if xi1.times != xi2.times || xi1.x.len() != xi2.x.len() {
        return Err(Error::Grid("xi_1 and xi_2 must share grid and snapshot times".into()));
    }
    let k = 2.0 * p.c * p.c / p.p2;
    let mut rows = Vec::new();
    for (s, &t) in xi1.times.iter().enumerate() {
        if t < 1.0 {
            continue;
        }
        let j = xi1.nearest_index(0.0);
        let sum = k * (xi1.values[s][j] + xi2.values[s][j]);
        let v = v_functional(t, masses, p)?;
        rows.push((t, sum, v, sum - v));
    }
    let pick = |f: &dyn Fn(&(f64, f64, f64, f64)) -> f64| -> Vec<(f64, f64)> { rows.iter().map(|r| (r.0, f(r))).collect() };
    let difference_fit = fit_decay(&pick(&|r| r.3), window).ok();
    let sum_fit = fit_decay(&pick(&|r| r.1), window).ok();
    Ok(BoundaryAsymptotics { rows, difference_fit, sum_fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(p: &FluidParams, t_final: f64) -> SpectralConfig {
        let mut cfg = SpectralConfig::for_horizon(p, t_final, 0.2);
        cfg.snapshot_times = vec![1.0, 2.0, t_final];
        cfg
    }

    #[test]
    fn missing_source_gives_zero() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        let cfg = small_cfg(&p, 5.0);
        let f = solve_xi(1, &MassPair::new(1.0, 0.0), &p, &cfg).unwrap();
        assert!(f.values.iter().flatten().all(|&v| v == 0.0));
        let f = solve_zeta(2, &MassPair::new(0.0, 0.7), &p, &cfg).unwrap();
        assert!(f.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_integral_and_time_order() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        let m = MassPair::new(0.8, 0.6);
        let mut cfg = small_cfg(&p, 6.0);
        let mut sols = Vec::new();
        for dt in [0.4, 0.2, 0.1] {
            cfg.dt = dt;
            let f = solve_xi(1, &m, &p, &cfg).unwrap();
            for s in 0..f.times.len() {
                assert!(f.integral(s).abs() < 1e-12, "{}", f.integral(s));
            }
            sols.push(f.values.last().unwrap().clone());
        }
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let r = d(&sols[0], &sols[1]) / d(&sols[1], &sols[2]);
        assert!(r > 12.0 && r < 20.0, "RK4 refinement ratio {r}");
    }

    #[test]
    fn box_too_small_is_rejected() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        let mut cfg = small_cfg(&p, 50.0);
        cfg.l = 30.0;
        assert!(solve_xi(1, &MassPair::new(1.0, 1.0), &p, &cfg).is_err());
    }

    #[test]
    fn v_vanishes_for_opposite_masses() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        for t in [4.0, 16.0] {
            let v = v_functional(t, &MassPair::new(0.5, -0.5), &p).unwrap();
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn w_sign_follows_mass_discriminant() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        assert!(w_functional(10.0, &MassPair::new(0.3, 0.1), &p).unwrap() > 0.0);
        assert!(w_functional(10.0, &MassPair::new(0.1, 0.3), &p).unwrap() < 0.0);
        assert!(v_functional(0.5, &MassPair::new(0.1, 0.3), &p).is_err());
    }
}
