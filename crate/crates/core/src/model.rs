//! Physical parameters, eigenstructure, masses, projections and the nonlinear term.

use crate::error::{Error, Result};
use crate::quad;

/// Barotropic pressure law `p(v) = v^(-gamma)` with viscosity `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub gamma: f64,
    pub nu: f64,
    /// Sound speed `sqrt(-p'(1))`.
    pub c: f64,
    /// `p''(1) = gamma (gamma + 1)`.
    pub p2: f64,
}

impl FluidParams {
    pub fn new(gamma: f64, nu: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Param(format!("gamma must be positive, got {gamma}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Param(format!("nu must be positive, got {nu}")));
        }
        Ok(FluidParams { gamma, nu, c: gamma.sqrt(), p2: gamma * (gamma + 1.0) })
    }

    #[inline]
    pub fn pressure(&self, v: f64) -> f64 {
        if self.gamma == 1.0 {
            1.0 / v
        } else {
            v.powf(-self.gamma)
        }
    }

    #[inline]
    pub fn dpressure(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }

    /// Convection matrix `A` of the perturbative system.
    pub fn a_matrix(&self) -> [[f64; 2]; 2] {
        [[0.0, -1.0], [-self.c * self.c, 0.0]]
    }

    /// Viscosity matrix `B = diag(0, nu)`.
    pub fn b_matrix(&self) -> [[f64; 2]; 2] {
        [[0.0, 0.0], [0.0, self.nu]]
    }
}

pub fn derive_params(gamma: f64, nu: f64) -> Result<FluidParams> {
    FluidParams::new(gamma, nu)
}

/// Characteristic data of `A`: `l_i A = lambda_i l_i`, `A r_i = lambda_i r_i`, `l_i r_j = delta_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStructure {
    pub lambda: [f64; 2],
    /// Right eigenvectors (as columns `r[0]`, `r[1]`).
    pub r: [[f64; 2]; 2],
    /// Left eigenvectors (as rows `l[0]`, `l[1]`).
    pub l: [[f64; 2]; 2],
    /// `gamma_i = (-1)^i nu / (4c)`, index 0 is `i = 1`.
    pub gamma_coef: [f64; 2],
}

pub fn eigen_structure(p: &FluidParams) -> EigenStructure {
    let c = p.c;
    let rs = 2.0 * c / p.p2;
    let ls = p.p2 / (4.0 * c);
    EigenStructure {
        lambda: [c, -c],
        r: [[-rs, rs * c], [rs, rs * c]],
        l: [[-ls, ls / c], [ls, ls / c]],
        gamma_coef: [-p.nu / (4.0 * c), p.nu / (4.0 * c)],
    }
}

impl EigenStructure {
    /// `l_i . (a, b)`, with `i` in {1, 2}.
    #[inline]
    pub fn project(&self, i: usize, a: f64, b: f64) -> f64 {
        let l = self.l[i - 1];
        l[0] * a + l[1] * b
    }

    #[inline]
    pub fn lambda_of(&self, i: usize) -> f64 {
        self.lambda[i - 1]
    }

    #[inline]
    pub fn gamma_of(&self, i: usize) -> f64 {
        self.gamma_coef[i - 1]
    }

    /// Largest entry of `|l_i r_j - δ_ij|`, `|l_i A - λ_i l_i|` and `|A r_i - λ_i r_i|`.
    pub fn residual(&self, p: &FluidParams) -> f64 {
        let a = p.a_matrix();
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let d = self.l[i][0] * self.r[j][0] + self.l[i][1] * self.r[j][1];
                m = m.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
            let (l, r, lam) = (self.l[i], self.r[i], self.lambda[i]);
            for k in 0..2 {
                m = m.max((l[0] * a[0][k] + l[1] * a[1][k] - lam * l[k]).abs());
                m = m.max((a[k][0] * r[0] + a[k][1] * r[1] - lam * r[k]).abs());
            }
        }
        m
    }
}

/// Which half-line a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Closed-form or sampled initial profile on the punctured line.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `amp * exp(-(x-center)^2 / (2 width^2))`, cut to zero beyond 10 widths.
    Gaussian { amp: f64, center: f64, width: f64 },
    /// Zero-mass derivative-of-Gaussian bump `amp * ((x-center)/width) * exp(...)`, same cut.
    DGaussian { amp: f64, center: f64, width: f64 },
    /// Plateau of height `amp` between `a` and `b` with tanh edges of width `width`.
    TanhRamp { amp: f64, a: f64, b: f64, width: f64 },
    /// `amp * (1+|x|)^(-power)`.
    Algebraic { amp: f64, power: f64 },
    /// Linear interpolation of samples `values[k]` at `x0 + k*h`, zero outside.
    Sampled { x0: f64, h: f64, values: Vec<f64> },
    /// Different profiles on the two half-lines.
    Split { left: Box<Profile>, right: Box<Profile> },
    Sum(Vec<Profile>),
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, if x < 0.0 { Side::Left } else { Side::Right })
    }

    /// Evaluate with an explicit side, so that `x = 0` gives the one-sided limit.
    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Gaussian { amp, center, width } => {
                let z = (x - center) / width;
                if z.abs() > 10.0 {
                    0.0
                } else {
                    amp * (-0.5 * z * z).exp()
                }
            }
            Profile::DGaussian { amp, center, width } => {
                let z = (x - center) / width;
                if z.abs() > 10.0 {
                    0.0
                } else {
                    amp * z * (-0.5 * z * z).exp()
                }
            }
            Profile::TanhRamp { amp, a, b, width } => {
                0.5 * amp * (((x - a) / width).tanh() - ((x - b) / width).tanh())
            }
            Profile::Algebraic { amp, power } => amp * (1.0 + x.abs()).powf(-power),
            Profile::Sampled { x0, h, values } => {
                let s = (x - x0) / h;
                if s < 0.0 || values.is_empty() {
                    return 0.0;
                }
                let k = s.floor() as usize;
                if k + 1 >= values.len() {
                    return if k + 1 == values.len() && s == k as f64 { values[k] } else { 0.0 };
                }
                let f = s - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
            Profile::Split { left, right } => match side {
                Side::Left => left.eval_side(x, side),
                Side::Right => right.eval_side(x, side),
            },
            Profile::Sum(parts) => parts.iter().map(|p| p.eval_side(x, side)).sum(),
        }
    }

    /// Radius beyond which the profile is negligible; `None` for algebraic tails.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Profile::Zero => Some(0.0),
            Profile::Gaussian { center, width, .. } | Profile::DGaussian { center, width, .. } => {
                Some(center.abs() + 10.0 * width.abs())
            }
            Profile::TanhRamp { a, b, width, .. } => Some(a.abs().max(b.abs()) + 25.0 * width.abs()),
            Profile::Algebraic { .. } => None,
            Profile::Sampled { x0, h, values } => {
                Some(x0.abs().max((x0 + h * values.len() as f64).abs()))
            }
            Profile::Split { left, right } => match (left.radius(), right.radius()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            },
            Profile::Sum(parts) => {
                let mut r: f64 = 0.0;
                for p in parts {
                    r = r.max(p.radius()?);
                }
                Some(r)
            }
        }
    }

    /// Smallest length scale of the profile (for picking quadrature steps).
    pub fn scale(&self) -> f64 {
        match self {
            Profile::Zero | Profile::Algebraic { .. } => 1.0,
            Profile::Gaussian { width, .. } | Profile::DGaussian { width, .. } => width.abs(),
            Profile::TanhRamp { width, .. } => width.abs(),
            Profile::Sampled { h, .. } => *h,
            Profile::Split { left, right } => left.scale().min(right.scale()),
            Profile::Sum(parts) => parts.iter().map(|p| p.scale()).fold(1.0, f64::min),
        }
    }

    /// Algebraic tail `(amp, power)` pieces, used for analytic tail corrections.
    fn algebraic_parts(&self, out: &mut Vec<(f64, f64, Option<Side>)>, side: Option<Side>) {
        match self {
            Profile::Algebraic { amp, power } => out.push((*amp, *power, side)),
            Profile::Split { left, right } => {
                left.algebraic_parts(out, Some(Side::Left));
                right.algebraic_parts(out, Some(Side::Right));
            }
            Profile::Sum(parts) => parts.iter().for_each(|p| p.algebraic_parts(out, side)),
            _ => {}
        }
    }
}

/// Initial data `(v0 - 1, u0, V0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub v0_pert: Profile,
    pub u0: Profile,
    pub v0_mass: f64,
}

impl InitialData {
    pub fn equilibrium() -> Self {
        InitialData { v0_pert: Profile::Zero, u0: Profile::Zero, v0_mass: 0.0 }
    }

    /// Point-mass velocity `V0`.
    pub fn big_v0(&self) -> f64 {
        self.v0_mass
    }
}

const ALG_CUT: f64 = 1.0e4;

/// `∫ f` over the punctured line for a combination of the two profiles,
/// splitting at zero and adding analytic algebraic tails.
fn line_integral<F: Fn(f64, Side) -> f64>(f: F, init: &InitialData, tail_weight: [f64; 2]) -> Result<f64> {
    let r_v = init.v0_pert.radius();
    let r_u = init.u0.radius();
    let radius = match (r_v, r_u) {
        (Some(a), Some(b)) => a.max(b),
        _ => ALG_CUT,
    };
    if radius == 0.0 {
        return Ok(0.0);
    }
    let hmax = (init.v0_pert.scale().min(init.u0.scale()) / 20.0).min(0.05);
    let n = ((radius / hmax).ceil() as usize).max(64);
    let graded = r_v.is_none() || r_u.is_none();
    let integ = |n: usize| {
        if graded {
            // x = e^s - 1 turns algebraic tails into exponentially decaying integrands
            let smax = radius.ln_1p();
            let g = |s: f64, side: Side| {
                let x = s.exp_m1();
                let xs = if side == Side::Right { x } else { -x };
                f(xs, side) * (x + 1.0)
            };
            quad::simpson(|s| g(s, Side::Right), 0.0, smax, n) + quad::simpson(|s| g(s, Side::Left), 0.0, smax, n)
        } else {
            quad::simpson(|x| f(x, Side::Right), 0.0, radius, n) + quad::simpson(|x| f(-x, Side::Left), 0.0, radius, n)
        }
    };
    let coarse = integ(n);
    let fine = integ(2 * n);
    if (fine - coarse).abs() > 1e-8_f64.max(1e-10 * fine.abs()) {
        return Err(Error::Quadrature(format!(
            "panel doubling changed the integral by {:e}",
            (fine - coarse).abs()
        )));
    }
    let mut total = fine;
    // analytic algebraic tails beyond the cut
    let mut parts = Vec::new();
    init.v0_pert.algebraic_parts(&mut parts, None);
    let nv = parts.len();
    init.u0.algebraic_parts(&mut parts, None);
    for (k, (amp, power, side)) in parts.into_iter().enumerate() {
        if power <= 1.0 {
            return Err(Error::Quadrature(format!(
                "profile (1+|x|)^-{power} is not integrable"
            )));
        }
        let w = if k < nv { tail_weight[0] } else { tail_weight[1] };
        let one = amp * (1.0 + ALG_CUT).powf(1.0 - power) / (power - 1.0);
        let sides = if side.is_some() { 1.0 } else { 2.0 };
        total += w * sides * one;
    }
    Ok(total)
}

/// Left-eigenvector masses `M_1`, `M_2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MassPair {
    pub m1: f64,
    pub m2: f64,
}

impl MassPair {
    pub fn new(m1: f64, m2: f64) -> Self {
        MassPair { m1, m2 }
    }

    pub fn get(&self, i: usize) -> f64 {
        if i == 1 {
            self.m1
        } else {
            self.m2
        }
    }

    /// `M1^2 - M2^2`.
    pub fn discriminant(&self) -> f64 {
        self.m1 * self.m1 - self.m2 * self.m2
    }

    pub fn scaled(&self, f: f64) -> Self {
        MassPair { m1: self.m1 * f, m2: self.m2 * f }
    }
}

pub fn compute_masses(init: &InitialData, eig: &EigenStructure) -> Result<MassPair> {
    let mut m = [0.0; 2];
    for i in 1..=2 {
        let l = eig.l[i - 1];
        let f = |x: f64, s: Side| l[0] * init.v0_pert.eval_side(x, s) + l[1] * init.u0.eval_side(x, s);
        m[i - 1] = line_integral(f, init, l)? + l[1] * init.v0_mass;
    }
    Ok(MassPair { m1: m[0], m2: m[1] })
}

/// `∫(v0-1)` and `∫u0` by the same quadrature as the masses.
pub fn profile_integrals(init: &InitialData) -> Result<(f64, f64)> {
    let iv = line_integral(|x, s| init.v0_pert.eval_side(x, s), init, [1.0, 0.0])?;
    let iu = line_integral(|x, s| init.u0.eval_side(x, s), init, [0.0, 1.0])?;
    Ok((iv, iu))
}

/// `u_i = l_i (v-1, u)^T` pointwise.
pub fn characteristic_project(v_pert: &[f64], u: &[f64], eig: &EigenStructure) -> Result<(Vec<f64>, Vec<f64>)> {
    if v_pert.len() != u.len() {
        return Err(Error::Grid(format!("v has {} samples, u has {}", v_pert.len(), u.len())));
    }
    let u1 = v_pert.iter().zip(u).map(|(&a, &b)| eig.project(1, a, b)).collect();
    let u2 = v_pert.iter().zip(u).map(|(&a, &b)| eig.project(2, a, b)).collect();
    Ok((u1, u2))
}

/// Inverse of [`characteristic_project`]: `(v-1, u) = u1 r1 + u2 r2`.
pub fn characteristic_reconstruct(u1: &[f64], u2: &[f64], eig: &EigenStructure) -> Result<(Vec<f64>, Vec<f64>)> {
    if u1.len() != u2.len() {
        return Err(Error::Grid(format!("u1 has {} samples, u2 has {}", u1.len(), u2.len())));
    }
    let r = eig.r;
    let v = u1.iter().zip(u2).map(|(&a, &b)| a * r[0][0] + b * r[1][0]).collect();
    let u = u1.iter().zip(u2).map(|(&a, &b)| a * r[0][1] + b * r[1][1]).collect();
    Ok((v, u))
}

/// `N = -p(v) + p(1) - c^2 (v-1) - nu ((v-1)/v) u_x`.
pub fn nonlinear_n(v: &[f64], u_x: &[f64], p: &FluidParams) -> Result<Vec<f64>> {
    if v.len() != u_x.len() {
        return Err(Error::Grid(format!("v has {} samples, u_x has {}", v.len(), u_x.len())));
    }
    v.iter()
        .zip(u_x)
        .map(|(&v, &q)| {
            if !(v > 0.0) {
                return Err(Error::State(format!("non-positive specific volume {v}")));
            }
            let w = v - 1.0;
            Ok(-p.pressure(v) + 1.0 - p.c * p.c * w - p.nu * (w / v) * q)
        })
        .collect()
}

/// `N_i = p''(1)/(4c^2) N` (identical for both families).
pub fn nonlinear_n_i(v: &[f64], u_x: &[f64], p: &FluidParams) -> Result<Vec<f64>> {
    let k = p.p2 / (4.0 * p.c * p.c);
    Ok(nonlinear_n(v, u_x, p)?.into_iter().map(|n| k * n).collect())
}

/// Residuals of the three interface compatibility conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    /// `max_± |u0(0±) - V0|`
    pub velocity: f64,
    /// `max_± |C1_x(0±) - [[C1]]|`
    pub stress: f64,
    /// `max_± |C2_x(0±) - [[C2]]|`
    pub stress_rate: f64,
    /// Same residuals with the finite-difference step halved.
    pub stress_refined: f64,
    pub stress_rate_refined: f64,
    pub step: f64,
}

impl CompatibilityReport {
    pub fn first_holds(&self, tol: f64) -> bool {
        self.velocity <= tol
    }
}

// d/dx on uniform one-sided samples, second order throughout.
fn deriv(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    }
    d
}

// (C1(0), C1_x(0), C2(0), C2_x(0)) on one side, `dir` = +1 right, -1 left.
fn side_operators(init: &InitialData, p: &FluidParams, h: f64, side: Side) -> (f64, f64, f64, f64) {
    let dir = if side == Side::Right { 1.0 } else { -1.0 };
    let n = 13;
    // samples in the outward coordinate y = |x|, derivatives converted with dir
    let xs: Vec<f64> = (0..n).map(|k| dir * k as f64 * h).collect();
    let v: Vec<f64> = xs.iter().map(|&x| 1.0 + init.v0_pert.eval_side(x, side)).collect();
    let u: Vec<f64> = xs.iter().map(|&x| init.u0.eval_side(x, side)).collect();
    let dx = |f: &[f64]| -> Vec<f64> { deriv(f, h).into_iter().map(|d| d * dir).collect() };
    let ux = dx(&u);
    let c1: Vec<f64> = (0..n).map(|k| -p.pressure(v[k]) + p.nu * ux[k] / v[k]).collect();
    let c1x = dx(&c1);
    let c1xx = dx(&c1x);
    let c2: Vec<f64> = (0..n)
        .map(|k| -p.dpressure(v[k]) * ux[k] + p.nu / v[k] * c1xx[k] - p.nu * ux[k] * ux[k] / (v[k] * v[k]))
        .collect();
    let c2x = dx(&c2);
    (c1[0], c1x[0], c2[0], c2x[0])
}

pub fn compatibility_check(init: &InitialData, p: &FluidParams) -> CompatibilityReport {
    let v0 = init.big_v0();
    let velocity = (init.u0.eval_side(0.0, Side::Right) - v0)
        .abs()
        .max((init.u0.eval_side(0.0, Side::Left) - v0).abs());
    let step = (init.v0_pert.scale().min(init.u0.scale()) / 50.0).min(0.02);
    let resid = |h: f64| {
        let (a1, a1x, a2, a2x) = side_operators(init, p, h, Side::Right);
        let (b1, b1x, b2, b2x) = side_operators(init, p, h, Side::Left);
        let j1 = a1 - b1;
        let j2 = a2 - b2;
        let s = (a1x - j1).abs().max((b1x - j1).abs());
        let r = (a2x - j2).abs().max((b2x - j2).abs());
        (s, r)
    };
    let (stress, stress_rate) = resid(step);
    let (stress_refined, stress_rate_refined) = resid(0.5 * step);
    CompatibilityReport { velocity, stress, stress_rate, stress_refined, stress_rate_refined, step }
}

/// Components of the δ-surrogate smallness measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailNorms {
    /// Discrete H^2-style norm of `u_0i` (summed over i).
    pub sobolev: f64,
    /// `sup (|x|+1)^{7/4} |u_0i|` summed over i.
    pub weighted_sup: f64,
    /// `sup_{x>0} (|x|+1)^{5/4} (|u_0i^-(-x)| + |u_0i^+(x)|)` summed over i.
    pub tail_sup: f64,
    pub delta: f64,
}

pub fn initial_tail_norms(init: &InitialData, eig: &EigenStructure) -> Result<TailNorms> {
    let radius = match (init.v0_pert.radius(), init.u0.radius()) {
        (Some(a), Some(b)) => a.max(b).max(1.0) * 1.5,
        _ => 200.0,
    };
    let h = (init.v0_pert.scale().min(init.u0.scale()) / 20.0).min(0.05);
    let n = (radius / h).ceil() as usize;
    let mut sobolev = 0.0;
    let mut weighted_sup: f64 = 0.0;
    let mut tail_sup: f64 = 0.0;
    for i in 1..=2 {
        let l = eig.l[i - 1];
        let ui = |x: f64, s: Side| l[0] * init.v0_pert.eval_side(x, s) + l[1] * init.u0.eval_side(x, s);
        // samples at cell centres on each half-line, outward order
        let right: Vec<f64> = (0..n).map(|k| ui((k as f64 + 0.5) * h, Side::Right)).collect();
        let left: Vec<f64> = (0..n).map(|k| ui(-(k as f64 + 0.5) * h, Side::Left)).collect();
        let mut s2 = 0.0;
        for side in [&right, &left] {
            let d1 = deriv(side, h);
            let d2 = deriv(&d1, h);
            for k in 0..n {
                s2 += h * (side[k] * side[k] + d1[k] * d1[k] + d2[k] * d2[k]);
            }
            for (k, v) in side.iter().enumerate() {
                let x = (k as f64 + 0.5) * h;
                weighted_sup = weighted_sup.max((x + 1.0).powf(1.75) * v.abs());
            }
        }
        sobolev += s2.sqrt();
        // tail integrals: u^+(x) = ∫_x^∞ (right), from the outer end inward;
        // u^-(-x) = ∫_{-∞}^{-x} (left), likewise.
        let mut up = 0.0;
        let mut um = 0.0;
        let mut best: f64 = 0.0;
        for k in (0..n).rev() {
            up += h * right[k];
            um += h * left[k];
            let x = k as f64 * h;
            best = best.max((x + 1.0).powf(1.25) * (up.abs() + um.abs()));
        }
        tail_sup += best;
    }
    Ok(TailNorms { sobolev, weighted_sup, tail_sup, delta: sobolev + weighted_sup + tail_sup })
}
