//! Self-similar diffusion waves: Cole–Hopf solutions of the viscous Burgers
//! equation `θ_t + λθ_x + (θ²/2)_x = (ν/2)θ_xx` started from a point mass at `t = -1`.

use crate::error::{Error, Result};
use crate::model::{EigenStructure, FluidParams, MassPair};
use statrs::function::erf::erfc;

const SQRT_PI: f64 = 1.772_453_850_905_516;
const MASS_GUARD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionWave {
    pub mass: f64,
    pub lambda: f64,
    pub nu: f64,
    /// `e^{M/ν} - 1`
    a: f64,
}

impl DiffusionWave {
    pub fn new(mass: f64, lambda: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Param(format!("nu must be positive, got {nu}")));
        }
        if !mass.is_finite() || (mass / nu).abs() > MASS_GUARD {
            return Err(Error::Overflow(format!(
                "|M|/nu = {:.3e} exceeds {MASS_GUARD}; use a smaller mass",
                (mass / nu).abs()
            )));
        }
        Ok(DiffusionWave { mass, lambda, nu, a: (mass / nu).exp_m1() })
    }

    /// Wave of family `i` for the given masses.
    pub fn family(i: usize, masses: &MassPair, eig: &EigenStructure, p: &FluidParams) -> Result<Self> {
        DiffusionWave::new(masses.get(i), eig.lambda_of(i), p.nu)
    }

    // (s, z, q) with s = sqrt(2ν(t+1)), z = (x-λ(t+1))/s and θ = (ν/s) q.
    #[inline]
    fn parts(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let s = (2.0 * self.nu * (t + 1.0)).sqrt();
        let z = (x - self.lambda * (t + 1.0)) / s;
        if self.a == 0.0 {
            return (s, z, 0.0);
        }
        let g = (-z * z).exp();
        let d = SQRT_PI + self.a * 0.5 * SQRT_PI * erfc(z);
        (s, z, self.a * g / d)
    }

    #[inline]
    pub fn theta(&self, x: f64, t: f64) -> f64 {
        let (s, _, q) = self.parts(x, t);
        self.nu / s * q
    }

    /// `∂_x θ`, using `dq/dz = -2zq + q²`.
    #[inline]
    pub fn theta_dx(&self, x: f64, t: f64) -> f64 {
        let (s, z, q) = self.parts(x, t);
        self.nu / (s * s) * q * (q - 2.0 * z)
    }

    /// `∂_x² θ`, using `d²q/dz² = -2q + 2(q - z) dq/dz`.
    #[inline]
    pub fn theta_dxx(&self, x: f64, t: f64) -> f64 {
        let (s, z, q) = self.parts(x, t);
        let q1 = q * (q - 2.0 * z);
        self.nu / (s * s * s) * (-2.0 * q + 2.0 * (q - z) * q1)
    }

    /// θ, θ_x together (one erfc evaluation).
    #[inline]
    pub fn theta_and_dx(&self, x: f64, t: f64) -> (f64, f64) {
        let (s, z, q) = self.parts(x, t);
        (self.nu / s * q, self.nu / (s * s) * q * (q - 2.0 * z))
    }

    /// Half-width (in x) outside of which θ is below `e^{-zcut²}` relative to its peak.
    pub fn support(&self, t: f64, zcut: f64) -> (f64, f64) {
        let s = (2.0 * self.nu * (t + 1.0)).sqrt();
        let c = self.lambda * (t + 1.0);
        (c - zcut * s, c + zcut * s)
    }
}

pub fn theta(w: &DiffusionWave, x: f64, t: f64) -> f64 {
    w.theta(x, t)
}

pub fn theta_dx(w: &DiffusionWave, x: f64, t: f64) -> f64 {
    w.theta_dx(x, t)
}

pub fn theta_dxx(w: &DiffusionWave, x: f64, t: f64) -> f64 {
    w.theta_dxx(x, t)
}

/// Residual of the Burgers equation on `grid` at time `t`, with a centred
/// time difference of step `dt` and analytic space derivatives.
pub fn burgers_residual(w: &DiffusionWave, grid: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t > 0.0) || !(dt > 0.0) || dt > t + 1.0 {
        return Err(Error::Param(format!("need t > 0 and 0 < dt <= t+1, got t={t}, dt={dt}")));
    }
    Ok(grid
        .iter()
        .map(|&x| {
            let th_t = (w.theta(x, t + dt) - w.theta(x, t - dt)) / (2.0 * dt);
            let (th, thx) = w.theta_and_dx(x, t);
            th_t + w.lambda * thx + th * thx - 0.5 * w.nu * w.theta_dxx(x, t)
        })
        .collect())
}

/// `∫θ dx` by Simpson over ±12 standard deviations of the wave.
pub fn theta_mass(w: &DiffusionWave, t: f64) -> f64 {
    let (lo, hi) = w.support(t, 12.0);
    let n = 4000;
    crate::quad::simpson(|x| w.theta(x, t), lo, hi, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryBranch {
    /// `M1 = -M2`: `θ1(-x,t) = -θ2(x,t)`.
    Antisymmetry,
    /// `M1 = M2`: `θ1(y + 2c(s+1), s) = θ2(y, s)`.
    Translation,
    /// Both masses vanish.
    Trivial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub branch: SymmetryBranch,
    pub max_error: f64,
    pub samples: usize,
}

/// Checks the reflection/translation identities between the two diffusion waves.
pub fn antisymmetry_translation_checks(masses: &MassPair, p: &FluidParams, grid: &[f64], times: &[f64]) -> Result<SymmetryReport> {
    let tol = 1e-14 * (1.0 + masses.m1.abs().max(masses.m2.abs()));
    let branch = if masses.m1 == 0.0 && masses.m2 == 0.0 {
        SymmetryBranch::Trivial
    } else if (masses.m1 + masses.m2).abs() <= tol {
        SymmetryBranch::Antisymmetry
    } else if (masses.m1 - masses.m2).abs() <= tol {
        SymmetryBranch::Translation
    } else {
        return Err(Error::Precondition(format!(
            "masses ({}, {}) satisfy neither M1 = -M2 nor M1 = M2",
            masses.m1, masses.m2
        )));
    };
    let w1 = DiffusionWave::new(masses.m1, p.c, p.nu)?;
    let w2 = DiffusionWave::new(masses.m2, -p.c, p.nu)?;
    let mut max_error: f64 = 0.0;
    for &t in times {
        for &x in grid {
            let e = match branch {
                SymmetryBranch::Antisymmetry | SymmetryBranch::Trivial => w1.theta(-x, t) + w2.theta(x, t),
                SymmetryBranch::Translation => w1.theta(x + 2.0 * p.c * (t + 1.0), t) - w2.theta(x, t),
            };
            max_error = max_error.max(e.abs());
        }
    }
    Ok(SymmetryReport { branch, max_error, samples: grid.len() * times.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn zero_mass_is_zero() {
        let w = DiffusionWave::new(0.0, 1.0, 1.0).unwrap();
        for x in [-3.0, 0.0, 2.0] {
            assert_eq!(w.theta(x, 1.0), 0.0);
            assert_eq!(w.theta_dx(x, 1.0), 0.0);
            assert_eq!(w.theta_dxx(x, 1.0), 0.0);
        }
    }

    #[test]
    fn value_on_ray_at_t0() {
        let w = DiffusionWave::new(1.0, 1.0, 1.0).unwrap();
        let expect = 2.0 * (E - 1.0) / ((E + 1.0) * (2.0 * PI).sqrt());
        assert!((w.theta(1.0, 0.0) - expect).abs() < 1e-15, "{}", w.theta(1.0, 0.0));
        assert!((expect - 0.36872).abs() < 1e-5);
    }

    #[test]
    fn value_on_ray_by_direct_quadrature() {
        // evaluate the tail integral ∫_z^∞ e^{-y²} by quadrature instead of erfc
        let (m, nu, lam, t, x) = (0.7, 0.6, -1.2, 3.0, -4.1);
        let w = DiffusionWave::new(m, lam, nu).unwrap();
        let s = (2.0 * nu * (t + 1.0)).sqrt();
        let z = (x - lam * (t + 1.0)) / s;
        let tail = crate::quad::simpson(|y| (-y * y).exp(), z, 12.0, 20000);
        let a = (m / nu).exp() - 1.0;
        let direct = nu.sqrt() / (2.0 * (t + 1.0)).sqrt() * a * (-z * z).exp() / (PI.sqrt() + a * tail);
        assert!((w.theta(x, t) - direct).abs() < 1e-13);
    }

    #[test]
    fn overflow_guard() {
        assert!(matches!(DiffusionWave::new(60.0, 1.0, 1.0), Err(Error::Overflow(_))));
        assert!(DiffusionWave::new(-49.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let w = DiffusionWave::new(1.3, 1.0, 0.8).unwrap();
        let t = 2.5;
        let err = |h: f64| {
            let mut e1: f64 = 0.0;
            let mut e2: f64 = 0.0;
            for k in -40..=40 {
                let x = 3.5 + 0.25 * k as f64;
                let fd1 = (w.theta(x + h, t) - w.theta(x - h, t)) / (2.0 * h);
                let fd2 = (w.theta(x + h, t) - 2.0 * w.theta(x, t) + w.theta(x - h, t)) / (h * h);
                e1 = e1.max((fd1 - w.theta_dx(x, t)).abs());
                e2 = e2.max((fd2 - w.theta_dxx(x, t)).abs());
            }
            (e1, e2)
        };
        let (a1, a2) = err(0.02);
        let (b1, b2) = err(0.01);
        assert!((a1 / b1 - 4.0).abs() < 0.2, "{}", a1 / b1);
        assert!((a2 / b2 - 4.0).abs() < 0.3, "{}", a2 / b2);
    }

    #[test]
    fn exponentially_small_at_origin() {
        let w = DiffusionWave::new(1.0, 1.0, 1.0).unwrap();
        let v = w.theta(0.0, 50.0);
        assert!(v > 0.0 && v < 1e-12, "{v}");
        // log theta(0,t) is close to linear in t with slope -c²/(2ν)
        let l = |t: f64| w.theta(0.0, t).ln();
        let slope = (l(200.0) - l(100.0)) / 100.0;
        assert!((slope + 0.5).abs() < 0.01, "{slope}");
    }

    #[test]
    fn symmetry_identities() {
        let p = FluidParams::new(1.0, 1.0).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|k| 0.37 * k as f64).collect();
        let times = [0.0, 3.0, 40.0];
        let r = antisymmetry_translation_checks(&MassPair::new(1.0, -1.0), &p, &grid, &times).unwrap();
        assert_eq!(r.branch, SymmetryBranch::Antisymmetry);
        assert!(r.max_error < 1e-12, "{}", r.max_error);
        let r = antisymmetry_translation_checks(&MassPair::new(1.0, 1.0), &p, &grid, &times).unwrap();
        assert_eq!(r.branch, SymmetryBranch::Translation);
        assert!(r.max_error < 1e-12, "{}", r.max_error);
        let r = antisymmetry_translation_checks(&MassPair::new(0.0, 0.0), &p, &grid, &times).unwrap();
        assert_eq!(r.max_error, 0.0);
        assert!(antisymmetry_translation_checks(&MassPair::new(1.0, 0.5), &p, &grid, &times).is_err());
    }
}
