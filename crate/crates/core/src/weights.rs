//! Space-time weight functions used to state and test the pointwise bounds.

use crate::error::{Error, Result};

/// `Θ_α(x,t;λ,μ) = (t+1)^{-α/2} exp(-(x-λ(t+1))²/(μ(t+1)))`.
#[inline]
pub fn theta_w(x: f64, t: f64, alpha: f64, lambda: f64, mu: f64) -> f64 {
    let s = t + 1.0;
    let d = x - lambda * s;
    s.powf(-0.5 * alpha) * (-d * d / (mu * s)).exp()
}

/// `ψ_α(x,t;λ) = [(x-λ(t+1))² + (t+1)]^{-α/2}`.
#[inline]
pub fn psi(x: f64, t: f64, alpha: f64, lambda: f64) -> f64 {
    let s = t + 1.0;
    let d = x - lambda * s;
    (d * d + s).powf(-0.5 * alpha)
}

#[inline]
pub fn psi74(x: f64, t: f64, lambda: f64) -> f64 {
    psi(x, t, 1.75, lambda)
}

/// `ψ̄ = [|x-λ(t+1)|^7 + (t+1)^5]^{-1/4}`.
#[inline]
pub fn psi_bar(x: f64, t: f64, lambda: f64) -> f64 {
    let s = t + 1.0;
    let d = (x - lambda * s).abs();
    (d.powi(7) + s.powi(5)).powf(-0.25)
}

/// `ψ̃ = [|x-λ(t+1)|^3 + (t+1)^2]^{-1/2}`.
#[inline]
pub fn psi_tilde(x: f64, t: f64, lambda: f64) -> f64 {
    let s = t + 1.0;
    let d = (x - lambda * s).abs();
    (d.powi(3) + s * s).powf(-0.5)
}

/// `Ψ_i = ψ_{7/4}(·;λ_i) + ψ̄(·;λ_{i'})`, where `λ_1 = c`, `λ_2 = -c`.
#[inline]
pub fn cap_psi(x: f64, t: f64, i: usize, c: f64) -> f64 {
    let li = if i == 1 { c } else { -c };
    psi74(x, t, li) + psi_bar(x, t, -li)
}

/// `Φ_i = ψ_{3/2}(·;λ_i) + ψ̃(·;λ_{i'})`.
#[inline]
pub fn cap_phi(x: f64, t: f64, i: usize, c: f64) -> f64 {
    let li = if i == 1 { c } else { -c };
    psi(x, t, 1.5, li) + psi_tilde(x, t, -li)
}

/// Indicator of `min(λ,λ')(t+1) + K√(t+1) ≤ x ≤ max(λ,λ')(t+1) - K√(t+1)`.
#[inline]
pub fn chi_k(x: f64, t: f64, lambda: f64, lambda_p: f64, k: f64) -> f64 {
    let s = t + 1.0;
    let lo = lambda.min(lambda_p) * s + k * s.sqrt();
    let hi = lambda.max(lambda_p) * s - k * s.sqrt();
    if x >= lo && x <= hi {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    ThetaAlpha,
    PsiAlpha,
    Psi74,
    PsiBar,
    PsiTilde,
    CapPsi,
    CapPhi,
}

impl std::str::FromStr for WeightKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Theta_alpha" | "theta" => WeightKind::ThetaAlpha,
            "psi_alpha" | "psi" => WeightKind::PsiAlpha,
            "psi_74" => WeightKind::Psi74,
            "psi_bar" => WeightKind::PsiBar,
            "psi_tilde" => WeightKind::PsiTilde,
            "Psi_i" => WeightKind::CapPsi,
            "Phi_i" => WeightKind::CapPhi,
            other => return Err(Error::Param(format!("unknown weight kind '{other}'"))),
        })
    }
}

/// A weight together with its parameters. For `Psi_i`/`Phi_i` the sign of
/// `lambda` selects the family (`λ_i = lambda`, `λ_{i'} = -lambda`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
}

pub fn weight_eval(spec: &WeightSpec, x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Param(format!("weights need t >= 0, got {t}")));
    }
    let l = spec.lambda;
    Ok(match spec.kind {
        WeightKind::ThetaAlpha => theta_w(x, t, spec.alpha, l, spec.mu),
        WeightKind::PsiAlpha => psi(x, t, spec.alpha, l),
        WeightKind::Psi74 => psi74(x, t, l),
        WeightKind::PsiBar => psi_bar(x, t, l),
        WeightKind::PsiTilde => psi_tilde(x, t, l),
        WeightKind::CapPsi => psi74(x, t, l) + psi_bar(x, t, -l),
        WeightKind::CapPhi => psi(x, t, 1.5, l) + psi_tilde(x, t, -l),
    })
}
