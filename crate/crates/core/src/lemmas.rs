//! Space-time convolution engine and bounded-ratio checks for the convolution
//! inequalities and the product table behind the pointwise estimates.

use crate::analysis::{decade_rule, Bounded};
use crate::error::{Error, Result};
use crate::quad::{self, Tol};
use crate::weights::{chi_k, psi, psi74, psi_bar, psi_tilde, theta_w};

/// Time range of the outer integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SRange {
    ZeroSqrt,
    SqrtHalf,
    SqrtFull,
    HalfFull,
    ZeroHalf,
    ZeroFull,
    LastUnit,
    /// Single slice at `s = √t` (no time integral).
    AtSqrt,
}

impl SRange {
    pub fn bounds(self, t: f64) -> (f64, f64) {
        let r = t.sqrt();
        match self {
            SRange::ZeroSqrt => (0.0, r),
            SRange::SqrtHalf => (r, 0.5 * t),
            SRange::SqrtFull => (r, t),
            SRange::HalfFull => (0.5 * t, t),
            SRange::ZeroHalf => (0.0, 0.5 * t),
            SRange::ZeroFull => (0.0, t),
            SRange::LastUnit => (t - 1.0, t),
            SRange::AtSqrt => (r, r),
        }
    }

    fn ends_at_t(self) -> bool {
        matches!(self, SRange::SqrtFull | SRange::HalfFull | SRange::ZeroFull | SRange::LastUnit)
    }
}

/// How the kernel meets the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `∫∫ K(x-y, t-s) w(y,s) dy ds`.
    Spatial,
    /// `∫ K(x, t-s) w(0,s) ds`: a source sitting at the origin.
    Boundary,
    /// `∫ e^{-(t-s)/μ} w(x,s) ds`.
    Memory,
}

/// `(t-s)^{-a} (t+1-s)^{-b} e^{-(z-λ(t-s))²/(μ(t-s))}`, optionally differentiated in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub power: f64,
    pub shift_power: f64,
    pub lambda: f64,
    pub mu: f64,
    pub derivative: bool,
    pub range: SRange,
}

pub const KERNEL_POWERS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

impl KernelSpec {
    pub fn spatial(power: f64, lambda: f64, mu: f64, range: SRange) -> Self {
        KernelSpec { kind: KernelKind::Spatial, power, shift_power: 0.0, lambda, mu, derivative: false, range }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.lambda.is_finite() || !(self.shift_power >= 0.0) {
            return Err(Error::Param(format!("kernel needs mu > 0, finite lambda, shift power >= 0: {self:?}")));
        }
        if self.kind != KernelKind::Memory && !KERNEL_POWERS.contains(&self.power) {
            return Err(Error::Param(format!("kernel power {} not in {{1/2, 1, 3/2, 2}}", self.power)));
        }
        if self.kind == KernelKind::Memory && self.derivative {
            return Err(Error::Param("memory kernel has no spatial derivative".into()));
        }
        Ok(())
    }

    fn eval(&self, z: f64, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        if self.kind == KernelKind::Memory {
            return (-tau / self.mu).exp();
        }
        let d = z - self.lambda * tau;
        let mut k = tau.powf(-self.power) * (-d * d / (self.mu * tau)).exp();
        if self.shift_power > 0.0 {
            k *= (tau + 1.0).powf(-self.shift_power);
        }
        if self.derivative {
            k *= -2.0 * d / (self.mu * tau);
        }
        k
    }
}

/// Positive source weights `w(y,s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Zero,
    Theta { alpha: f64, lambda: f64, mu: f64 },
    Psi { alpha: f64, lambda: f64 },
    PsiBar { lambda: f64 },
    PsiTilde { lambda: f64 },
    /// Normalised, time-independent Gaussian `e^{-(y-c)²/w²}/(w√π)`.
    Bump { center: f64, width: f64 },
    /// `(s+1)^{-p}`, independent of `y`.
    TimeOnly { power: f64 },
    /// `(s+1)^{-β/2} w(y,s)`.
    Timed { beta: f64, inner: Box<SourceSpec> },
    Product(Box<SourceSpec>, Box<SourceSpec>),
}

impl SourceSpec {
    pub fn psi74(lambda: f64) -> Self {
        SourceSpec::Psi { alpha: 1.75, lambda }
    }

    pub fn timed(beta: f64, inner: SourceSpec) -> Self {
        SourceSpec::Timed { beta, inner: Box::new(inner) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Param(m));
        match self {
            SourceSpec::Theta { alpha, mu, .. } if !(*alpha >= 0.0 && *mu > 0.0) => bad(format!("Theta needs alpha >= 0, mu > 0: {self:?}")),
            SourceSpec::Psi { alpha, .. } if !(*alpha >= 0.0) => bad(format!("psi needs alpha >= 0: {self:?}")),
            SourceSpec::Bump { width, .. } if !(*width > 0.0) => bad("bump width must be positive".into()),
            SourceSpec::TimeOnly { power } if !power.is_finite() => bad("time power must be finite".into()),
            SourceSpec::Timed { beta, inner } => {
                if !beta.is_finite() {
                    return bad("time exponent must be finite".into());
                }
                inner.validate()
            }
            SourceSpec::Product(a, b) => {
                a.validate()?;
                b.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: f64, s: f64) -> f64 {
        match self {
            SourceSpec::Zero => 0.0,
            SourceSpec::Theta { alpha, lambda, mu } => theta_w(y, s, *alpha, *lambda, *mu),
            SourceSpec::Psi { alpha, lambda } => psi(y, s, *alpha, *lambda),
            SourceSpec::PsiBar { lambda } => psi_bar(y, s, *lambda),
            SourceSpec::PsiTilde { lambda } => psi_tilde(y, s, *lambda),
            SourceSpec::Bump { center, width } => {
                let d = (y - center) / width;
                (-d * d).exp() / (width * std::f64::consts::PI.sqrt())
            }
            SourceSpec::TimeOnly { power } => (s + 1.0).powf(-power),
            SourceSpec::Timed { beta, inner } => (s + 1.0).powf(-0.5 * beta) * inner.eval(y, s),
            SourceSpec::Product(a, b) => a.eval(y, s) * b.eval(y, s),
        }
    }

    /// `(centre, width)` of the spatial features at time `s`.
    fn features(&self, s: f64, out: &mut Vec<(f64, f64)>) {
        let q = s + 1.0;
        match self {
            SourceSpec::Theta { lambda, mu, .. } => out.push((lambda * q, (mu * q).sqrt())),
            SourceSpec::Psi { lambda, .. } => out.push((lambda * q, q.sqrt())),
            SourceSpec::PsiBar { lambda } => out.push((lambda * q, q.powf(5.0 / 7.0))),
            SourceSpec::PsiTilde { lambda } => out.push((lambda * q, q.powf(2.0 / 3.0))),
            SourceSpec::Bump { center, width } => out.push((*center, *width)),
            SourceSpec::Timed { inner, .. } => inner.features(s, out),
            SourceSpec::Product(a, b) => {
                a.features(s, out);
                b.features(s, out);
            }
            SourceSpec::Zero | SourceSpec::TimeOnly { .. } => {}
        }
    }

    fn rays(&self, out: &mut Vec<f64>) {
        match self {
            SourceSpec::Theta { lambda, .. } | SourceSpec::Psi { lambda, .. } | SourceSpec::PsiBar { lambda } | SourceSpec::PsiTilde { lambda } => {
                out.push(*lambda)
            }
            SourceSpec::Timed { inner, .. } => inner.rays(out),
            SourceSpec::Product(a, b) => {
                a.rays(out);
                b.rays(out);
            }
            _ => {}
        }
    }
}

/// Relative tolerances of the outer (time) and inner (space) integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvTol {
    pub outer: f64,
    pub inner: f64,
}

impl Default for ConvTol {
    fn default() -> Self {
        ConvTol { outer: 1e-7, inner: 1e-9 }
    }
}

impl ConvTol {
    pub fn tighter(self) -> Self {
        ConvTol { outer: self.outer * 0.01, inner: self.inner * 0.01 }
    }
}

/// Half-width of the kernel window, in units of `√(μτ)`.
const KERNEL_WINDOW: f64 = 10.0;

fn tol(rel: f64) -> Tol {
    Tol { abs: 1e-300, rel, max_intervals: 4000 }
}

fn slice(k: &KernelSpec, w: &SourceSpec, x: f64, t: f64, s: f64, rel: f64) -> Result<f64> {
    let tau = t - s;
    match k.kind {
        KernelKind::Memory => Ok(k.eval(0.0, tau) * w.eval(x, s)),
        KernelKind::Boundary => Ok(k.eval(x, tau) * w.eval(0.0, s)),
        KernelKind::Spatial => {
            if tau <= 0.0 {
                return Ok(0.0);
            }
            let c = x - k.lambda * tau;
            let r = KERNEL_WINDOW * (k.mu * tau).sqrt();
            let (lo, hi) = (c - r, c + r);
            let mut pts: Vec<f64> = (0..=8).map(|j| lo + (hi - lo) * j as f64 / 8.0).collect();
            let mut feats = Vec::new();
            w.features(s, &mut feats);
            for (fc, fw) in feats {
                for m in [-6.0, -2.0, -0.5, 0.0, 0.5, 2.0, 6.0] {
                    let p = fc + m * fw;
                    if p > lo && p < hi {
                        pts.push(p);
                    }
                }
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            quad::adaptive_mesh(|y| k.eval(x - y, tau) * w.eval(y, s), &pts, tol(rel))
        }
    }
}

/// `∫∫ K(x-y,t-s) w(y,s) dy ds` over the kernel's time range, by nested adaptive
/// Gauss–Kronrod. Ranges ending at `s = t` use `s = t - σ²` to absorb the kernel
/// singularity; the `y` integral is truncated to ten kernel widths.
pub fn convolve_with(k: &KernelSpec, w: &SourceSpec, x: f64, t: f64, ct: ConvTol) -> Result<f64> {
    if !(t >= 4.0) {
        return Err(Error::Param(format!("convolutions are evaluated for t >= 4, got {t}")));
    }
    k.validate()?;
    w.validate()?;
    if *w == SourceSpec::Zero {
        return Ok(0.0);
    }
    let (s0, s1) = k.range.bounds(t);
    if k.range == SRange::AtSqrt {
        return slice(k, w, x, t, s0, ct.inner);
    }
    let mut failure: Option<Error> = None;
    // time at which the kernel centre crosses a source ray
    let mut rays = Vec::new();
    w.rays(&mut rays);
    let mut hits: Vec<f64> = Vec::new();
    if k.kind == KernelKind::Spatial {
        for lp in rays {
            if (lp - k.lambda).abs() > 1e-12 {
                hits.push((x - k.lambda * t - lp) / (lp - k.lambda));
            }
        }
    } else if k.kind == KernelKind::Boundary && x != 0.0 && k.lambda != 0.0 {
        hits.push(t - x / k.lambda);
    }
    let total = if k.range.ends_at_t() {
        let smax = (t - s0).sqrt();
        let mut pts: Vec<f64> = (0..=8).map(|j| smax * j as f64 / 8.0).collect();
        pts.extend((1..=14).map(|j| smax * 0.5f64.powi(j + 3)));
        pts.extend(hits.iter().filter(|&&h| h > s0 && h < t).map(|&h| (t - h).sqrt()));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        quad::adaptive_mesh(
            |sig| {
                if failure.is_some() {
                    return 0.0;
                }
                match slice(k, w, x, t, t - sig * sig, ct.inner) {
                    Ok(v) => 2.0 * sig * v,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &pts,
            tol(ct.outer),
        )?
    } else {
        let len = s1 - s0;
        let mut pts: Vec<f64> = (0..=8).map(|j| s0 + len * j as f64 / 8.0).collect();
        pts.extend((1..=12).map(|j| s0 + len * 0.5f64.powi(j + 3)));
        pts.extend(hits.iter().copied().filter(|&h| h > s0 && h < s1));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        quad::adaptive_mesh(
            |s| {
                if failure.is_some() {
                    return 0.0;
                }
                slice(k, w, x, t, s, ct.inner).unwrap_or_else(|e| {
                    failure = Some(e);
                    0.0
                })
            },
            &pts,
            tol(ct.outer),
        )?
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

pub fn convolve(k: &KernelSpec, w: &SourceSpec, x: f64, t: f64) -> Result<f64> {
    convolve_with(k, w, x, t, ConvTol::default())
}

/// The convolution inequalities available for checking. `id()` gives the
/// conventional short label accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// `s ∈ [0,√t]`, cross-ray `ψ_{7/4}` source.
    EarlySlab,
    /// Single slice at `s = √t`.
    SqrtSlice,
    /// `s ∈ [√t,t]`, cross-ray Gaussian source; bound `ψ_{(α-1)/2}`.
    CrossTheta,
    /// `s ∈ [√t,t/2]`, same-ray Gaussian source, `α > 3`.
    SameTheta,
    /// `s ∈ [√t,t/2]`, cross-ray `(s+1)^{-11/8}ψ_{7/4}` source.
    CrossMiddle,
    /// Same-ray source, halves `[0,t/2]` and `[t/2,t]`, with logarithmic branches.
    SameRay,
    /// Cross-ray source, halves `[0,t/2]` and `[t/2,t]`, with the `χ_K` term.
    CrossRay,
    /// Boundary source `(s+1)^{-21/8}`.
    BoundaryDecay,
    /// Differentiated kernel against a boundary source.
    BoundaryDerivative,
    /// Exponential memory kernel.
    Memory,
}

impl Lemma {
    pub const ALL: [Lemma; 10] = [
        Lemma::EarlySlab,
        Lemma::SqrtSlice,
        Lemma::CrossTheta,
        Lemma::SameTheta,
        Lemma::CrossMiddle,
        Lemma::SameRay,
        Lemma::CrossRay,
        Lemma::BoundaryDecay,
        Lemma::BoundaryDerivative,
        Lemma::Memory,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::EarlySlab => "C.2",
            Lemma::SqrtSlice => "C.3",
            Lemma::CrossTheta => "C.4",
            Lemma::SameTheta => "C.5",
            Lemma::CrossMiddle => "C.6",
            Lemma::SameRay => "C.7",
            Lemma::CrossRay => "C.8",
            Lemma::BoundaryDecay => "C.9",
            Lemma::BoundaryDerivative => "C.10",
            Lemma::Memory => "C.11",
        }
    }

    /// Parameters used when none are given.
    pub fn default_params(self) -> LemmaParams {
        let base = LemmaParams { alpha: 0.5, beta: 0.5, lambda: 1.0, lambda_p: -1.0, mu: 2.0, k: None };
        match self {
            Lemma::EarlySlab => LemmaParams { alpha: 0.0, ..base },
            Lemma::SqrtSlice => LemmaParams { alpha: 0.0, beta: 1.0, ..base },
            Lemma::CrossTheta => LemmaParams { alpha: 4.0, ..base },
            Lemma::SameTheta => LemmaParams { alpha: 4.0, ..base },
            Lemma::CrossMiddle => LemmaParams { alpha: 0.0, ..base },
            Lemma::SameRay => base,
            Lemma::CrossRay => LemmaParams { beta: 1.0, ..base },
            Lemma::BoundaryDecay | Lemma::BoundaryDerivative => base,
            Lemma::Memory => LemmaParams { alpha: 1.0, ..base },
        }
    }
}

impl std::str::FromStr for Lemma {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches("lemma").trim_start_matches(['-', '_', ' ']);
        let key = key.strip_prefix('C').or_else(|| key.strip_prefix('c')).unwrap_or(key).trim_start_matches('.');
        Ok(match key {
            "2" => Lemma::EarlySlab,
            "3" => Lemma::SqrtSlice,
            "4" => Lemma::CrossTheta,
            "5" => Lemma::SameTheta,
            "6" => Lemma::CrossMiddle,
            "7" => Lemma::SameRay,
            "8" => Lemma::CrossRay,
            "9" => Lemma::BoundaryDecay,
            "10" => Lemma::BoundaryDerivative,
            "11" => Lemma::Memory,
            _ => return Err(Error::Param(format!("unknown lemma '{s}' (expected C.2 .. C.11)"))),
        })
    }
}

/// Parameters shared by the lemmas; each lemma reads the ones it needs.
/// `k` is the `χ_K` width; `None` scans [`K_CANDIDATES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub lambda_p: f64,
    pub mu: f64,
    pub k: Option<f64>,
}

pub const K_CANDIDATES: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

/// Times and the `x` layout: log-spaced offsets around `0, λ(t+1), λ'(t+1)` plus
/// a uniform fill of `[-span(t+1), span(t+1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub times: Vec<f64>,
    pub span: f64,
    pub per_centre: usize,
    pub uniform: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { times: vec![4.0, 16.0, 64.0, 256.0, 1024.0], span: 3.0, per_centre: 5, uniform: 12 }
    }
}

impl SampleGrid {
    pub fn points(&self, t: f64, centres: &[f64]) -> Vec<f64> {
        let q = t + 1.0;
        let half = self.span * q;
        let mut xs: Vec<f64> = (0..=self.uniform).map(|j| -half + 2.0 * half * j as f64 / self.uniform.max(1) as f64).collect();
        for &c in centres {
            xs.push(c);
            if self.per_centre > 0 {
                let (dmin, dmax) = (0.5f64, half);
                for j in 0..self.per_centre {
                    let f = if self.per_centre == 1 { 0.0 } else { j as f64 / (self.per_centre - 1) as f64 };
                    let d = dmin * (dmax / dmin).powf(f);
                    xs.push(c - d);
                    xs.push(c + d);
                }
            }
        }
        xs.retain(|x| x.abs() <= half);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        xs
    }
}

/// One inequality of a lemma over the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PartReport {
    pub part: String,
    /// `(t, sup_x LHS/RHS, argmax x)`.
    pub rows: Vec<(f64, f64, f64)>,
    pub bounded: Bounded,
}

impl PartReport {
    pub fn constant(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// Ratio report for a lemma. For the logarithmic branches `log_free` holds the
/// ratio against the bound without the `log(t+2)` factor, which must grow.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub params: LemmaParams,
    pub parts: Vec<PartReport>,
    pub log_free: Vec<PartReport>,
    /// Smallest passing `K` for the `χ_K` lemma.
    pub chosen_k: Option<f64>,
    pub pass: bool,
}

fn precondition(ok: bool, lemma: Lemma, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!("lemma {} requires {what}", lemma.id())))
    }
}

/// Enforce the stated hypotheses on `(α, β, λ, λ', μ)`.
pub fn lemma_preconditions(lemma: Lemma, p: &LemmaParams) -> Result<()> {
    let (a, b) = (p.alpha, p.beta);
    let distinct = (p.lambda - p.lambda_p).abs() > 0.0;
    precondition(p.mu > 0.0, lemma, "mu > 0")?;
    precondition(a.is_finite() && b.is_finite() && p.lambda.is_finite() && p.lambda_p.is_finite(), lemma, "finite parameters")?;
    if let Some(k) = p.k {
        precondition(k > 0.0, lemma, "K > 0")?;
    }
    match lemma {
        Lemma::EarlySlab => {
            precondition(distinct, lemma, "lambda != lambda'")?;
            precondition(a >= 0.0, lemma, "alpha >= 0")?;
            precondition((0.0..1.25).contains(&b), lemma, "0 <= beta < 5/4")
        }
        Lemma::SqrtSlice => precondition(a >= 0.0 && b >= 0.0, lemma, "alpha, beta >= 0"),
        Lemma::CrossTheta => {
            precondition(distinct, lemma, "lambda != lambda'")?;
            precondition(a > 0.0, lemma, "alpha > 0")
        }
        Lemma::SameTheta => precondition(a > 3.0, lemma, "alpha > 3"),
        Lemma::CrossMiddle => {
            precondition(distinct, lemma, "lambda != lambda'")?;
            precondition(a >= 0.0, lemma, "alpha >= 0")
        }
        Lemma::SameRay => precondition(a >= 0.0 && b >= 0.0, lemma, "alpha, beta >= 0"),
        Lemma::CrossRay => {
            precondition(distinct, lemma, "lambda != lambda'")?;
            precondition(a >= 0.0, lemma, "alpha >= 0")?;
            precondition((0.0..=3.5).contains(&b) && b != 2.0, lemma, "0 <= beta <= 7/2, beta != 2")
        }
        Lemma::BoundaryDecay => Ok(()),
        Lemma::BoundaryDerivative => precondition(p.lambda != 0.0, lemma, "lambda != 0"),
        Lemma::Memory => precondition(a >= 0.0, lemma, "alpha >= 0"),
    }
}

type Rhs = Box<dyn Fn(f64, f64) -> f64>;

// LHS kernel/source, right-hand side and (optionally) the log-free right-hand side.
struct Part {
    name: &'static str,
    kernel: KernelSpec,
    source: SourceSpec,
    rhs: Rhs,
    log_free: Option<Rhs>,
    // χ_K term for the cross-ray lemma: (p, q) exponents of |x-λ(t+1)|, |x-λ'(t+1)|
    chi: Option<(f64, f64)>,
    abs_value: bool,
}

fn log_factor(on: bool, t: f64) -> f64 {
    if on {
        (t + 2.0).ln()
    } else {
        1.0
    }
}

fn parts(lemma: Lemma, p: &LemmaParams) -> Vec<Part> {
    let LemmaParams { alpha: a, beta: b, lambda: l, lambda_p: lp, mu, .. } = *p;
    let sp = |power: f64, lam: f64, range: SRange| KernelSpec::spatial(power, lam, mu, range);
    let part = |name, kernel, source, rhs: Rhs| Part { name, kernel, source, rhs, log_free: None, chi: None, abs_value: false };
    match lemma {
        Lemma::EarlySlab => vec![part(
            "main",
            sp(1.0 + a, l, SRange::ZeroSqrt),
            SourceSpec::timed(b, SourceSpec::psi74(lp)),
            Box::new(move |x, t| (t + 1.0).powf(-a - (b - 0.75) / 4.0) * psi74(x, t, l)),
        )],
        Lemma::SqrtSlice => vec![part(
            "main",
            sp(0.5 + a, l, SRange::AtSqrt),
            SourceSpec::timed(b, SourceSpec::psi74(lp)),
            Box::new(move |x, t| (t + 1.0).powf(-a - (b - 0.75) / 4.0) * psi74(x, t, l)),
        )],
        Lemma::CrossTheta => vec![part(
            "main",
            sp(0.5, l, SRange::SqrtFull),
            SourceSpec::Theta { alpha: a, lambda: lp, mu },
            Box::new(move |x, t| psi(x, t, 0.5 * (a - 1.0), l)),
        )],
        Lemma::SameTheta => vec![part(
            "main",
            sp(1.0, l, SRange::SqrtHalf),
            SourceSpec::Theta { alpha: a, lambda: l, mu },
            Box::new(move |x, t| theta_w(x, t, 0.5 * (a + 1.0), l, mu)),
        )],
        Lemma::CrossMiddle => vec![part(
            "main",
            sp(0.5 + a, l, SRange::SqrtHalf),
            SourceSpec::timed(2.75, SourceSpec::psi74(lp)),
            Box::new(move |x, t| (t + 1.0).powf(-a) * psi74(x, t, l)),
        )],
        Lemma::SameRay => {
            let g1 = a + b.min(1.25) - 1.0;
            let g2 = a.min(1.0) + b - 1.0;
            let (log1, log2) = (b == 1.25, a == 1.0);
            let mut k1 = sp(1.0, l, SRange::ZeroHalf);
            k1.shift_power = 0.5 * a;
            let mut k2 = sp(1.0, l, SRange::HalfFull);
            k2.shift_power = 0.5 * a;
            let src = SourceSpec::timed(b, SourceSpec::psi74(l));
            let mut first = part("early", k1, src.clone(), Box::new(move |x, t| log_factor(log1, t) * (t + 1.0).powf(-0.5 * g1) * psi74(x, t, l)));
            if log1 {
                first.log_free = Some(Box::new(move |x, t| (t + 1.0).powf(-0.5 * g1) * psi74(x, t, l)));
            }
            let mut second = part("late", k2, src, Box::new(move |x, t| log_factor(log2, t) * (t + 1.0).powf(-0.5 * g2) * psi74(x, t, l)));
            if log2 {
                second.log_free = Some(Box::new(move |x, t| (t + 1.0).powf(-0.5 * g2) * psi74(x, t, l)));
            }
            vec![first, second]
        }
        Lemma::CrossRay => {
            let g1 = a + b.min(1.25) - 1.0;
            let g1p = a + b.min(2.0) - 1.0;
            let g2 = a.min(1.0) + b - 1.0;
            let (log1, log2) = (b == 1.25, a == 1.0);
            let mut k1 = sp(1.0, l, SRange::ZeroHalf);
            k1.shift_power = 0.5 * a;
            let mut k2 = sp(1.0, l, SRange::HalfFull);
            k2.shift_power = 0.5 * a;
            let src = SourceSpec::timed(b, SourceSpec::psi74(lp));
            let mut first = part(
                "early",
                k1,
                src.clone(),
                Box::new(move |x, t| {
                    let q = t + 1.0;
                    log_factor(log1, t) * q.powf(-0.5 * g1) * psi74(x, t, l) + q.powf(-0.5 * g1p) * psi74(x, t, lp)
                }),
            );
            first.chi = Some((b.min(2.75) / 2.0 + 0.375, a / 2.0 + 0.5));
            let mut second = part(
                "late",
                k2,
                src,
                Box::new(move |x, t| log_factor(log2, t) * (t + 1.0).powf(-0.5 * g2) * (psi74(x, t, l) + psi74(x, t, lp))),
            );
            second.chi = Some((b / 2.0 + 0.375, a.min(1.0) / 2.0 + 0.5));
            vec![first, second]
        }
        Lemma::BoundaryDecay => {
            let k = KernelSpec { kind: KernelKind::Boundary, ..sp(0.5, l, SRange::SqrtFull) };
            vec![part("main", k, SourceSpec::TimeOnly { power: 21.0 / 8.0 }, Box::new(move |x, t| psi_bar(x, t, l)))]
        }
        Lemma::BoundaryDerivative => {
            let k = KernelSpec { kind: KernelKind::Boundary, derivative: true, ..sp(0.5, l, SRange::SqrtFull) };
            let mut pt = part("main", k, SourceSpec::TimeOnly { power: 2.25 }, Box::new(move |x, t| psi_bar(x, t, l)));
            pt.abs_value = true;
            vec![pt]
        }
        Lemma::Memory => {
            let km = |range| KernelSpec { kind: KernelKind::Memory, ..sp(0.5, l, range) };
            vec![
                part("full", km(SRange::ZeroFull), SourceSpec::timed(2.0 * a, SourceSpec::psi74(l)), Box::new(move |x, t| (t + 1.0).powf(-a) * psi74(x, t, l))),
                // the unspecified rate constant is taken as 4μ
                part("early", km(SRange::ZeroHalf), SourceSpec::psi74(l), Box::new(move |x, t| (-t / (4.0 * mu)).exp() * psi74(x, t, l))),
            ]
        }
    }
}

/// Right sides below this are treated as underflowed and skipped.
const RHS_FLOOR: f64 = 1e-280;

fn sup_ratio(lhs: &[(f64, f64)], rhs: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (0.0, f64::NAN);
    for &(x, v) in lhs {
        let r = rhs(x);
        if r < RHS_FLOOR {
            continue;
        }
        let q = v / r;
        if q > best.0 || best.1.is_nan() {
            best = (q, x);
        }
    }
    best
}

fn part_report(name: String, rows: Vec<(f64, f64, f64)>) -> PartReport {
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    PartReport { part: name, bounded: decade_rule(&series), rows }
}

/// Sup over the sample grid of LHS/RHS for each part of the lemma, with the
/// decade rule across times. For the `χ_K` lemma every `K` in the candidates is
/// tried (or the given one) and the smallest passing value reported.
pub fn check_lemma(lemma: Lemma, params: &LemmaParams, grid: &SampleGrid) -> Result<LemmaReport> {
    lemma_preconditions(lemma, params)?;
    if grid.times.iter().any(|&t| !(t >= 4.0)) {
        return Err(Error::Param("lemma sample times must be >= 4".into()));
    }
    let (l, lp) = (params.lambda, params.lambda_p);
    let mut parts_out = Vec::new();
    let mut log_free = Vec::new();
    let mut chosen_k = None;
    for pt in parts(lemma, params) {
        let mut lhs_by_t: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for &t in &grid.times {
            let q = t + 1.0;
            let mut xs = grid.points(t, &[0.0, l * q, lp * q]);
            if pt.kernel.kind == KernelKind::Boundary {
                xs.retain(|&x| x != 0.0);
            }
            let mut vals = Vec::with_capacity(xs.len());
            for x in xs {
                let v = convolve(&pt.kernel, &pt.source, x, t)?;
                vals.push((x, if pt.abs_value { v.abs() } else { v }));
            }
            lhs_by_t.push((t, vals));
        }
        let rows_for = |rhs: &dyn Fn(f64, f64) -> f64| -> Vec<(f64, f64, f64)> {
            lhs_by_t
                .iter()
                .map(|(t, vals)| {
                    let (r, x) = sup_ratio(vals, &|x| rhs(x, *t));
                    (*t, r, x)
                })
                .collect()
        };
        if let Some((pe, qe)) = pt.chi {
            let ks: Vec<f64> = match params.k {
                Some(k) => vec![k],
                None => K_CANDIDATES.to_vec(),
            };
            let mut chosen: Option<(f64, PartReport)> = None;
            let mut last: Option<PartReport> = None;
            for k in ks {
                let rhs = |x: f64, t: f64| {
                    let q = t + 1.0;
                    let extra = if chi_k(x, t, l, lp, k) > 0.0 { (x - l * q).abs().powf(-pe) * (x - lp * q).abs().powf(-qe) } else { 0.0 };
                    (pt.rhs)(x, t) + extra
                };
                let rep = part_report(format!("{} (K={k})", pt.name), rows_for(&rhs));
                if rep.bounded.pass {
                    chosen = Some((k, rep));
                    break;
                }
                last = Some(rep);
            }
            match chosen {
                Some((k, rep)) => {
                    chosen_k = Some(chosen_k.map_or(k, |c: f64| c.max(k)));
                    parts_out.push(rep);
                }
                None => parts_out.push(last.expect("at least one K")),
            }
        } else {
            parts_out.push(part_report(pt.name.to_string(), rows_for(&*pt.rhs)));
        }
        if let Some(lf) = &pt.log_free {
            log_free.push(part_report(format!("{} without log", pt.name), rows_for(&**lf)));
        }
    }
    let pass = parts_out.iter().all(|p| p.bounded.pass) && log_free.iter().all(|p| !p.bounded.pass);
    Ok(LemmaReport { lemma, params: *params, parts: parts_out, log_free, chosen_k, pass })
}

// ---------------------------------------------------------------------------
// Product table

fn ln_theta(x: f64, t: f64, a: f64, l: f64, mu: f64) -> f64 {
    let q = t + 1.0;
    let d = x - l * q;
    -0.5 * a * q.ln() - d * d / (mu * q)
}

fn ln_psi(x: f64, t: f64, a: f64, l: f64) -> f64 {
    let q = t + 1.0;
    let d = x - l * q;
    -0.5 * a * (d * d + q).ln()
}

fn ln_psi_bar(x: f64, t: f64, l: f64) -> f64 {
    psi_bar(x, t, l).ln()
}

fn ln_psi_tilde(x: f64, t: f64, l: f64) -> f64 {
    psi_tilde(x, t, l).ln()
}

fn ln_sum(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Parameters of the product rows; `m_power` is the free exponent `M` of the
/// two-Gaussian row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub lambda_p: f64,
    pub mu: f64,
    pub m_power: f64,
}

impl Default for ProductParams {
    fn default() -> Self {
        ProductParams { alpha: 1.0, beta: 1.0, lambda: 1.0, lambda_p: -1.0, mu: 2.0, m_power: 10.0 }
    }
}

pub const PRODUCT_ROWS: usize = 12;

/// Times and uniform `x` spacing for the product checks; `x` spans
/// `[-span(t+1) - pad, span(t+1) + pad]` with extra points near both rays.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGrid {
    pub times: Vec<f64>,
    pub span: f64,
    pub pad: f64,
    pub n: usize,
}

impl Default for ProductGrid {
    fn default() -> Self {
        ProductGrid { times: vec![1.0, 4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0], span: 3.0, pad: 20.0, n: 4001 }
    }
}

impl ProductGrid {
    fn points(&self, t: f64, centres: &[f64]) -> Vec<f64> {
        let q = t + 1.0;
        let half = self.span * q + self.pad;
        let mut xs: Vec<f64> = (0..self.n).map(|j| -half + 2.0 * half * j as f64 / (self.n - 1) as f64).collect();
        for &c in centres {
            for j in -40..=40 {
                xs.push(c + 0.125 * j as f64 * q.sqrt());
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    pub row: usize,
    pub params: ProductParams,
    pub rows: Vec<(f64, f64, f64)>,
    pub bounded: Bounded,
}

impl ProductReport {
    pub fn constant(&self) -> f64 {
        self.rows.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// `(t, sup_x f g / h, argmax)` per time from log-domain evaluators.
pub fn product_ratio_rows(ln_f: &dyn Fn(f64, f64) -> f64, ln_g: &dyn Fn(f64, f64) -> f64, ln_h: &dyn Fn(f64, f64) -> f64, xs_for: &dyn Fn(f64) -> Vec<f64>, times: &[f64]) -> Vec<(f64, f64, f64)> {
    times
        .iter()
        .map(|&t| {
            let mut best = (0.0f64, f64::NAN);
            for x in xs_for(t) {
                let lf = ln_f(x, t);
                let r = if lf == f64::NEG_INFINITY { 0.0 } else { (lf + ln_g(x, t) - ln_h(x, t)).exp() };
                if r > best.0 || best.1.is_nan() {
                    best = (r, x);
                }
            }
            (t, best.0, best.1)
        })
        .collect()
}

fn row_hypotheses(row: usize, p: &ProductParams) -> Result<()> {
    let fail = |m: &str| Err(Error::Precondition(format!("product row {row} requires {m}")));
    if !(1..=PRODUCT_ROWS).contains(&row) {
        return Err(Error::Param(format!("product rows are 1..={PRODUCT_ROWS}, got {row}")));
    }
    if !(p.lambda != p.lambda_p && p.alpha > 0.0 && p.beta > 0.0 && p.mu > 0.0 && p.m_power > 0.0) {
        return fail("lambda != lambda', alpha, beta, mu, M > 0");
    }
    let s = p.alpha + p.beta;
    match row {
        9 if s < 1.75 => fail("alpha + beta >= 7/4"),
        10 if !(p.alpha.max(p.beta) <= 1.75 && s >= 1.75) => fail("max(alpha, beta) <= 7/4 and alpha + beta >= 7/4"),
        // beyond 7/4 the ratio grows near the ray like a positive power of t
        11 if p.alpha > 1.75 => fail("alpha <= 7/4"),
        12 if !(0.25..=1.75).contains(&p.alpha) => fail("1/4 <= alpha <= 7/4"),
        _ => Ok(()),
    }
}

/// Sup of `f g / h` for one row of the product table.
pub fn check_product_table(row: usize, p: &ProductParams, grid: &ProductGrid) -> Result<ProductReport> {
    row_hypotheses(row, p)?;
    let ProductParams { alpha: a, beta: b, lambda: l, lambda_p: lp, mu, m_power: m } = *p;
    let one = |_: f64, _: f64| 0.0;
    let rows = {
        let xs = |t: f64| grid.points(t, &[l * (t + 1.0), lp * (t + 1.0)]);
        let run = |f: &dyn Fn(f64, f64) -> f64, g: &dyn Fn(f64, f64) -> f64, h: &dyn Fn(f64, f64) -> f64| product_ratio_rows(f, g, h, &xs, &grid.times);
        let th = move |x: f64, t: f64| ln_theta(x, t, a, l, mu);
        match row {
            1 => run(&th, &one, &|x, t| ln_psi(x, t, a, l)),
            2 => run(&|x, t| ln_psi_bar(x, t, l), &one, &|x, t| ln_psi(x, t, 1.75, l)),
            3 => run(&|x, t| ln_psi_tilde(x, t, l), &one, &|x, t| ln_psi(x, t, 1.5, l)),
            4 => run(&th, &|x, t| ln_theta(x, t, b, lp, mu), &|x, t| ln_theta(x, t, m, l, 2.0 * mu)),
            5 => run(&th, &|x, t| ln_psi(x, t, b, l), &|x, t| ln_theta(x, t, a + b, l, mu)),
            6 => run(&th, &|x, t| ln_psi(x, t, b, lp), &|x, t| ln_theta(x, t, a + 2.0 * b, l, 2.0 * mu)),
            7 => run(&th, &|x, t| ln_psi_bar(x, t, l), &|x, t| ln_theta(x, t, a + 2.5, l, mu)),
            8 => run(&th, &|x, t| ln_psi_tilde(x, t, l), &|x, t| ln_theta(x, t, a + 2.0, l, mu)),
            9 => run(&|x, t| ln_psi(x, t, a, l), &|x, t| ln_psi(x, t, b, l), &|x, t| (-(a + b) / 2.0 + 0.875) * (t + 1.0).ln() + ln_psi(x, t, 1.75, l)),
            10 => run(&|x, t| ln_psi(x, t, a, l), &|x, t| ln_psi(x, t, b, lp), &|x, t| {
                (-(a + b) + 1.75) * (t + 1.0).ln() + ln_sum(ln_psi(x, t, 1.75, l), ln_psi(x, t, 1.75, lp))
            }),
            11 => run(&|x, t| ln_psi(x, t, a, l), &|x, t| ln_psi_bar(x, t, l), &|x, t| (-5.0 * a / 7.0) * (t + 1.0).ln() + ln_psi(x, t, 1.75, l)),
            12 => run(&|x, t| ln_psi(x, t, a, l), &|x, t| ln_psi_tilde(x, t, l), &|x, t| (-2.0 * a / 3.0 + 1.0 / 6.0) * (t + 1.0).ln() + ln_psi(x, t, 1.75, l)),
            _ => unreachable!(),
        }
    };
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    Ok(ProductReport { row, params: *p, bounded: decade_rule(&series), rows })
}

/// `|x-λ(t+1)|^{-α}|x-λ'(t+1)|^{-β} χ_K ≤ C[ψ_{7/4}(·;λ) + ψ̄(·;λ')]`.
pub fn check_indicator(p: &ProductParams, k: f64, grid: &ProductGrid) -> Result<ProductReport> {
    let ProductParams { alpha: a, beta: b, lambda: l, lambda_p: lp, .. } = *p;
    if !(l != lp && a > 0.0 && b > 0.0 && k > 0.0) {
        return Err(Error::Precondition("indicator bound requires lambda != lambda' and alpha, beta, K > 0".into()));
    }
    if !(a + b >= 1.75 && a + b / 2.0 >= 1.25) {
        return Err(Error::Precondition("indicator bound requires alpha + beta >= 7/4 and alpha + beta/2 >= 5/4".into()));
    }
    let xs = |t: f64| grid.points(t, &[l * (t + 1.0), lp * (t + 1.0)]);
    let f = move |x: f64, t: f64| {
        if chi_k(x, t, l, lp, k) > 0.0 {
            let q = t + 1.0;
            -a * (x - l * q).abs().ln() - b * (x - lp * q).abs().ln()
        } else {
            f64::NEG_INFINITY
        }
    };
    let h = move |x: f64, t: f64| ln_sum(ln_psi(x, t, 1.75, l), ln_psi_bar(x, t, lp));
    let rows = product_ratio_rows(&f, &|_, _| 0.0, &h, &xs, &grid.times);
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    Ok(ProductReport { row: 0, params: *p, bounded: decade_rule(&series), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_source_gives_zero() {
        let k = KernelSpec::spatial(0.5, 0.0, 2.0, SRange::ZeroFull);
        assert_eq!(convolve(&k, &SourceSpec::Zero, 1.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn kernel_mass_is_independent_of_tau() {
        // a flat source reduces the slice to the kernel mass √(πμ)
        let mu = 1.7;
        let k = KernelSpec::spatial(0.5, 0.3, mu, SRange::AtSqrt);
        let w = SourceSpec::TimeOnly { power: 0.0 };
        for t in [4.0, 25.0, 400.0] {
            let v = convolve(&k, &w, 2.0, t).unwrap();
            assert!((v / (PI * mu).sqrt() - 1.0).abs() < 1e-9, "{t} {v}");
        }
    }

    #[test]
    fn heat_kernel_spreads_narrow_bump() {
        let (mu, eps, t, x) = (2.0, 0.05, 9.0, 1.3);
        let k = KernelSpec::spatial(0.5, 0.0, mu, SRange::ZeroFull);
        let w = SourceSpec::Bump { center: 0.0, width: eps };
        let v = convolve(&k, &w, x, t).unwrap();
        // Gaussian convolution: τ^{-1/2} e^{-x²/(μτ)} * bump = τ^{-1/2} √(μτ/(μτ+ε²)) e^{-x²/(μτ+ε²)}
        let exact = quad::adaptive(
            |tau| (mu / (mu * tau + eps * eps)).sqrt() * (-x * x / (mu * tau + eps * eps)).exp(),
            0.0,
            t,
            &[],
            Tol { rel: 1e-12, ..Tol::default() },
        )
        .unwrap();
        assert!((v / exact - 1.0).abs() < 1e-6, "{v} {exact}");
    }

    #[test]
    fn tighter_tolerance_agrees() {
        let k = {
            let mut k = KernelSpec::spatial(1.0, 1.0, 2.0, SRange::HalfFull);
            k.shift_power = 0.25;
            k
        };
        let w = SourceSpec::timed(0.5, SourceSpec::psi74(-1.0));
        for x in [-20.0, 0.0, 17.0, 40.0] {
            let a = convolve(&k, &w, x, 36.0).unwrap();
            let b = convolve_with(&k, &w, x, 36.0, ConvTol::default().tighter()).unwrap();
            assert!((a / b - 1.0).abs() < 1e-5, "{x}: {a} {b}");
        }
    }

    #[test]
    fn engine_rejects_bad_input() {
        let w = SourceSpec::psi74(1.0);
        assert!(convolve(&KernelSpec::spatial(0.7, 0.0, 1.0, SRange::ZeroFull), &w, 0.0, 10.0).is_err());
        assert!(convolve(&KernelSpec::spatial(0.5, 0.0, 1.0, SRange::ZeroFull), &w, 0.0, 2.0).is_err());
        assert!(convolve(&KernelSpec::spatial(0.5, 0.0, -1.0, SRange::ZeroFull), &w, 0.0, 10.0).is_err());
    }

    #[test]
    fn lemma_ids_parse() {
        for l in Lemma::ALL {
            assert_eq!(l.id().parse::<Lemma>().unwrap(), l);
        }
        assert_eq!("c4".parse::<Lemma>().unwrap(), Lemma::CrossTheta);
        assert!("C.1".parse::<Lemma>().is_err());
    }

    #[test]
    fn hypotheses_enforced() {
        let grid = SampleGrid::default();
        let mut p = Lemma::EarlySlab.default_params();
        p.beta = 1.25;
        assert!(matches!(check_lemma(Lemma::EarlySlab, &p, &grid), Err(Error::Precondition(_))));
        let cases: [(Lemma, fn(&mut LemmaParams)); 9] = [
            (Lemma::CrossTheta, |p| p.alpha = 0.0),
            (Lemma::CrossTheta, |p| p.lambda_p = p.lambda),
            (Lemma::SameTheta, |p| p.alpha = 3.0),
            (Lemma::CrossMiddle, |p| p.lambda_p = p.lambda),
            (Lemma::SameRay, |p| p.beta = -0.1),
            (Lemma::CrossRay, |p| p.beta = 2.0),
            (Lemma::CrossRay, |p| p.beta = 3.6),
            (Lemma::BoundaryDerivative, |p| p.lambda = 0.0),
            (Lemma::Memory, |p| p.mu = 0.0),
        ];
        for (l, f) in cases {
            let mut p = l.default_params();
            f(&mut p);
            assert!(matches!(lemma_preconditions(l, &p), Err(Error::Precondition(_))), "{l:?} {p:?}");
        }
        for l in Lemma::ALL {
            lemma_preconditions(l, &l.default_params()).unwrap();
        }
    }

    #[test]
    fn product_rows_hypotheses() {
        let g = ProductGrid { n: 11, times: vec![1.0, 10.0], ..ProductGrid::default() };
        let p = ProductParams { alpha: 0.5, beta: 0.5, ..ProductParams::default() };
        assert!(check_product_table(9, &p, &g).is_err());
        assert!(check_product_table(10, &p, &g).is_err());
        assert!(check_product_table(12, &ProductParams { alpha: 0.2, ..p }, &g).is_err());
        assert!(check_product_table(13, &p, &g).is_err());
        assert!(check_indicator(&p, 1.0, &g).is_err());
    }

    #[test]
    fn zero_factor_gives_zero_ratio() {
        let rows = product_ratio_rows(&|_, _| f64::NEG_INFINITY, &|_, _| 0.0, &|x, t| ln_psi(x, t, 1.0, 1.0), &|_| vec![-1.0, 0.0, 2.0], &[1.0, 10.0]);
        assert!(rows.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn theta_psi_same_ray_row_is_bounded() {
        let g = ProductGrid { times: vec![1.0, 10.0, 100.0], span: 1.0, pad: 100.0, n: 2001 };
        let r = check_product_table(5, &ProductParams::default(), &g).unwrap();
        assert!(r.bounded.pass && r.constant() <= 1.0 + 1e-12, "{r:?}");
    }

    #[test]
    fn boundary_and_memory_lemmas_bounded() {
        let grid = SampleGrid::default();
        for l in [Lemma::BoundaryDecay, Lemma::BoundaryDerivative, Lemma::Memory] {
            let r = check_lemma(l, &l.default_params(), &grid).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn log_branch_discriminated() {
        let mut p = Lemma::SameRay.default_params();
        p.beta = 1.25;
        let r = check_lemma(Lemma::SameRay, &p, &SampleGrid::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.log_free.len(), 1);
        let lf = &r.log_free[0];
        assert!(!lf.bounded.pass);
        // the log-free ratio increases at every sampled time
        assert!(lf.rows.windows(2).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn all_product_rows_bounded() {
        let g = ProductGrid::default();
        let p = ProductParams::default();
        for row in 1..=PRODUCT_ROWS {
            let r = check_product_table(row, &p, &g).unwrap();
            assert!(r.bounded.pass && r.constant().is_finite(), "row {row}: {r:?}");
        }
        assert!(check_indicator(&p, 1.0, &g).unwrap().bounded.pass);
    }
}
