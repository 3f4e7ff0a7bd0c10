//! Quadrature rules: composite Simpson and adaptive Gauss–Kronrod (7/15).

use crate::error::{Error, Result};

/// Composite Simpson on `[a,b]` with `n` panels (`n` rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Simpson sum of uniformly spaced samples. Falls back to the trapezoid rule
/// on the last panel when the number of intervals is odd.
pub fn simpson_samples(y: &[f64], h: f64) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (y[0] + y[1]);
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut acc = y[0] + y[even];
    for (k, v) in y.iter().enumerate().take(even).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = acc * h / 3.0;
    if even < intervals {
        total += 0.5 * h * (y[n - 2] + y[n - 1]);
    }
    total
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * hl, ((rk - rg) * hl).abs())
}

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-300, rel: 1e-8, max_intervals: 2000 }
    }
}

/// Globally adaptive Gauss–Kronrod over `[a,b]`, optionally split first at `breaks`.
/// Bisects the interval with the largest error estimate until the summed estimate
/// satisfies `max(abs, rel·|I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut pts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&p| p > lo && p < hi).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    // Features sitting on a breakpoint can be far narrower than the segment and
    // invisible to the first GK15 pass, so grade the mesh toward each break.
    let mut graded = Vec::new();
    for &b in &inner {
        for k in 1..=12 {
            let d = (hi - lo) * 0.25f64.powi(k);
            graded.push(b - d);
            graded.push(b + d);
        }
    }
    inner.extend(graded.into_iter().filter(|&p| p > lo && p < hi));
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    pts.extend(inner);
    pts.push(hi);
    Ok(sign * adaptive_mesh(&mut f, &pts, tol)?)
}

/// Globally adaptive Gauss–Kronrod starting from the given increasing mesh.
pub fn adaptive_mesh<F: FnMut(f64) -> f64>(mut f: F, pts: &[f64], tol: Tol) -> Result<f64> {
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    // (a, b, value, error)
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(pts.len() + 32);
    for w in pts.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            segs.push((w[0], w[1], v, e));
        }
    }
    if segs.is_empty() {
        return Ok(0.0);
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if segs.len() >= tol.max_intervals {
            // Accept if the remaining error is tiny relative to the integral scale.
            if err <= 1e3 * tol.rel * total.abs().max(tol.abs) {
                return Ok(total);
            }
            return Err(Error::Quadrature(format!(
                "interval budget exhausted on [{lo}, {hi}]: value {total:e}, error {err:e}"
            )));
        }
        let (imax, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.3 > acc.1 { (i, s.3) } else { acc });
        let (sa, sb, _, _) = segs[imax];
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            return Ok(total);
        }
        let (v1, e1) = gk15(&mut f, sa, mid);
        let (v2, e2) = gk15(&mut f, mid, sb);
        segs[imax] = (sa, mid, v1, e1);
        segs.push((mid, sb, v2, e2));
    }
}
