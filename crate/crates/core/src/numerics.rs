//! Small numerical building blocks shared by the other modules.

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    // rem_euclid can return exactly 2π for tiny negative inputs
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Reduce an angle to `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_angle(x);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Pairwise (cascade) summation. Deterministic for a given slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Trapezoid rule for a `2π`-periodic function with `n` equispaced nodes.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = TWO_PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| f(k as f64 * h)).collect();
    pairwise_sum(&vals) * h
}

/// Integral over one period of a `2π`-periodic analytic function.
///
/// The node count is doubled until two successive estimates agree to `rtol`.
pub fn periodic_integral<F: Fn(f64) -> f64>(f: F, rtol: f64) -> Result<f64> {
    let mut n = 16;
    let mut prev = periodic_trapezoid(&f, n);
    while n < 1 << 20 {
        n *= 2;
        let cur = periodic_trapezoid(&f, n);
        if (cur - prev).abs() <= rtol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Precision(
        "periodic quadrature did not converge".into(),
    ))
}

/// Five-point central first derivative with one Richardson step.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Central second derivative with one Richardson step.
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    let d1 = d(h);
    let d2 = d(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Hessian of a function of two variables by Richardson-extrapolated central
/// differences. Returns `[[fxx, fxy], [fxy, fyy]]`.
pub fn hessian2<F: Fn(f64, f64) -> f64>(f: F, x: f64, y: f64, h: f64) -> [[f64; 2]; 2] {
    let f0 = f(x, y);
    let base = |h: f64| {
        let fxx = (f(x + h, y) - 2.0 * f0 + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f0 + f(x, y - h)) / (h * h);
        let fxy =
            (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        [fxx, fxy, fyy]
    };
    let a = base(h);
    let b = base(h / 2.0);
    let r: Vec<f64> = (0..3).map(|i| (4.0 * b[i] - a[i]) / 3.0).collect();
    [[r[0], r[1]], [r[1], r[2]]]
}

pub fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Root of `f` in `[a, b]` by Brent's method. `f(a)` and `f(b)` must differ in sign.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Solver(format!("root not bracketed in [{a}, {b}]")));
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let out = !((s > q.min(b)) && (s < q.max(b)));
        if out
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < tol)
            || (!mflag && (c - d).abs() < tol)
        {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(Error::Solver("Brent iteration cap reached".into()))
}

/// Golden-section minimisation on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Real roots of `x³ + b x² + c x + d` via the trigonometric/Cardano form,
/// each polished by one Newton step. Sorted ascending.
pub fn cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let mut roots = Vec::with_capacity(3);
    if p < 0.0 && disc >= 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (th - TWO_PI * k as f64 / 3.0).cos() + shift);
        }
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        roots.push(t + shift);
    }
    for r in roots.iter_mut() {
        let f = ((*r + b) * *r + c) * *r + d;
        let df = (3.0 * *r + 2.0 * b) * *r + c;
        if df != 0.0 {
            *r -= f / df;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}
