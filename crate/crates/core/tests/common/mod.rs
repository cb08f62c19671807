//! Brute-force oracles shared by the integration tests. They use only the
//! defining formula of `W` and generic numerics, never the closed forms.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// `W(δ, ω; α̂, β̂)` straight from its definition.
pub fn w(delta: f64, omega: f64, a: f64, b: f64) -> f64 {
    let d2 = delta * delta;
    let u = a * a - b * b - d2;
    let s = omega.sin().powi(2);
    -2.0 * d2 + u * u / (4.0 * b * b) + 5.0 * (1.0 - d2) * s * (u * u / (4.0 * b * b * d2) - 1.0)
}

fn grad(d: f64, o: f64, a: f64, b: f64) -> [f64; 2] {
    let h = 1e-6;
    [
        (w(d + h, o, a, b) - w(d - h, o, a, b)) / (2.0 * h),
        (w(d, o + h, a, b) - w(d, o - h, a, b)) / (2.0 * h),
    ]
}

/// Central-difference Hessian with step `h`.
pub fn hess(d: f64, o: f64, a: f64, b: f64, h: f64) -> [[f64; 2]; 2] {
    let f = |x: f64, y: f64| w(x, y, a, b);
    let fdd = (f(d + h, o) - 2.0 * f(d, o) + f(d - h, o)) / (h * h);
    let fww = (f(d, o + h) - 2.0 * f(d, o) + f(d, o - h)) / (h * h);
    let fdo =
        (f(d + h, o + h) - f(d + h, o - h) - f(d - h, o + h) + f(d - h, o - h)) / (4.0 * h * h);
    [[fdd, fdo], [fdo, fww]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Found {
    /// Hyperbolic on `ω = 0`.
    A,
    /// Elliptic on `ω = π/2`.
    B,
    /// Hyperbolic on `ω = π/2`.
    Aprime,
    /// Critical point on the upper boundary.
    E,
    Other,
}

/// Representative of `ω` in `[0, π/2]` under `ω ↦ −ω, ω + π`.
fn fold(o: f64) -> f64 {
    let r = o.rem_euclid(PI);
    if r > FRAC_PI_2 {
        PI - r
    } else {
        r
    }
}

/// All critical points of `W` (one per symmetry orbit), by Newton from a seed grid
/// plus a sign-change scan of `∂W/∂δ` along the upper boundary.
pub fn brute_force_critical_points(a: f64, b: f64) -> Vec<(f64, f64, Found)> {
    let dmin = (a - b).abs();
    let dmax = (a + b).min(1.0);
    let margin = 1e-7;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let n = 20;
    for i in 0..n {
        for j in 0..n {
            let mut d = dmin + (dmax - dmin) * (i as f64 + 0.5) / n as f64;
            let mut o = PI * j as f64 / n as f64;
            let mut ok = false;
            for _ in 0..40 {
                let g = grad(d, o, a, b);
                let hm = hess(d, o, a, b, 1e-4);
                let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
                if det == 0.0 {
                    break;
                }
                let sd = (hm[1][1] * g[0] - hm[0][1] * g[1]) / det;
                let so = (hm[0][0] * g[1] - hm[1][0] * g[0]) / det;
                d -= sd;
                o -= so;
                if !(d > dmin + margin && d < dmax - margin) {
                    break;
                }
                if sd.abs() < 1e-10 && so.abs() < 1e-10 {
                    ok = true;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let g = grad(d, o, a, b);
            let scale = hess(d, o, a, b, 1e-4)
                .iter()
                .flatten()
                .fold(1.0f64, |m, v| m.max(v.abs()));
            if g[0].abs().max(g[1].abs()) > 1e-6 * scale {
                continue;
            }
            let of = fold(o);
            if !pts
                .iter()
                .any(|&(pd, po)| (pd - d).abs() < 1e-6 && (po - of).abs() < 1e-6)
            {
                pts.push((d, of));
            }
        }
    }
    let mut out: Vec<(f64, f64, Found)> = pts
        .into_iter()
        .map(|(d, o)| {
            let hm = hess(d, o, a, b, 1e-4);
            let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
            let kind = if o < 1e-6 && det < 0.0 {
                Found::A
            } else if (o - FRAC_PI_2).abs() < 1e-6 {
                if det > 0.0 {
                    Found::B
                } else {
                    Found::Aprime
                }
            } else {
                Found::Other
            };
            (d, o, kind)
        })
        .collect();
    // upper boundary: W is constant along it, so critical points are zeros of ∂W/∂δ
    let h = 1e-6 * dmax;
    let wd = |o: f64| {
        (3.0 * w(dmax, o, a, b) - 4.0 * w(dmax - h, o, a, b) + w(dmax - 2.0 * h, o, a, b))
            / (2.0 * h)
    };
    let m = 400;
    let mut prev = wd(FRAC_PI_2 * 0.5 / m as f64);
    for k in 1..m {
        let o = FRAC_PI_2 * (k as f64 + 0.5) / m as f64;
        let cur = wd(o);
        if prev * cur < 0.0 {
            out.push((dmax, o, Found::E));
        }
        prev = cur;
    }
    out
}

/// Region label implied by the brute-force critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleLabel {
    Region1,
    Region2,
    Region3,
    None,
    Unrecognised,
}

pub fn brute_force_label(pts: &[(f64, f64, Found)]) -> OracleLabel {
    let count = |k: Found| pts.iter().filter(|p| p.2 == k).count();
    let (na, nb, nap, ne, no) = (
        count(Found::A),
        count(Found::B),
        count(Found::Aprime),
        count(Found::E),
        count(Found::Other),
    );
    match (na, nb, nap, ne, no) {
        (0, 0, 0, 0, 0) => OracleLabel::None,
        (1, 1, 0, 0, 0) => OracleLabel::Region1,
        (0, 1, 0, 1, 0) => OracleLabel::Region2,
        (0, 1, 1, 0, 0) => OracleLabel::Region3,
        _ => OracleLabel::Unrecognised,
    }
}
