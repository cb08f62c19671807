//! Two-body elements, Kepler's equation and the Delaunay chart of one
//! fictitious Kepler problem `H = |P|²/(2μ) − μM/|Q|`.
//!
//! Orientation convention: the reference plane is `xy`, the node longitude `h`
//! is measured from `+x`, and the angular momentum direction is
//! `(sin i sin h, −sin i cos h, cos i)`.

use crate::error::{domain, Error, Result};
use crate::numerics::{wrap_angle, wrap_pi, TWO_PI};
use crate::Vec3;
use serde::{Deserialize, Serialize};

/// Tolerance below which `e` or `sin i` make the Delaunay chart singular.
pub const CHART_TOL: f64 = 1e-12;

const KEPLER_MAX_ITER: usize = 50;
const KEPLER_TOL: f64 = 1e-13;

/// Reduced mass and central mass of one Kepler problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravParams {
    pub mu: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl GravParams {
    pub fn new(mu: f64, m: f64) -> Result<Self> {
        if !(mu > 0.0 && m > 0.0 && mu.is_finite() && m.is_finite()) {
            return domain(format!(
                "gravitational parameters must be positive, got mu={mu}, M={m}"
            ));
        }
        Ok(Self { mu, m })
    }

    /// Semi-major axis of the orbit with circular angular momentum `L`.
    pub fn semi_major_axis(&self, big_l: f64) -> f64 {
        let s = big_l / (self.mu * self.m.sqrt());
        s * s
    }

    /// Circular angular momentum of an orbit with semi-major axis `a`.
    pub fn circular_momentum(&self, a: f64) -> f64 {
        self.mu * (self.m * a).sqrt()
    }

    /// Keplerian energy `−μ³M²/(2L²)`.
    pub fn energy_of(&self, big_l: f64) -> f64 {
        -self.mu.powi(3) * self.m * self.m / (2.0 * big_l * big_l)
    }

    /// Mean motion for semi-major axis `a`.
    pub fn mean_motion(&self, a: f64) -> f64 {
        (self.m / (a * a * a)).sqrt()
    }
}

/// Delaunay action-angle elements `(L, l, G, g, H, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaunayElements {
    #[serde(rename = "L")]
    pub big_l: f64,
    pub l: f64,
    #[serde(rename = "G")]
    pub big_g: f64,
    pub g: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    pub h: f64,
}

impl DelaunayElements {
    /// Builds elements and reduces the angles to `[0, 2π)`.
    pub fn new(big_l: f64, l: f64, big_g: f64, g: f64, big_h: f64, h: f64) -> Result<Self> {
        let el = Self {
            big_l,
            l: wrap_angle(l),
            big_g,
            g: wrap_angle(g),
            big_h,
            h: wrap_angle(h),
        };
        el.validate()?;
        Ok(el)
    }

    /// Elements from classical `(a, e, i)` plus angles.
    pub fn from_classical(
        gp: &GravParams,
        a: f64,
        e: f64,
        i: f64,
        l: f64,
        g: f64,
        h: f64,
    ) -> Result<Self> {
        if !(a > 0.0) || !(0.0..1.0).contains(&e) {
            return domain(format!("need a > 0 and 0 <= e < 1, got a={a}, e={e}"));
        }
        let big_l = gp.circular_momentum(a);
        let big_g = big_l * (1.0 - e * e).sqrt();
        Self::new(big_l, l, big_g, g, big_g * i.cos(), h)
    }

    /// Checks `0 < G ≤ L`, `|H| ≤ G` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.big_l, self.l, self.big_g, self.g, self.big_h, self.h];
        if vals.iter().any(|v| !v.is_finite()) {
            return domain("non-finite Delaunay element");
        }
        let slack = 1e-14 * self.big_l.abs();
        if !(self.big_l > 0.0 && self.big_g > 0.0 && self.big_g <= self.big_l + slack) {
            return domain(format!(
                "need 0 < G <= L, got G={}, L={}",
                self.big_g, self.big_l
            ));
        }
        if self.big_h.abs() > self.big_g * (1.0 + 1e-14) {
            return domain(format!(
                "need |H| <= G, got H={}, G={}",
                self.big_h, self.big_g
            ));
        }
        Ok(())
    }

    pub fn eccentricity(&self) -> f64 {
        let r = (self.big_g / self.big_l).min(1.0);
        (1.0 - r * r).max(0.0).sqrt()
    }

    pub fn inclination(&self) -> f64 {
        (self.big_h / self.big_g).clamp(-1.0, 1.0).acos()
    }

    pub fn semi_major_axis(&self, gp: &GravParams) -> f64 {
        gp.semi_major_axis(self.big_l)
    }
}

/// Position `Q` and conjugate momentum `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPair {
    #[serde(rename = "Q")]
    pub q: Vec3,
    #[serde(rename = "P")]
    pub p: Vec3,
}

impl CartesianPair {
    pub fn new(q: Vec3, p: Vec3) -> Self {
        Self { q, p }
    }

    pub fn angular_momentum(&self) -> Vec3 {
        self.q.cross(&self.p)
    }

    /// Two-body energy `|P|²/(2μ) − μM/|Q|`.
    pub fn energy(&self, gp: &GravParams) -> f64 {
        self.p.norm_squared() / (2.0 * gp.mu) - gp.mu * gp.m / self.q.norm()
    }
}

/// Eccentric anomaly `u` solving `u − e sin u = l`.
///
/// Safeguarded Newton iteration on the bracket `[l − e, l + e]` (after
/// reducing `l` to `(−π, π]`), seeded with `l + e sin l`.
pub fn solve_kepler(l: f64, e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) || !l.is_finite() {
        return domain(format!(
            "solve_kepler needs 0 <= e < 1 and finite l, got e={e}, l={l}"
        ));
    }
    let lr = wrap_pi(l);
    let shift = l - lr;
    if e == 0.0 {
        return Ok(l);
    }
    let f = |u: f64| u - e * u.sin() - lr;
    let (mut lo, mut hi) = (lr - e, lr + e);
    let mut u = (lr + e * lr.sin()).clamp(lo, hi);
    for _ in 0..KEPLER_MAX_ITER {
        let fu = f(u);
        if fu == 0.0 {
            break;
        }
        if fu > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let dfu = 1.0 - e * u.cos();
        let mut next = u - fu / dfu;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let step = (next - u).abs();
        u = next;
        if step < 1e-16 * (1.0 + u.abs()) || hi - lo < 4.0 * f64::EPSILON {
            break;
        }
    }
    let res = f(u).abs();
    if res >= KEPLER_TOL {
        return Err(Error::Solver(format!(
            "Kepler equation not converged (l={l}, e={e}, residual={res:e})"
        )));
    }
    Ok(u + shift)
}

/// Rotation `R3(h) R1(i) R3(g)` applied to a perifocal vector.
fn perifocal_to_reference(v: [f64; 2], i: f64, g: f64, h: f64) -> Vec3 {
    let (sg, cg) = g.sin_cos();
    let (si, ci) = i.sin_cos();
    let (sh, ch) = h.sin_cos();
    let x1 = cg * v[0] - sg * v[1];
    let y1 = sg * v[0] + cg * v[1];
    let y2 = ci * y1;
    let z2 = si * y1;
    Vec3::new(ch * x1 - sh * y2, sh * x1 + ch * y2, z2)
}

/// Cartesian state realized by Delaunay elements.
pub fn elements_to_cartesian(el: &DelaunayElements, gp: &GravParams) -> Result<CartesianPair> {
    el.validate()?;
    let a = el.semi_major_axis(gp);
    let e = el.eccentricity();
    let u = solve_kepler(el.l, e)?;
    let (su, cu) = u.sin_cos();
    let eta = (1.0 - e * e).sqrt();
    let n = gp.mean_motion(a);
    let denom = 1.0 - e * cu;
    let pos = [a * (cu - e), a * eta * su];
    let vel = [-a * n * su / denom, a * n * eta * cu / denom];
    let i = el.inclination();
    let q = perifocal_to_reference(pos, i, el.g, el.h);
    let p = perifocal_to_reference(vel, i, el.g, el.h) * gp.mu;
    Ok(CartesianPair { q, p })
}

/// Delaunay elements of an elliptic, non-degenerate Cartesian state.
pub fn cartesian_to_elements(cp: &CartesianPair, gp: &GravParams) -> Result<DelaunayElements> {
    let r = cp.q.norm();
    if !(r > 0.0) || !cp.p.iter().all(|x| x.is_finite()) {
        return domain("invalid Cartesian state");
    }
    let v = cp.p / gp.mu;
    let energy = 0.5 * v.norm_squared() - gp.m / r;
    if !(energy < 0.0) {
        return domain(format!("state is not elliptic (specific energy {energy})"));
    }
    let a = -gp.m / (2.0 * energy);
    let c = cp.q.cross(&v);
    let cn = c.norm();
    let big_l = gp.circular_momentum(a);
    let big_g = gp.mu * cn;
    if big_g < CHART_TOL * big_l {
        return Err(Error::ChartSingular("rectilinear orbit".into()));
    }
    let evec = v.cross(&c) / gp.m - cp.q / r;
    let e = evec.norm();
    if e < CHART_TOL {
        return Err(Error::ChartSingular("circular orbit".into()));
    }
    let chat = c / cn;
    let sin_i = chat.x.hypot(chat.y);
    if sin_i < CHART_TOL {
        return Err(Error::ChartSingular("horizontal orbit".into()));
    }
    let h = chat.x.atan2(-chat.y);
    let node = Vec3::new(h.cos(), h.sin(), 0.0);
    let ehat = evec / e;
    let g = chat.cross(&node).dot(&ehat).atan2(node.dot(&ehat));
    let ecos_u = 1.0 - r / a;
    let esin_u = cp.q.dot(&v) / (gp.m * a).sqrt();
    let u = esin_u.atan2(ecos_u);
    let l = u - esin_u;
    Ok(DelaunayElements {
        big_l,
        l: wrap_angle(l),
        big_g: big_g.min(big_l),
        g: wrap_angle(g),
        big_h: gp.mu * c.z,
        h: wrap_angle(h),
    })
}

/// Exact Keplerian flow of `(Q, P)` over time `dt` (Lagrange f and g functions).
pub fn kepler_drift(cp: &CartesianPair, gp: &GravParams, dt: f64) -> Result<CartesianPair> {
    let r0v = cp.q;
    let v0 = cp.p / gp.mu;
    let r0 = r0v.norm();
    let energy = 0.5 * v0.norm_squared() - gp.m / r0;
    if !(energy < 0.0) {
        return domain(format!(
            "drift needs an elliptic state (specific energy {energy})"
        ));
    }
    let a = -gp.m / (2.0 * energy);
    let sqrt_ma = (gp.m * a).sqrt();
    let n = gp.mean_motion(a);
    let ecos0 = 1.0 - r0 / a;
    let esin0 = r0v.dot(&v0) / sqrt_ma;
    let e = ecos0.hypot(esin0);
    let u0 = esin0.atan2(ecos0);
    let l1 = u0 - esin0 + n * dt;
    let u1 = solve_kepler(l1, e.min(1.0 - 1e-16))?;
    let du = u1 - u0;
    let (sdu, cdu) = du.sin_cos();
    let one_minus_c = 2.0 * (0.5 * du).sin().powi(2);
    // r = a(1 − e cos u1) expressed through the initial state
    let r = a + (r0 - a) * cdu + a * esin0 * sdu;
    let f = 1.0 - a / r0 * one_minus_c;
    let g = dt - (du - sdu) / n;
    let fdot = -sqrt_ma * sdu / (r * r0);
    let gdot = 1.0 - a / r * one_minus_c;
    let q = r0v * f + v0 * g;
    let v = r0v * fdot + v0 * gdot;
    Ok(CartesianPair { q, p: v * gp.mu })
}

/// Orbital period for semi-major axis `a`.
pub fn orbital_period(gp: &GravParams, a: f64) -> f64 {
    TWO_PI / gp.mean_motion(a)
}
