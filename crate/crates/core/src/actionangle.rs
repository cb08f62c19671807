//! Actions, frequencies and torsion of the quadrupolar tori.
//!
//! Everything is expressed for the `W̄ = (W + 5/3)/β̂³` flow in normalized
//! time with canonical pair `(δ, ω)`. Frequencies are positive rates
//! `2π / period`; `nu2 = −⟨∂W̄/∂β̂⟩` keeps the sign of the `g2` drift in
//! that time.

use crate::error::{domain, Error, Result};
use crate::numerics::{brent, derivative, periodic_integral, TWO_PI};
use crate::quadrupolar::flow::{close_orbit, ClosedOrbit, Section};
use crate::quadrupolar::{
    b_cubic_roots, find_singularities, wbar_derivatives, wbar_on_lower_boundary,
    wbar_on_upper_boundary, wbar_raw, LZParams, LZPoint, RegionClass, SingularityKind, EPS_DELTA,
};
use crate::threebody::MassSystem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

/// Steps per period in the refined orbit pass.
const STEPS_PER_PERIOD: usize = 1000;
/// Levels closer than this fraction of the branch range to its far end are refused.
pub const SEPARATRIX_BAND: f64 = 1e-6;
/// Torsion below this is flagged as degenerate.
pub const TORSION_FLOOR: f64 = 1e-12;

/// Which family of closed level curves a torus belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// Loops around B.
    Libration,
    /// Circulating curves adjacent to `δ = δ_min`.
    CircMin,
    /// Circulating curves adjacent to `δ = δ_max`.
    CircMax,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Libration => "libration",
            Branch::CircMin => "circ-min",
            Branch::CircMax => "circ-max",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "libration" => Ok(Branch::Libration),
            "circ-min" => Ok(Branch::CircMin),
            "circ-max" => Ok(Branch::CircMax),
            _ => domain(format!(
                "unknown branch '{s}' (libration, circ-min, circ-max)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusCoordinates {
    #[serde(rename = "I1")]
    pub i1: f64,
    pub beta_hat: f64,
    pub level: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub nu1: f64,
    pub nu2: f64,
    pub torsion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticTorusRecord {
    pub nu2_at_b: f64,
    pub nu_normal: f64,
}

/// Levels spanned by a branch: `start` is where the curves degenerate
/// (B or a boundary line), `end` the first critical level beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRange {
    pub start: f64,
    pub end: f64,
}

impl LevelRange {
    /// Fraction `t ∈ [0, 1]` of the way from `start` to `end`.
    pub fn at(&self, t: f64) -> f64 {
        self.start + t * (self.end - self.start)
    }

    fn direction(&self) -> f64 {
        (self.end - self.start).signum()
    }
}

fn b_location(p: &LZParams) -> Result<LZPoint> {
    let region = crate::quadrupolar::classify_region(p)?;
    if !region.has_b() {
        return domain(format!("{p} ({region}) has no elliptic point B"));
    }
    find_singularities(p)?
        .into_iter()
        .find(|r| r.kind == SingularityKind::B)
        .map(|r| r.location)
        .ok_or_else(|| Error::Consistency(format!("B missing at {p}")))
}

/// Root of the B cubic nearest to `guess`, used when continuing in parameters.
fn delta_b_continued(p: &LZParams, guess: f64) -> Result<f64> {
    b_cubic_roots(p)
        .into_iter()
        .map(f64::sqrt)
        .min_by(|u, v| (u - guess).abs().total_cmp(&(v - guess).abs()))
        .ok_or_else(|| Error::Domain(format!("no root of the B cubic at {p}")))
}

fn critical_levels(p: &LZParams) -> Result<Vec<f64>> {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let mut lv: Vec<f64> = find_singularities(p)?
        .iter()
        .map(|r| wbar_raw(r.location.delta, r.location.omega, a, b))
        .collect();
    lv.push(wbar_on_lower_boundary(p));
    lv.push(wbar_on_upper_boundary(p));
    Ok(lv)
}

/// Level range of a branch.
pub fn branch_level_range(p: &LZParams, branch: Branch) -> Result<LevelRange> {
    let region = crate::quadrupolar::classify_region(p)?;
    if region == RegionClass::Border {
        return domain(format!("{p} lies on a region border"));
    }
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let probe = 1e-4 * (p.delta_max() - p.delta_min());
    let (start, inside) = match branch {
        Branch::Libration => {
            let bl = b_location(p)?;
            (
                wbar_raw(bl.delta, bl.omega, a, b),
                wbar_raw(bl.delta + probe, FRAC_PI_2, a, b),
            )
        }
        Branch::CircMin => (
            wbar_on_lower_boundary(p),
            wbar_raw(p.delta_min() + probe, 0.0, a, b),
        ),
        Branch::CircMax => {
            if region == RegionClass::Region2 {
                return domain(format!(
                    "{p}: the upper boundary carries the E point, no circ-max family"
                ));
            }
            (
                wbar_on_upper_boundary(p),
                wbar_raw(p.delta_max() - probe, 0.0, a, b),
            )
        }
    };
    let dir = (inside - start).signum();
    let tol = 1e-12 * start.abs().max(1.0);
    let end = critical_levels(p)?
        .into_iter()
        .filter(|&c| dir * (c - start) > tol)
        .min_by(|x, y| (dir * (x - start)).total_cmp(&(dir * (y - start))))
        .ok_or_else(|| Error::Consistency(format!("no level bounds the {branch} family at {p}")))?;
    Ok(LevelRange { start, end })
}

fn check_level(level: f64, r: &LevelRange, branch: Branch) -> Result<()> {
    let dir = r.direction();
    let span = (r.end - r.start).abs();
    if !(dir * (level - r.start) >= 0.0 && dir * (r.end - level) > 0.0) {
        return domain(format!(
            "level {level} is outside the {branch} range [{}, {}]",
            r.start, r.end
        ));
    }
    if (r.end - level).abs() < SEPARATRIX_BAND * span {
        return Err(Error::SeparatrixProximity(format!(
            "level {level} is within {SEPARATRIX_BAND} of the bounding level {}",
            r.end
        )));
    }
    Ok(())
}

/// First root of `g` scanning from `from` to `to`.
fn first_root<F: Fn(f64) -> f64>(g: F, from: f64, to: f64, n: usize) -> Result<f64> {
    let mut x0 = from;
    let mut g0 = g(x0);
    for k in 1..=n {
        let x1 = from + (to - from) * k as f64 / n as f64;
        let g1 = g(x1);
        if g0 == 0.0 {
            return Ok(x0);
        }
        if g0 * g1 <= 0.0 {
            return brent(&g, x0.min(x1), x0.max(x1), 1e-15);
        }
        x0 = x1;
        g0 = g1;
    }
    Err(Error::Tracing(
        "level curve does not reach the start section".into(),
    ))
}

/// A point of the level curve on the branch's start section.
fn start_point(level: f64, p: &LZParams, branch: Branch) -> Result<LZPoint> {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let (lo, hi) = (p.delta_min() + EPS_DELTA, p.delta_max() - EPS_DELTA);
    match branch {
        Branch::Libration => {
            let db = b_location(p)?.delta;
            let top = b_cubic_roots(p)
                .into_iter()
                .map(f64::sqrt)
                .filter(|&d| d > db + 1e-9)
                .fold(hi, f64::min);
            let d = first_root(|d| wbar_raw(d, FRAC_PI_2, a, b) - level, db, top, 400)?;
            Ok(LZPoint::new(d, FRAC_PI_2))
        }
        Branch::CircMin => Ok(LZPoint::new(
            first_root(|d| wbar_raw(d, 0.0, a, b) - level, lo, hi, 400)?,
            0.0,
        )),
        Branch::CircMax => Ok(LZPoint::new(
            first_root(|d| wbar_raw(d, 0.0, a, b) - level, hi, lo, 400)?,
            0.0,
        )),
    }
}

/// Start point of the torus at `level` on its section (`ω = π/2` for
/// libration, `ω = 0` for circulation).
pub fn start_point_for(level: f64, p: &LZParams, branch: Branch) -> Result<LZPoint> {
    check_level(level, &branch_level_range(p, branch)?, branch)?;
    start_point(level, p, branch)
}

/// Derivative of the reference line `δ_ref(β̂)` subtracted from circulating actions.
fn delta_ref(p: &LZParams, branch: Branch) -> (f64, f64) {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    match branch {
        Branch::Libration => (0.0, 0.0),
        Branch::CircMin => ((a - b).abs(), (b - a).signum()),
        Branch::CircMax if p.upper_is_circular() => (1.0, 0.0),
        Branch::CircMax => (a + b, 1.0),
    }
}

/// One torus evaluated by closing its orbit.
#[derive(Debug, Clone, Copy)]
struct TorusEval {
    level: f64,
    i1: f64,
    /// `dI1/dJ0` with `J0 = (1/2π)∮δ dω` along the motion.
    sigma: f64,
    nu1: f64,
    /// `∂E/∂β̂` at fixed `I1`.
    psi: f64,
    orbit: ClosedOrbit,
}

fn evaluate(level: f64, p: &LZParams, branch: Branch) -> Result<TorusEval> {
    let range = branch_level_range(p, branch)?;
    check_level(level, &range, branch)?;
    let pt = start_point(level, p, branch)?;
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let (sec, h_guess) = match branch {
        Branch::Libration => {
            let (xi, up, _) = xi_upsilon(p)?;
            (
                Section::Libration,
                TWO_PI / (2.0 * (xi * up).sqrt()) / 200.0,
            )
        }
        _ => {
            let w = wbar_derivatives(pt.delta, pt.omega, a, b).d_delta.abs();
            (Section::Circulation, TWO_PI / w.max(1e-300) / 200.0)
        }
    };
    let orbit = close_orbit(&pt, p, sec, h_guess, STEPS_PER_PERIOD)?;
    let (dref, dref_b) = delta_ref(p, branch);
    let shifted = orbit.j0 - orbit.winding * dref;
    let sigma = if shifted >= 0.0 { 1.0 } else { -1.0 };
    let nu1 = TWO_PI / orbit.period;
    Ok(TorusEval {
        level,
        i1: shifted.abs(),
        sigma,
        nu1,
        psi: orbit.mean_wbar_beta + nu1 * orbit.winding * dref_b,
        orbit,
    })
}

/// Action `I1` of the torus at `level` (zero at the degenerate end of the branch).
pub fn action_i1(level: f64, p: &LZParams, branch: Branch) -> Result<f64> {
    let r = branch_level_range(p, branch)?;
    if level == r.start {
        return Ok(0.0);
    }
    Ok(evaluate(level, p, branch)?.i1)
}

/// The torus with action `i1` at parameters `p`, by Newton iteration on the level.
fn torus_with_action(i1: f64, p: &LZParams, branch: Branch, guess: f64) -> Result<TorusEval> {
    let range = branch_level_range(p, branch)?;
    let mut level = guess;
    // keep iterates inside the branch
    let clamp = |l: f64| {
        let t = ((l - range.start) / (range.end - range.start))
            .clamp(1e-14, 1.0 - 2.0 * SEPARATRIX_BAND);
        range.at(t)
    };
    level = clamp(level);
    for _ in 0..30 {
        let ev = evaluate(level, p, branch)?;
        let r = ev.i1 - i1;
        if r.abs() <= 1e-10 * i1 + 1e-15 {
            return Ok(ev);
        }
        let next = clamp(level - r * ev.sigma * ev.nu1);
        if next == level {
            return Ok(ev);
        }
        level = next;
    }
    Err(Error::Solver(format!(
        "no {branch} torus with I1 = {i1} found at {p}"
    )))
}

/// Hessian of `E(I1, β̂)` by central differences of `(∂E/∂I1, ∂E/∂β̂)`.
fn torsion_matrix_at(ev: &TorusEval, p: &LZParams, branch: Branch) -> Result<[[f64; 2]; 2]> {
    let hi = (1e-4f64).min(0.25 * ev.i1);
    let hb = 1e-4;
    let grad = |e: &TorusEval| [e.sigma * e.nu1, e.psi];
    let slope_i = ev.sigma * ev.nu1;
    let ip = torus_with_action(ev.i1 + hi, p, branch, ev.level + slope_i * hi)?;
    let im = torus_with_action(ev.i1 - hi, p, branch, ev.level - slope_i * hi)?;
    let pp = p.with_beta(p.beta_hat + hb);
    let pm = p.with_beta(p.beta_hat - hb);
    let bp = torus_with_action(ev.i1, &pp, branch, ev.level + ev.psi * hb)?;
    let bm = torus_with_action(ev.i1, &pm, branch, ev.level - ev.psi * hb)?;
    let (gip, gim, gbp, gbm) = (grad(&ip), grad(&im), grad(&bp), grad(&bm));
    // divide by the achieved actions; shift the β̂ pair back onto I1
    let di = ip.i1 - im.i1;
    let h00 = (gip[0] - gim[0]) / di;
    let h10 = (gip[1] - gim[1]) / di;
    let fix =
        |g: [f64; 2], e: &TorusEval| [g[0] - h00 * (e.i1 - ev.i1), g[1] - h10 * (e.i1 - ev.i1)];
    let (gbp, gbm) = (fix(gbp, &bp), fix(gbm, &bm));
    let h01 = (gbp[0] - gbm[0]) / (2.0 * hb);
    let h11 = (gbp[1] - gbm[1]) / (2.0 * hb);
    let off = 0.5 * (h01 + h10);
    Ok([[h00, off], [off, h11]])
}

/// Hessian of the energy as a function of `(I1, β̂)` at the torus `level`.
pub fn torsion_matrix(level: f64, p: &LZParams, branch: Branch) -> Result<[[f64; 2]; 2]> {
    let ev = evaluate(level, p, branch)?;
    torsion_matrix_at(&ev, p, branch)
}

/// Frequencies and torsion of the torus at `level`.
pub fn frequencies(level: f64, p: &LZParams, branch: Branch) -> Result<FrequencyRecord> {
    let ev = evaluate(level, p, branch)?;
    let h = torsion_matrix_at(&ev, p, branch)?;
    Ok(FrequencyRecord {
        nu1: ev.nu1,
        nu2: -ev.orbit.mean_wbar_beta,
        torsion: (h[0][0] * h[1][1] - h[0][1] * h[1][0]).abs(),
    })
}

/// Frequencies without the torsion (one orbit only).
pub fn frequencies_no_torsion(level: f64, p: &LZParams, branch: Branch) -> Result<(f64, f64)> {
    let ev = evaluate(level, p, branch)?;
    Ok((ev.nu1, -ev.orbit.mean_wbar_beta))
}

/// Torus coordinates of the torus at `level`.
pub fn torus_coordinates(level: f64, p: &LZParams, branch: Branch) -> Result<TorusCoordinates> {
    Ok(TorusCoordinates {
        i1: action_i1(level, p, branch)?,
        beta_hat: p.beta_hat,
        level,
        branch,
    })
}

/// The level whose torus has action `i1`.
pub fn level_for_action(i1: f64, p: &LZParams, branch: Branch) -> Result<f64> {
    let r = branch_level_range(p, branch)?;
    if !(i1 > 0.0) {
        return domain(format!("action must be positive, got {i1}"));
    }
    // first guess from the linear part near the degenerate end
    let slope = match branch {
        Branch::Libration => {
            let (xi, up, _) = xi_upsilon(p)?;
            2.0 * (xi * up).sqrt()
        }
        Branch::CircMin => boundary_frequency_lower(p),
        Branch::CircMax => boundary_frequency_upper(p),
    };
    let guess = r.start + r.direction() * slope * i1;
    Ok(torus_with_action(i1, p, branch, guess)?.level)
}

fn xi_upsilon_at(a: f64, b: f64, db: f64) -> (f64, f64, f64) {
    let x = db * db;
    let b5 = b.powi(5);
    let xi = 4.0 * (b * b + 2.0 * a * a + 1.25 - 3.0 * x) / b5;
    let up = 5.0 * (1.0 - x) * ((a + b).powi(2) - x) * (x - (a - b).powi(2)) / (4.0 * b5 * x);
    (xi, up, wbar_raw(db, FRAC_PI_2, a, b))
}

/// Taylor coefficients of `W̄ ≈ Φ + Ξ δ₁² + Υ ω₁²` at B, and `Φ = W̄(B)`.
pub fn xi_upsilon(p: &LZParams) -> Result<(f64, f64, f64)> {
    let db = b_location(p)?.delta;
    Ok(xi_upsilon_at(p.alpha_hat, p.beta_hat, db))
}

/// Small-oscillation frequency `2√(ΞΥ)` at B.
pub fn normal_frequency(p: &LZParams) -> Result<f64> {
    let (xi, up, _) = xi_upsilon(p)?;
    Ok(2.0 * (xi * up).sqrt())
}

fn nu_normal_continued(a: f64, b: f64, guess: f64) -> Result<(f64, f64)> {
    let q = LZParams::new(a, b)?;
    let db = delta_b_continued(&q, guess)?;
    let (xi, up, _) = xi_upsilon_at(a, b, db);
    Ok((2.0 * (xi * up).sqrt(), db))
}

/// Torsion of the linearized system at B, `4 (∂√(ΞΥ)/∂β̂)²`.
pub fn torsion_at_b(p: &LZParams) -> Result<f64> {
    let db = b_location(p)?.delta;
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let h = 1e-4 * b.min(1.0);
    let f = |bb: f64| {
        nu_normal_continued(a, bb, db)
            .map(|v| 0.5 * v.0)
            .unwrap_or(f64::NAN)
    };
    let d = derivative(f, b, h);
    if !d.is_finite() {
        return Err(Error::Precision(format!(
            "torsion derivative failed at {p}"
        )));
    }
    let t = 4.0 * d * d;
    if t < TORSION_FLOOR {
        return Err(Error::Degenerate(format!(
            "torsion {t:e} below {TORSION_FLOOR:e} at {p}"
        )));
    }
    Ok(t)
}

fn nu2_at(a: f64, b: f64, db: f64) -> f64 {
    -wbar_derivatives(db, FRAC_PI_2, a, b).d_beta
}

/// Tangential and normal frequencies of the elliptic torus at B.
pub fn elliptic_torus_frequencies(p: &LZParams) -> Result<EllipticTorusRecord> {
    let db = b_location(p)?.delta;
    let (xi, up, _) = xi_upsilon_at(p.alpha_hat, p.beta_hat, db);
    Ok(EllipticTorusRecord {
        nu2_at_b: nu2_at(p.alpha_hat, p.beta_hat, db),
        nu_normal: 2.0 * (xi * up).sqrt(),
    })
}

/// Jacobian of `(β̂, α̂) ↦ (nu2_at_B, nu_normal)` with B continued along the cubic.
pub fn elliptic_torus_jacobian(p: &LZParams) -> Result<[[f64; 2]; 2]> {
    let db = b_location(p)?.delta;
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let rec = |aa: f64, bb: f64| -> [f64; 2] {
        match nu_normal_continued(aa, bb, db) {
            Ok((nn, d)) => [nu2_at(aa, bb, d), nn],
            Err(_) => [f64::NAN; 2],
        }
    };
    let h = 1e-4 * a.min(b).min(1.0);
    let mut jac = [[0.0; 2]; 2];
    for (k, row) in jac.iter_mut().enumerate() {
        row[0] = derivative(|bb| rec(a, bb)[k], b, h);
        row[1] = derivative(|aa| rec(aa, b)[k], a, h);
    }
    if jac.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Precision(format!(
            "elliptic-torus Jacobian failed at {p}"
        )));
    }
    Ok(jac)
}

/// `9α̂²β̂ − 6α̂β̂² + β̂³ − 4α̂³ + 5α̂`.
fn boundary_poly(a: f64, b: f64) -> f64 {
    9.0 * a * a * b - 6.0 * a * b * b + b * b * b - 4.0 * a * a * a + 5.0 * a
}

/// Limit of `nu1` for circulating tori shrinking onto `δ = δ_min`.
pub fn boundary_frequency_lower(p: &LZParams) -> f64 {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    2.0 * ((a + b) * boundary_poly(a, b)).abs().sqrt() / b.powi(4)
}

/// Limit of `nu1` for circulating tori shrinking onto `δ = δ_max`.
pub fn boundary_frequency_upper(p: &LZParams) -> f64 {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    if p.upper_is_circular() {
        let (a2, b2) = (a * a, b * b);
        let sum = 1.0 - a2 - 3.0 * b2;
        let bb =
            0.5 * (-5.0 * a2 * a2 + 10.0 * a2 * b2 + 8.0 * a2 - 5.0 * b2 * b2 + 4.0 * b2 - 3.0);
        (bb * sum).abs().sqrt() / b.powi(5)
    } else {
        2.0 * ((a - b) * boundary_poly(a, -b)).abs().sqrt() / b.powi(4)
    }
}

/// `∮ dω / (a + b cos ω)` by adaptive periodic quadrature.
pub fn cosine_loop_integral(a: f64, b: f64) -> Result<f64> {
    if !(a > b.abs()) {
        return domain(format!("need a > |b|, got a={a}, b={b}"));
    }
    periodic_integral(|w| 1.0 / (a + b * w.cos()), 1e-14)
}

/// Determinant of the Keplerian block `∂²(F_Kep)/∂(L1, L2)²`.
pub fn kepler_hessian_det(ms: &MassSystem, l1: f64, l2: f64) -> f64 {
    let k1 = 3.0 * ms.mu1.powi(3) * ms.big_m1.powi(2) / l1.powi(4);
    let k2 = 3.0 * ms.mu2.powi(3) * ms.big_m2.powi(2) / l2.powi(4);
    k1 * k2
}

/// One row of a frequency map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMapRow {
    pub level: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub torsion: f64,
}

/// Frequencies on `n` levels spread across the open branch range
/// (rows in level order; torsion is NaN where its stencil leaves the branch).
pub fn frequency_map(p: &LZParams, branch: Branch, n: usize) -> Result<Vec<FrequencyMapRow>> {
    if n == 0 {
        return domain("need at least one level");
    }
    let r = branch_level_range(p, branch)?;
    let ts: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                0.5
            } else {
                0.02 + 0.94 * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    ts.par_iter()
        .map(|&t| {
            let level = r.at(t);
            let ev = evaluate(level, p, branch)?;
            let torsion = match torsion_matrix_at(&ev, p, branch) {
                Ok(h) => (h[0][0] * h[1][1] - h[0][1] * h[1][0]).abs(),
                Err(e)
                    if e.is_precision()
                        || matches!(e, Error::Domain(_) | Error::SeparatrixProximity(_)) =>
                {
                    f64::NAN
                }
                Err(e) => return Err(e),
            };
            Ok(FrequencyMapRow {
                level,
                i1: ev.i1,
                nu1: ev.nu1,
                nu2: -ev.orbit.mean_wbar_beta,
                torsion,
            })
        })
        .collect()
}
