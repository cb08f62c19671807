//! First-order averaging of `F_pert` over both mean anomalies and the closed
//! quadrupolar term.

use crate::error::{domain, Error, Result};
use crate::kepler::{elements_to_cartesian, DelaunayElements, GravParams};
use crate::numerics::{linear_fit, pairwise_sum, TWO_PI};
use crate::threebody::{
    expansion_ratio, f_pert_unchecked, legendre_p, sigma_n, JacobiState, MassSystem,
};
use crate::Vec3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_NODES: usize = 64;
pub const MIN_NODES: usize = 16;
const MAX_NODES: usize = 1024;
pub const DEFAULT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecularConfig {
    /// Trapezoid nodes per mean anomaly (starting value; doubled until converged).
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Semi-major-axis ratios used by [`residual_order`].
    #[serde(default)]
    pub alpha_list: Vec<f64>,
    /// Relative change between successive node doublings accepted as converged.
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

fn default_rtol() -> f64 {
    DEFAULT_RTOL
}

impl Default for SecularConfig {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODES,
            alpha_list: Vec::new(),
            rtol: DEFAULT_RTOL,
        }
    }
}

impl SecularConfig {
    pub fn with_alphas(alpha_list: Vec<f64>) -> Self {
        Self {
            alpha_list,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < MIN_NODES {
            return domain(format!(
                "need at least {MIN_NODES} quadrature nodes, got {}",
                self.nodes
            ));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return domain(format!("tolerance must lie in (0, 1), got {}", self.rtol));
        }
        Ok(())
    }
}

/// Orbit pair described by shapes, pericentre arguments and the mutual
/// inclination; [`PairGeometry::to_elements`] places it in the Laplace frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    pub a1: f64,
    pub e1: f64,
    pub g1: f64,
    pub a2: f64,
    pub e2: f64,
    pub g2: f64,
    pub mutual_inclination: f64,
    /// Node longitude of the inner orbit; the outer node is opposite.
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub l1: f64,
    #[serde(default)]
    pub l2: f64,
}

impl PairGeometry {
    pub fn to_elements(&self, ms: &MassSystem) -> Result<(DelaunayElements, DelaunayElements)> {
        let (gp1, gp2) = (ms.inner(), ms.outer());
        if !(self.a1 > 0.0 && self.a2 > 0.0) {
            return domain("semi-major axes must be positive");
        }
        for e in [self.e1, self.e2] {
            if !(0.0..1.0).contains(&e) {
                return domain(format!("eccentricity {e} outside [0, 1)"));
            }
        }
        let big_l1 = gp1.circular_momentum(self.a1);
        let big_l2 = gp2.circular_momentum(self.a2);
        let g1 = big_l1 * (1.0 - self.e1 * self.e1).sqrt();
        let g2 = big_l2 * (1.0 - self.e2 * self.e2).sqrt();
        let c2 = g1 * g1 + g2 * g2 + 2.0 * g1 * g2 * self.mutual_inclination.cos();
        let c = c2.sqrt();
        if !(c > 0.0) {
            return Err(Error::Degenerate("total angular momentum vanishes".into()));
        }
        let h1 = (c2 + g1 * g1 - g2 * g2) / (2.0 * c);
        let h2 = c - h1;
        let el1 = DelaunayElements::new(big_l1, self.l1, g1, self.g1, h1.clamp(-g1, g1), self.h)?;
        let el2 =
            DelaunayElements::new(big_l2, self.l2, g2, self.g2, h2.clamp(-g2, g2), self.h + PI)?;
        Ok((el1, el2))
    }

    pub fn alpha(&self) -> f64 {
        self.a1 / self.a2
    }
}

/// Positions along one orbit at equispaced mean anomalies.
fn orbit_positions(el: &DelaunayElements, gp: &GravParams, n: usize) -> Result<Vec<Vec3>> {
    (0..n)
        .map(|k| {
            let mut e = *el;
            e.l = TWO_PI * k as f64 / n as f64;
            elements_to_cartesian(&e, gp).map(|cp| cp.q)
        })
        .collect()
}

/// Average of `f(Q1, Q2)` over both mean anomalies with the trapezoid rule on
/// `2n` nodes, together with the value from the embedded `n`-node grid.
fn double_average<F>(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
    n: usize,
    f: &F,
) -> Result<(f64, f64)>
where
    F: Fn(Vec3, Vec3) -> f64 + Sync,
{
    let m = 2 * n;
    let q1s = orbit_positions(el1, &ms.inner(), m)?;
    let q2s = orbit_positions(el2, &ms.outer(), m)?;
    let rows: Vec<(f64, f64)> = q1s
        .par_iter()
        .map(|&q1| {
            let vals: Vec<f64> = q2s.iter().map(|&q2| f(q1, q2)).collect();
            let even: Vec<f64> = vals.iter().step_by(2).copied().collect();
            (pairwise_sum(&vals), pairwise_sum(&even))
        })
        .collect();
    let full: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let coarse: Vec<f64> = rows.iter().step_by(2).map(|r| r.1).collect();
    Ok((
        pairwise_sum(&full) / (m * m) as f64,
        pairwise_sum(&coarse) / (n * n) as f64,
    ))
}

fn converged_average<F>(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
    cfg: &SecularConfig,
    f: F,
) -> Result<f64>
where
    F: Fn(Vec3, Vec3) -> f64 + Sync,
{
    let mut n = cfg.nodes;
    loop {
        let (fine, coarse) = double_average(el1, el2, ms, n, &f)?;
        if (fine - coarse).abs() <= cfg.rtol * fine.abs() {
            return Ok(fine);
        }
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::Precision(format!(
                "averaging did not converge with {MAX_NODES} nodes (last change {:e})",
                ((fine - coarse) / fine).abs()
            )));
        }
    }
}

fn check_pair(el1: &DelaunayElements, el2: &DelaunayElements, ms: &MassSystem) -> Result<f64> {
    el1.validate()?;
    el2.validate()?;
    let a1 = el1.semi_major_axis(&ms.inner());
    let a2 = el2.semi_major_axis(&ms.outer());
    let alpha = a1 / a2;
    let ratio = expansion_ratio(alpha, el1.eccentricity(), el2.eccentricity(), ms);
    if ratio >= 1.0 {
        return domain(format!(
            "orbits not hierarchical enough (max sigma * apocentre1 / pericentre2 = {ratio})"
        ));
    }
    Ok(alpha)
}

/// `⟨F_pert⟩` averaged over both mean anomalies.
pub fn average_fpert(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
    cfg: &SecularConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_pair(el1, el2, ms)?;
    converged_average(el1, el2, ms, cfg, |q1, q2| f_pert_unchecked(q1, q2, ms))
}

/// Average of the Legendre partial sum through order `n_max`.
pub fn average_legendre(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
    n_max: u32,
    cfg: &SecularConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_pair(el1, el2, ms)?;
    let sig: Vec<f64> = (0..=n_max)
        .map(|n| if n < 2 { 0.0 } else { sigma_n(ms, n) })
        .collect();
    converged_average(el1, el2, ms, cfg, |q1, q2| {
        let (r1, r2) = (q1.norm(), q2.norm());
        let cz = q1.dot(&q2) / (r1 * r2);
        let rho = r1 / r2;
        let mut s = 0.0;
        for n in 2..=n_max {
            s += sig[n as usize] * legendre_p(n, cz) * rho.powi(n as i32);
        }
        -ms.mu1 * ms.m2 * s / r2
    })
}

/// Total angular momentum `|C1 + C2|` of an element pair.
pub fn total_angular_momentum(el1: &DelaunayElements, el2: &DelaunayElements) -> f64 {
    let dir = |el: &DelaunayElements| {
        let si = el.inclination().sin();
        Vec3::new(si * el.h.sin(), -si * el.h.cos(), el.big_h / el.big_g) * el.big_g
    };
    (dir(el1) + dir(el2)).norm()
}

/// The `α`-free quadrupolar Hamiltonian `F_quad(G1, g1; C, G2, L1, L2)` with
/// prefactor `−μ_quad L2³ / (8 a1 G2³)`. The pericentre argument `g1` is read
/// from `el1`, so the pair must be given in the Laplace frame.
pub fn quadrupolar_coefficient(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
) -> Result<f64> {
    el1.validate()?;
    el2.validate()?;
    let c = total_angular_momentum(el1, el2);
    let (l1, g1, l2, g2) = (el1.big_l, el1.big_g, el2.big_l, el2.big_g);
    if (c - g2).abs() < 1e-9 * l1 {
        return Err(Error::Degenerate("C = G2 (excluded collision case)".into()));
    }
    let (gmin, gmax) = ((c - g2).abs(), l1.min(c + g2));
    let slack = 1e-12 * l1;
    if g1 < gmin - slack || g1 > gmax + slack {
        return domain(format!("G1 = {g1} outside [{gmin}, {gmax}]"));
    }
    let a1 = el1.semi_major_axis(&ms.inner());
    let x = (g1 / l1).powi(2);
    let ci2 = (c * c - g1 * g1 - g2 * g2).powi(2) / (4.0 * g1 * g1 * g2 * g2);
    let sg2 = el1.g.sin().powi(2);
    let braces = 3.0 * x * (1.0 + ci2) + 15.0 * (1.0 - x) * ((1.0 - sg2) + sg2 * ci2)
        - 6.0 * (1.0 - x)
        - 4.0;
    Ok(-ms.mu_quad * l2.powi(3) / (8.0 * a1 * g2.powi(3)) * braces)
}

/// Quadrupolar term of the averaged perturbation, `α³ F_quad`.
pub fn quadrupolar_term(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
) -> Result<f64> {
    let f = quadrupolar_coefficient(el1, el2, ms)?;
    let alpha = el1.semi_major_axis(&ms.inner()) / el2.semi_major_axis(&ms.outer());
    Ok(alpha.powi(3) * f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFit {
    pub alphas: Vec<f64>,
    pub averages: Vec<f64>,
    pub quadrupolar: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log|residual|` against `log α`.
    pub exponent: f64,
}

/// Outer elements with the same shape and orientation but semi-major axis `a2`.
pub fn rescale_outer(el2: &DelaunayElements, ms: &MassSystem, a2: f64) -> Result<DelaunayElements> {
    let big_l2 = ms.outer().circular_momentum(a2);
    let r = big_l2 / el2.big_l;
    DelaunayElements::new(big_l2, el2.l, el2.big_g * r, el2.g, el2.big_h * r, el2.h)
}

/// Scaling exponent of `⟨F_pert⟩ − α³F_quad` when `a2` varies at fixed `a1`.
pub fn residual_order(
    el1: &DelaunayElements,
    el2: &DelaunayElements,
    ms: &MassSystem,
    cfg: &SecularConfig,
) -> Result<ResidualFit> {
    cfg.validate()?;
    let alphas = &cfg.alpha_list;
    if alphas.len() < 2 {
        return domain("alpha_list needs at least two values");
    }
    let lo = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = alphas.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 4.0 {
        return domain(format!(
            "alpha_list must span a factor of 4, got [{lo}, {hi}]"
        ));
    }
    let a1 = el1.semi_major_axis(&ms.inner());
    let mut fit = ResidualFit {
        alphas: alphas.clone(),
        averages: Vec::new(),
        quadrupolar: Vec::new(),
        residuals: Vec::new(),
        exponent: f64::NAN,
    };
    for &alpha in alphas {
        let e2 = rescale_outer(el2, ms, a1 / alpha)?;
        // changing G2 tilts the invariable plane, so g1 must be re-measured from it
        let (l1, l2) = JacobiState::from_elements(el1, &e2, ms)?
            .to_laplace_frame()?
            .to_elements(ms)?;
        let avg = average_fpert(&l1, &l2, ms, cfg)?;
        let quad = quadrupolar_term(&l1, &l2, ms)?;
        let res = avg - quad;
        if res.abs() < 100.0 * cfg.rtol * avg.abs() {
            return Err(Error::Precision(format!(
                "residual {res:e} at alpha={alpha} is at the quadrature floor"
            )));
        }
        fit.averages.push(avg);
        fit.quadrupolar.push(quad);
        fit.residuals.push(res);
    }
    let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = fit.residuals.iter().map(|r| r.abs().ln()).collect();
    fit.exponent = linear_fit(&lx, &ly).0;
    Ok(fit)
}
