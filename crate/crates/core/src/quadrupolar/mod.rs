//! The normalized quadrupolar (Lidov–Ziglin) system.
//!
//! With `L1 = 1` normalization, `α̂ = C/L1`, `β̂ = G2/L1`, `δ = G1/L1` and
//! `ω = g1`, the quadrupolar Hamiltonian is `F_quad = −(k/β̂³)(W + 5/3)` with
//!
//! ```text
//! W = −2δ² + (α̂²−β̂²−δ²)²/(4β̂²) + 5(1−δ²) sin²ω [(α̂²−β̂²−δ²)²/(4β̂²δ²) − 1]
//! ```
//!
//! and `k = 3 μ_quad L2³ / (8 a1 L1³)`. The reduced flow is generated by
//! `W̄ = (W + 5/3)/β̂³` with `δ' = −∂W̄/∂ω`, `ω' = ∂W̄/∂δ`; physical time runs
//! opposite to this normalized time, scaled by `α³ k / L1`.

mod contour;
pub(crate) mod flow;
mod regions;
mod singularities;

pub use contour::{
    auto_levels, encloses, level_curves, level_curves_with_grid, separatrix, separatrix_with_grid,
    Polyline, DEFAULT_GRID,
};
pub use flow::{quad_flow, BoundaryEvent, FlowTrajectory, GaussLegendre6};
pub use regions::{classify_region, region_margins, RegionMargins, BORDER_TOL};
pub use singularities::{b_cubic_roots, find_singularities, hessian_w, HessianReport, MORSE_TOL};

use crate::error::{domain, Error, Result};
use crate::kepler::DelaunayElements;
use crate::secular::total_angular_momentum;
use crate::threebody::MassSystem;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Chart exclusion margin at the circular and coplanar boundaries.
pub const EPS_DELTA: f64 = 1e-6;

/// Normalized parameters `(α̂, β̂) = (C/L1, G2/L1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZParams {
    pub alpha_hat: f64,
    pub beta_hat: f64,
}

impl LZParams {
    pub fn new(alpha_hat: f64, beta_hat: f64) -> Result<Self> {
        let p = Self {
            alpha_hat,
            beta_hat,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha_hat, self.beta_hat);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return domain(format!("need alpha_hat, beta_hat > 0, got ({a}, {b})"));
        }
        if (a - b).abs() > 1.0 {
            return domain(format!(
                "inadmissible parameters: |alpha_hat - beta_hat| = {} > 1",
                (a - b).abs()
            ));
        }
        if (a - b).abs() < 1e-12 {
            return Err(Error::Degenerate(
                "alpha_hat = beta_hat (C = G2) is excluded".into(),
            ));
        }
        Ok(())
    }

    pub fn delta_min(&self) -> f64 {
        (self.alpha_hat - self.beta_hat).abs()
    }

    pub fn delta_max(&self) -> f64 {
        (self.alpha_hat + self.beta_hat).min(1.0)
    }

    /// Whether the upper boundary is the circular-orbit line `δ = 1`.
    pub fn upper_is_circular(&self) -> bool {
        self.alpha_hat + self.beta_hat > 1.0
    }

    /// `α̂² − β̂²`.
    pub fn c(&self) -> f64 {
        self.alpha_hat * self.alpha_hat - self.beta_hat * self.beta_hat
    }

    /// `β̂²/2 + α̂² + 5/8`, the quadratic coefficient of the B/A′ cubic.
    pub fn s(&self) -> f64 {
        0.5 * self.beta_hat * self.beta_hat + self.alpha_hat * self.alpha_hat + 0.625
    }

    pub fn with_beta(&self, beta_hat: f64) -> Self {
        Self {
            alpha_hat: self.alpha_hat,
            beta_hat,
        }
    }

    pub fn with_alpha(&self, alpha_hat: f64) -> Self {
        Self {
            alpha_hat,
            beta_hat: self.beta_hat,
        }
    }

    /// Normalized parameters and phase point of an element pair.
    pub fn from_elements(
        el1: &DelaunayElements,
        el2: &DelaunayElements,
    ) -> Result<(Self, LZPoint)> {
        let l1 = el1.big_l;
        let c = total_angular_momentum(el1, el2);
        let p = Self::new(c / l1, el2.big_g / l1)?;
        Ok((p, LZPoint::new(el1.big_g / l1, el1.g)))
    }
}

impl fmt::Display for LZParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha_hat={}, beta_hat={})",
            self.alpha_hat, self.beta_hat
        )
    }
}

/// Point `(δ, ω) = (G1/L1, g1)` of the reduced phase cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZPoint {
    pub delta: f64,
    pub omega: f64,
}

impl LZPoint {
    pub fn new(delta: f64, omega: f64) -> Self {
        Self { delta, omega }
    }

    /// Whether the point lies on the physical cylinder `δ_min ≤ δ ≤ δ_max`;
    /// points below `δ_min` are analytic continuations.
    pub fn is_physical(&self, p: &LZParams) -> bool {
        let tol = 1e-12;
        self.delta >= p.delta_min() - tol && self.delta <= p.delta_max() + tol
    }
}

/// `k = 3 μ_quad L2³ / (8 a1 L1³)` relating `F_quad` to `W`.
pub fn k_coefficient(ms: &MassSystem, el1: &DelaunayElements, el2: &DelaunayElements) -> f64 {
    let a1 = el1.semi_major_axis(&ms.inner());
    3.0 * ms.mu_quad * el2.big_l.powi(3) / (8.0 * a1 * el1.big_l.powi(3))
}

/// `W` without argument checks.
#[inline]
pub fn w_raw(delta: f64, omega: f64, a: f64, b: f64) -> f64 {
    let x = delta * delta;
    let c = a * a - b * b;
    let b2 = b * b;
    let y = (c - x) * (c - x) / (4.0 * b2 * x);
    let s = omega.sin().powi(2);
    -2.0 * x + (c - x) * (c - x) / (4.0 * b2) + 5.0 * (1.0 - x) * s * (y - 1.0)
}

/// The normalized Lidov–Ziglin function `W(δ, ω; α̂, β̂)`.
pub fn w_value(pt: &LZPoint, p: &LZParams) -> Result<f64> {
    if !(pt.delta > 0.0) {
        return Err(Error::ChartSingular(format!(
            "W is singular at delta = {}",
            pt.delta
        )));
    }
    if pt.delta > 1.0 + 1e-12 {
        return domain(format!("delta = {} exceeds 1", pt.delta));
    }
    Ok(w_raw(pt.delta, pt.omega, p.alpha_hat, p.beta_hat))
}

/// Analytic partial derivatives of `W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WDerivatives {
    pub w: f64,
    pub d_delta: f64,
    pub d_omega: f64,
    pub d_beta: f64,
}

#[inline]
pub fn w_derivatives(delta: f64, omega: f64, a: f64, b: f64) -> WDerivatives {
    let x = delta * delta;
    let c = a * a - b * b;
    let b2 = b * b;
    let (sw, cw) = omega.sin_cos();
    let s = sw * sw;
    let cx = c - x;
    let y = cx * cx / (4.0 * b2 * x);
    let w = -2.0 * x + cx * cx / (4.0 * b2) + 5.0 * (1.0 - x) * s * (y - 1.0);
    let y_x = -(c * c - x * x) / (4.0 * b2 * x * x);
    let w_x = -2.0 - cx / (2.0 * b2) + 5.0 * s * (-(y - 1.0) + (1.0 - x) * y_x);
    let d_omega = 5.0 * (1.0 - x) * (y - 1.0) * 2.0 * sw * cw;
    let q_b = -cx / b - cx * cx / (2.0 * b2 * b);
    let d_beta = q_b + 5.0 * (1.0 - x) * s * q_b / x;
    WDerivatives {
        w,
        d_delta: 2.0 * delta * w_x,
        d_omega,
        d_beta,
    }
}

/// `W̄ = (W + 5/3)/β̂³`.
#[inline]
pub fn wbar_raw(delta: f64, omega: f64, a: f64, b: f64) -> f64 {
    (w_raw(delta, omega, a, b) + 5.0 / 3.0) / (b * b * b)
}

pub fn wbar_value(pt: &LZPoint, p: &LZParams) -> Result<f64> {
    Ok((w_value(pt, p)? + 5.0 / 3.0) / p.beta_hat.powi(3))
}

/// Partial derivatives of `W̄`, with `d_beta` at fixed `(δ, ω, α̂)`.
#[inline]
pub fn wbar_derivatives(delta: f64, omega: f64, a: f64, b: f64) -> WDerivatives {
    let d = w_derivatives(delta, omega, a, b);
    let b3 = b * b * b;
    let wp = d.w + 5.0 / 3.0;
    WDerivatives {
        w: wp / b3,
        d_delta: d.d_delta / b3,
        d_omega: d.d_omega / b3,
        d_beta: d.d_beta / b3 - 3.0 * wp / (b3 * b),
    }
}

/// Value of `W̄` on the boundary line `δ = δ_min` (it is constant there).
pub fn wbar_on_lower_boundary(p: &LZParams) -> f64 {
    wbar_raw(p.delta_min(), 0.0, p.alpha_hat, p.beta_hat)
}

/// Value of `W̄` on the boundary line `δ = δ_max` (constant as well).
pub fn wbar_on_upper_boundary(p: &LZParams) -> f64 {
    wbar_raw(p.delta_max(), 0.0, p.alpha_hat, p.beta_hat)
}

/// Region label of the Lidov–Ziglin classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionClass {
    Region1,
    Region2,
    Region3,
    Border,
    NoSingularities,
}

impl RegionClass {
    /// Number of distinct critical points on `ω ∈ [0, π/2]` (A/A′/E/B representatives).
    pub fn singularity_count(&self) -> Option<usize> {
        match self {
            RegionClass::Region1 | RegionClass::Region2 | RegionClass::Region3 => Some(2),
            RegionClass::NoSingularities => Some(0),
            RegionClass::Border => None,
        }
    }

    pub fn has_b(&self) -> bool {
        matches!(
            self,
            RegionClass::Region1 | RegionClass::Region2 | RegionClass::Region3
        )
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularityKind {
    A,
    B,
    Aprime,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
}

/// A critical point of `W` with its Morse data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    pub location: LZPoint,
    pub hessian_det: f64,
    pub stability: Stability,
    pub morse: bool,
}

impl SingularityReport {
    /// All copies on the cylinder under `ω → π − ω` and `ω → ω + π`.
    pub fn symmetric_copies(&self) -> Vec<LZPoint> {
        use std::f64::consts::PI;
        let w = self.location.omega;
        let mut out: Vec<LZPoint> = Vec::with_capacity(4);
        for cand in [w, PI - w, w + PI, 2.0 * PI - w] {
            let cw = crate::numerics::wrap_angle(cand);
            if !out
                .iter()
                .any(|p| (crate::numerics::wrap_pi(p.omega - cw)).abs() < 1e-12)
            {
                out.push(LZPoint::new(self.location.delta, cw));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derivative;
    use std::f64::consts::PI;

    #[test]
    fn w_at_delta_one() {
        let (a, b) = (0.7, 0.4);
        let expect = -2.0 + (a * a - b * b - 1.0f64).powi(2) / (4.0 * b * b);
        for w in [0.0, 0.3, 1.2, 2.9] {
            assert!((w_raw(1.0, w, a, b) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn w_at_omega_zero() {
        let (a, b, d) = (0.7f64, 0.4f64, 0.5f64);
        let expect = -2.0 * d * d + (a * a - b * b - d * d).powi(2) / (4.0 * b * b);
        assert!((w_raw(d, 0.0, a, b) - expect).abs() < 1e-14);
    }

    #[test]
    fn w_rejects_zero_delta() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        assert!(matches!(
            w_value(&LZPoint::new(0.0, 1.0), &p),
            Err(Error::ChartSingular(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(LZParams::new(0.3, 0.3), Err(Error::Degenerate(_))));
        assert!(matches!(LZParams::new(2.0, 0.3), Err(Error::Domain(_))));
        assert!(LZParams::new(-0.1, 0.3).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for &(d, w, a, b) in &[
            (0.5, 0.7, 0.5, 0.2),
            (0.8, 2.1, 0.9, 0.6),
            (0.3, 4.0, 0.4, 0.55),
        ] {
            let an = w_derivatives(d, w, a, b);
            let fd_d = derivative(|x| w_raw(x, w, a, b), d, 1e-4);
            let fd_w = derivative(|x| w_raw(d, x, a, b), w, 1e-4);
            let fd_b = derivative(|x| w_raw(d, w, a, x), b, 1e-5);
            assert!((an.d_delta - fd_d).abs() < 1e-7 * (1.0 + fd_d.abs()));
            assert!((an.d_omega - fd_w).abs() < 1e-7 * (1.0 + fd_w.abs()));
            assert!((an.d_beta - fd_b).abs() < 1e-6 * (1.0 + fd_b.abs()));
            let bar = wbar_derivatives(d, w, a, b);
            let fd_bb = derivative(|x| wbar_raw(d, w, a, x), b, 1e-5);
            assert!((bar.d_beta - fd_bb).abs() < 1e-6 * (1.0 + fd_bb.abs()));
        }
    }

    #[test]
    fn boundaries_are_level_lines() {
        for (a, b) in [(0.5, 0.2), (0.8, 0.6), (0.3, 0.5)] {
            let p = LZParams::new(a, b).unwrap();
            for w in [0.0, 0.4, 1.3, 2.2] {
                let lo = wbar_raw(p.delta_min(), w, a, b);
                let hi = wbar_raw(p.delta_max(), w, a, b);
                assert!((lo - wbar_on_lower_boundary(&p)).abs() < 1e-10 * lo.abs().max(1.0));
                assert!((hi - wbar_on_upper_boundary(&p)).abs() < 1e-10 * hi.abs().max(1.0));
            }
        }
    }

    #[test]
    fn symmetric_copies_count() {
        let r = SingularityReport {
            kind: SingularityKind::E,
            location: LZPoint::new(0.5, 0.3),
            hessian_det: -1.0,
            stability: Stability::Hyperbolic,
            morse: true,
        };
        assert_eq!(r.symmetric_copies().len(), 4);
        let mut b = r;
        b.location.omega = PI / 2.0;
        assert_eq!(b.symmetric_copies().len(), 2);
    }
}
