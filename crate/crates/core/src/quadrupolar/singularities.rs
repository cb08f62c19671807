//! Critical points A, B, A′, E of `W` and their Morse data.

use super::regions::e_condition;
use super::{
    classify_region, w_raw, LZParams, LZPoint, RegionClass, SingularityKind, SingularityReport,
    Stability,
};
use crate::error::{domain, Error, Result};
use crate::numerics::{cubic_real_roots, det2, hessian2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Determinants below this magnitude are reported as non-Morse.
pub const MORSE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    /// `[[W_δδ, W_δω], [W_ωδ, W_ωω]]`.
    pub hessian: [[f64; 2]; 2],
    pub det: f64,
    pub stability: Stability,
    pub morse: bool,
}

/// Hessian of `W` in `(δ, ω)` by Richardson-extrapolated central differences.
pub fn hessian_w(pt: &LZPoint, p: &LZParams) -> Result<HessianReport> {
    if !(pt.delta > 0.0) {
        return Err(Error::ChartSingular(format!(
            "Hessian needs delta > 0, got {}",
            pt.delta
        )));
    }
    let h = 1e-3 * pt.delta.min(1.0);
    if h < 1e-10 {
        return Err(Error::Precision(format!(
            "finite-difference step underflow at delta = {}",
            pt.delta
        )));
    }
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let hess = hessian2(|d, w| w_raw(d, w, a, b), pt.delta, pt.omega, h);
    let det = det2(&hess);
    Ok(HessianReport {
        hessian: hess,
        det,
        stability: if det > 0.0 {
            Stability::Elliptic
        } else {
            Stability::Hyperbolic
        },
        morse: det.abs() > MORSE_TOL,
    })
}

/// Roots `x = δ²` of `x³ − s x² + (5/8)(α̂² − β̂²)² = 0` strictly inside
/// `(δ_min², δ_max²)`; these locate B and A′ on `ω = π/2`.
pub fn b_cubic_roots(p: &LZParams) -> Vec<f64> {
    let c = p.c();
    let lo = p.delta_min().powi(2);
    let hi = p.delta_max().powi(2);
    cubic_real_roots(-p.s(), 0.0, 0.625 * c * c)
        .into_iter()
        .filter(|&x| x > lo + 1e-13 && x < hi - 1e-13)
        .collect()
}

fn report(kind: SingularityKind, location: LZPoint, p: &LZParams) -> Result<SingularityReport> {
    let h = hessian_w(&location, p)?;
    Ok(SingularityReport {
        kind,
        location,
        hessian_det: h.det,
        stability: h.stability,
        morse: h.morse,
    })
}

fn cubic_points(p: &LZParams) -> Result<Vec<SingularityReport>> {
    let mut out = Vec::new();
    for x in b_cubic_roots(p) {
        let pt = LZPoint::new(x.sqrt(), FRAC_PI_2);
        let r = report(SingularityKind::B, pt, p)?;
        let kind = match r.stability {
            Stability::Elliptic => SingularityKind::B,
            Stability::Hyperbolic => SingularityKind::Aprime,
        };
        out.push(SingularityReport { kind, ..r });
    }
    Ok(out)
}

/// Critical points of `W` on `ω ∈ [0, π/2]` (one representative per
/// symmetry orbit), as predicted by the region classification.
pub fn find_singularities(p: &LZParams) -> Result<Vec<SingularityReport>> {
    let region = classify_region(p)?;
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let inconsistent = |what: &str| Error::Consistency(format!("{what} at {p} ({region})"));
    let cubic = cubic_points(p)?;
    let count = |k: SingularityKind| cubic.iter().filter(|r| r.kind == k).count();
    let mut out = Vec::new();
    match region {
        RegionClass::Border => return domain(format!("{p} lies on a region border")),
        RegionClass::NoSingularities => return Ok(out),
        RegionClass::Region1 => {
            out.push(report(
                SingularityKind::A,
                LZPoint::new((a * a + 3.0 * b * b).sqrt(), 0.0),
                p,
            )?);
            if count(SingularityKind::B) != 1 {
                return Err(inconsistent("expected one elliptic root of the cubic"));
            }
        }
        RegionClass::Region2 => {
            if count(SingularityKind::B) != 1 {
                return Err(inconsistent("expected one elliptic root of the cubic"));
            }
            let (q, r) = e_condition(a, b, !p.upper_is_circular());
            let sin2 = q / r;
            if !(0.0..=1.0).contains(&sin2) {
                return Err(inconsistent("E ordinate out of range"));
            }
            out.push(report(
                SingularityKind::E,
                LZPoint::new(p.delta_max(), sin2.sqrt().asin()),
                p,
            )?);
        }
        RegionClass::Region3 => {
            if count(SingularityKind::B) != 1 || count(SingularityKind::Aprime) != 1 {
                return Err(inconsistent(
                    "expected one elliptic and one hyperbolic root of the cubic",
                ));
            }
        }
    }
    out.extend(
        cubic
            .into_iter()
            .filter(|r| r.kind == SingularityKind::B || region == RegionClass::Region3),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::golden_min;

    #[test]
    fn region1_reference_point() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        let s = find_singularities(&p).unwrap();
        let a = s.iter().find(|r| r.kind == SingularityKind::A).unwrap();
        assert!((a.location.delta - 0.37f64.sqrt()).abs() < 1e-14);
        assert_eq!(a.location.omega, 0.0);
        assert_eq!(a.stability, Stability::Hyperbolic);
        assert!((a.hessian_det + 66.15).abs() < 1e-6 * 66.15);
        let b = s.iter().find(|r| r.kind == SingularityKind::B).unwrap();
        assert_eq!(b.stability, Stability::Elliptic);
        assert!(b.morse);
    }

    #[test]
    fn delta_b_matches_one_dimensional_extremum() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        let b = find_singularities(&p)
            .unwrap()
            .into_iter()
            .find(|r| r.kind == SingularityKind::B)
            .unwrap()
            .location;
        let sign = if hessian_w(&b, &p).unwrap().hessian[0][0] > 0.0 {
            1.0
        } else {
            -1.0
        };
        let d = golden_min(
            |d| sign * w_raw(d, FRAC_PI_2, 0.5, 0.2),
            p.delta_min() + 1e-6,
            p.delta_max() - 1e-6,
            1e-12,
        );
        assert!((d - b.delta).abs() < 1e-8, "{d} vs {}", b.delta);
    }

    #[test]
    fn special_parameters_roots() {
        let r2 = 2f64.sqrt();
        let p = LZParams::new(
            (13.0 / 60.0 - r2 / 10.0).sqrt(),
            (13.0 / 60.0 + r2 / 5.0).sqrt(),
        )
        .unwrap();
        let s = find_singularities(&p).unwrap();
        let b = s.iter().find(|r| r.kind == SingularityKind::B).unwrap();
        let ap = s
            .iter()
            .find(|r| r.kind == SingularityKind::Aprime)
            .unwrap();
        assert!((b.location.delta - r2 / 2.0).abs() < 1e-12);
        assert!((ap.location.delta - 3f64.sqrt() / 2.0).abs() < 1e-12);
        // exact determinants of this configuration
        assert!((b.hessian_det - 4.64125398155313).abs() < 1e-7 * 4.64);
        let ap_exact = (9591.0 - 6876.0 * r2) / 119.0;
        assert!((ap.hessian_det - ap_exact).abs() < 1e-7 * ap_exact.abs());
    }

    #[test]
    fn printed_beta_does_not_give_half_and_three_quarters() {
        let r2 = 2f64.sqrt();
        let p = LZParams::new(
            (13.0 / 60.0 - r2 / 10.0).sqrt(),
            (13.0 / 60.0 + r2 / 10.0).sqrt(),
        )
        .unwrap();
        let roots = b_cubic_roots(&p);
        assert!(roots
            .iter()
            .all(|x| (x - 0.5).abs() > 1e-3 && (x - 0.75).abs() > 1e-3));
    }

    #[test]
    fn e_point_determinants() {
        // inner branch α̂ + β̂ < 1
        for &(a, b) in &[(0.3, 0.4), (0.2, 0.5)] {
            let p = LZParams::new(a, b).unwrap();
            if classify_region(&p).unwrap() != RegionClass::Region2 {
                continue;
            }
            let e = find_singularities(&p)
                .unwrap()
                .into_iter()
                .find(|r| r.kind == SingularityKind::E)
                .unwrap();
            let f = -16.0
                * (a - b)
                * (4.0 * a * a * a + 9.0 * a * a * b + 6.0 * a * b * b + b * b * b - 5.0 * a)
                / (b * b);
            assert!(
                (e.hessian_det - f).abs() < 1e-6 * f.abs(),
                "{} vs {f}",
                e.hessian_det
            );
            assert_eq!(e.stability, Stability::Hyperbolic);
        }
        // circular branch α̂ + β̂ > 1
        for &(a, b) in &[(0.6, 0.7), (0.5, 0.75)] {
            let p = LZParams::new(a, b).unwrap();
            assert_eq!(classify_region(&p).unwrap(), RegionClass::Region2);
            let e = find_singularities(&p)
                .unwrap()
                .into_iter()
                .find(|r| r.kind == SingularityKind::E)
                .unwrap();
            let (a2, b2) = (a * a, b * b);
            let f = 2.0
                * (3.0 * b2 + a2 - 1.0)
                * (5.0 * a2 * a2 - 10.0 * a2 * b2 - 8.0 * a2 + 5.0 * b2 * b2 - 4.0 * b2 + 3.0)
                / (b2 * b2);
            assert!(
                (e.hessian_det - f).abs() < 1e-6 * f.abs(),
                "{} vs {f}",
                e.hessian_det
            );
        }
    }

    #[test]
    fn border_is_refused() {
        let b: f64 = 0.2;
        let p = LZParams::new((1.0 - 3.0 * b * b).sqrt(), b).unwrap();
        assert!(matches!(find_singularities(&p), Err(Error::Domain(_))));
    }
}
