//! Parameter-region classification of `(α̂, β̂)` (with `L1 = 1`).
//!
//! Each region is a conjunction of strict inequalities `m > 0`. A region
//! holds when every margin exceeds the tolerance, fails when some margin is
//! below minus the tolerance, and is undecided otherwise; any undecided
//! region makes the parameters a border case.

use super::{LZParams, RegionClass};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const BORDER_TOL: f64 = 1e-9;

/// Margins of every defining inequality (positive when satisfied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMargins {
    pub region1: Vec<f64>,
    pub region2: Vec<f64>,
    pub region3: Vec<f64>,
}

impl RegionMargins {
    /// Smallest distance to any defining equality.
    pub fn min_abs(&self) -> f64 {
        self.region1
            .iter()
            .chain(&self.region2)
            .chain(&self.region3)
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    Yes,
    No,
    Maybe,
}

fn conj(margins: &[f64], tol: f64) -> Tri {
    if margins.iter().any(|&m| m < -tol) {
        Tri::No
    } else if margins.iter().all(|&m| m > tol) {
        Tri::Yes
    } else {
        Tri::Maybe
    }
}

/// `(q, r)` of the E-point condition `0 < q < r`; `sin²ω_E = q/r`.
pub(crate) fn e_condition(a: f64, b: f64, inner_branch: bool) -> (f64, f64) {
    if inner_branch {
        (
            (b - a) * (b + a) * (b + a),
            5.0 * a * (1.0 - (a + b) * (a + b)),
        )
    } else {
        let t = a * a - b * b - 1.0;
        (
            2.0 * (3.0 * b * b + a * a - 1.0),
            5.0 * (4.0 * b * b - t * t),
        )
    }
}

fn margins_for_branch(p: &LZParams, inner_branch: bool) -> RegionMargins {
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let (q, r) = e_condition(a, b, inner_branch);
    let s = p.s();
    let c = p.c();
    RegionMargins {
        region1: vec![a - b, 1.0 - 3.0 * b * b - a * a],
        region2: vec![q, r - q],
        region3: vec![
            2.0 * s / 3.0 - (a - b) * (a - b),
            (1.0f64).min((a + b) * (a + b)) - 2.0 * s / 3.0,
            32.0 / 135.0 * s * s * s - c * c,
            q - r,
        ],
    }
}

/// Margins on the branch selected by `α̂ + β̂ ≶ 1`.
pub fn region_margins(p: &LZParams) -> RegionMargins {
    margins_for_branch(p, p.alpha_hat + p.beta_hat < 1.0)
}

fn label(m: &RegionMargins, tol: f64) -> Option<RegionClass> {
    let t = [
        (conj(&m.region1, tol), RegionClass::Region1),
        (conj(&m.region2, tol), RegionClass::Region2),
        (conj(&m.region3, tol), RegionClass::Region3),
    ];
    if t.iter().any(|(v, _)| *v == Tri::Maybe) {
        return Some(RegionClass::Border);
    }
    let yes: Vec<RegionClass> = t
        .iter()
        .filter(|(v, _)| *v == Tri::Yes)
        .map(|x| x.1)
        .collect();
    match yes.len() {
        0 => Some(RegionClass::NoSingularities),
        1 => Some(yes[0]),
        _ => None,
    }
}

/// Lidov–Ziglin region of the parameters.
pub fn classify_region(p: &LZParams) -> Result<RegionClass> {
    p.validate()?;
    let (a, b) = (p.alpha_hat, p.beta_hat);
    let overlap = || Error::Consistency(format!("regions overlap at {p}"));
    if (a + b - 1.0).abs() < BORDER_TOL {
        let lo = label(&margins_for_branch(p, true), BORDER_TOL).ok_or_else(overlap)?;
        let hi = label(&margins_for_branch(p, false), BORDER_TOL).ok_or_else(overlap)?;
        return Ok(if lo == hi { lo } else { RegionClass::Border });
    }
    label(&region_margins(p), BORDER_TOL).ok_or_else(overlap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_region1() {
        let p = LZParams::new(0.5, 0.2).unwrap();
        assert_eq!(classify_region(&p).unwrap(), RegionClass::Region1);
    }

    #[test]
    fn special_point_is_region3() {
        let r2 = 2f64.sqrt();
        let p = LZParams::new(
            (13.0 / 60.0 - r2 / 10.0).sqrt(),
            (13.0 / 60.0 + r2 / 5.0).sqrt(),
        )
        .unwrap();
        assert_eq!(classify_region(&p).unwrap(), RegionClass::Region3);
    }

    #[test]
    fn border_detected_on_region1_edge() {
        // 3β̂² + α̂² = 1 exactly
        let b: f64 = 0.2;
        let a = (1.0 - 3.0 * b * b).sqrt();
        let p = LZParams::new(a, b).unwrap();
        assert_eq!(classify_region(&p).unwrap(), RegionClass::Border);
    }

    #[test]
    fn far_from_everything_has_no_singularities() {
        // small β̂ > α̂ with α̂ + β̂ < 1 has no critical points
        let p = LZParams::new(0.1, 0.15).unwrap();
        let m = region_margins(&p);
        assert!(m.min_abs() > 0.0);
        let lab = classify_region(&p).unwrap();
        assert!(matches!(
            lab,
            RegionClass::NoSingularities | RegionClass::Region2
        ));
    }

    #[test]
    fn regions_disjoint_on_grid() {
        for i in 1..80 {
            for j in 1..80 {
                let (a, b) = (i as f64 / 50.0, j as f64 / 50.0);
                if (a - b).abs() >= 1.0 || (a - b).abs() < 1e-9 {
                    continue;
                }
                let p = LZParams::new(a, b).unwrap();
                assert!(classify_region(&p).is_ok(), "{p}");
            }
        }
    }
}
