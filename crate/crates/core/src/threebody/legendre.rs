//! Legendre expansion of the perturbing function in `|Q1|/|Q2|`.

use super::{JacobiState, MassSystem};
use crate::error::{domain, Result};

/// `σ_n = σ0^{n−1} + (−1)^n σ1^{n−1}`.
pub fn sigma_n(ms: &MassSystem, n: u32) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    ms.sigma0.powi(n as i32 - 1) + sign * ms.sigma1.powi(n as i32 - 1)
}

/// `P_n(x)` by Bonnet's recursion.
pub fn legendre_p(n: u32, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = x;
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn geometry(s: &JacobiState) -> (f64, f64, f64) {
    let r1 = s.inner.q.norm();
    let r2 = s.outer.q.norm();
    let cz = (s.inner.q.dot(&s.outer.q) / (r1 * r2)).clamp(-1.0, 1.0);
    (r1, r2, cz)
}

fn check_convergence(s: &JacobiState, ms: &MassSystem) -> Result<(f64, f64, f64)> {
    let (r1, r2, cz) = geometry(s);
    let smax = ms.sigma0.max(ms.sigma1);
    if !(r1 > 0.0 && r2 > 0.0) || r1 / r2 > 1.0 / smax {
        return domain(format!(
            "Legendre series needs |Q1|/|Q2| <= 1/max(sigma0, sigma1), got {}",
            r1 / r2
        ));
    }
    Ok((r1, r2, cz))
}

/// Single term `−μ1 m2 σ_n P_n(cos ζ) |Q1|^n / |Q2|^{n+1}`.
pub fn legendre_term(s: &JacobiState, ms: &MassSystem, n: u32) -> Result<f64> {
    let (r1, r2, cz) = check_convergence(s, ms)?;
    Ok(
        -ms.mu1 * ms.m2 * sigma_n(ms, n) * legendre_p(n, cz) * r1.powi(n as i32)
            / r2.powi(n as i32 + 1),
    )
}

/// Partial sum `n = 2..=n_max` of the expansion.
pub fn f_pert_legendre(s: &JacobiState, ms: &MassSystem, n_max: u32) -> Result<f64> {
    let (r1, r2, cz) = check_convergence(s, ms)?;
    let rho = r1 / r2;
    let (mut p0, mut p1) = (1.0, cz);
    let mut pw = rho / r2;
    let mut sum = 0.0;
    for k in 1..n_max {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * cz * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        pw *= rho;
        sum += sigma_n(ms, k + 1) * p1 * pw;
    }
    Ok(-ms.mu1 * ms.m2 * sum)
}

/// Upper bound for `|F_pert − partial(n_max)|` using `|P_n| ≤ 1`.
pub fn legendre_tail_bound(s: &JacobiState, ms: &MassSystem, n_max: u32) -> Result<f64> {
    let (r1, r2, _) = check_convergence(s, ms)?;
    let rho = r1 / r2;
    let mut b = 0.0;
    for sig in [ms.sigma0, ms.sigma1] {
        let q = sig * rho;
        if q >= 1.0 {
            return Ok(f64::INFINITY);
        }
        b += q.powi(n_max as i32 + 1) / (sig * (1.0 - q));
    }
    Ok(ms.mu1 * ms.m2 * b / r2)
}
