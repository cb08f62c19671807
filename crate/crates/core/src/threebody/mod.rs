//! The spatial three-body problem in Jacobi coordinates.
//!
//! `F = F_Kep + F_pert` with `F_Kep` the sum of two fictitious Kepler
//! problems and `F_pert` the interaction remainder.

mod integrator;
mod legendre;

pub use integrator::{
    integrate, laplace_orbit_summary, write_trajectory_csv, IntegratorConfig, Sample, SplitOrder,
    Trajectory, TRAJECTORY_CSV_HEADER,
};
pub use legendre::{f_pert_legendre, legendre_p, legendre_tail_bound, legendre_term, sigma_n};

use crate::error::{domain, Error, Result};
use crate::kepler::{cartesian_to_elements, CartesianPair, DelaunayElements, GravParams};
use crate::Vec3;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

/// The three masses and the derived mass constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct MassSystem {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub big_m1: f64,
    pub big_m2: f64,
    pub mu_quad: f64,
}

impl MassSystem {
    pub fn new(m0: f64, m1: f64, m2: f64) -> Result<Self> {
        if !(m0 > 0.0 && m1 > 0.0 && m2 > 0.0) || ![m0, m1, m2].iter().all(|m| m.is_finite()) {
            return domain(format!("masses must be positive, got ({m0}, {m1}, {m2})"));
        }
        let big_m1 = m0 + m1;
        let big_m2 = big_m1 + m2;
        Ok(Self {
            m0,
            m1,
            m2,
            sigma0: m0 / big_m1,
            sigma1: m1 / big_m1,
            mu1: m0 * m1 / big_m1,
            mu2: big_m1 * m2 / big_m2,
            big_m1,
            big_m2,
            mu_quad: m0 * m1 * m2 / big_m1,
        })
    }

    pub fn inner(&self) -> GravParams {
        GravParams {
            mu: self.mu1,
            m: self.big_m1,
        }
    }

    pub fn outer(&self) -> GravParams {
        GravParams {
            mu: self.mu2,
            m: self.big_m2,
        }
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.m0, self.m1, self.m2]
    }
}

impl TryFrom<[f64; 3]> for MassSystem {
    type Error = Error;
    fn try_from(m: [f64; 3]) -> Result<Self> {
        Self::new(m[0], m[1], m[2])
    }
}

impl From<MassSystem> for [f64; 3] {
    fn from(ms: MassSystem) -> Self {
        ms.masses()
    }
}

/// Jacobi variables after reduction by translations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiState {
    pub inner: CartesianPair,
    pub outer: CartesianPair,
}

impl JacobiState {
    pub fn new(inner: CartesianPair, outer: CartesianPair) -> Self {
        Self { inner, outer }
    }

    /// Realize a state from Delaunay elements of both Kepler problems.
    pub fn from_elements(
        el1: &DelaunayElements,
        el2: &DelaunayElements,
        ms: &MassSystem,
    ) -> Result<Self> {
        Ok(Self {
            inner: crate::kepler::elements_to_cartesian(el1, &ms.inner())?,
            outer: crate::kepler::elements_to_cartesian(el2, &ms.outer())?,
        })
    }

    /// Delaunay elements of both Kepler problems in the current frame.
    pub fn to_elements(&self, ms: &MassSystem) -> Result<(DelaunayElements, DelaunayElements)> {
        Ok((
            cartesian_to_elements(&self.inner, &ms.inner())?,
            cartesian_to_elements(&self.outer, &ms.outer())?,
        ))
    }

    /// Mutual distances `(|Q1|, |Q2 − σ0 Q1|, |Q2 + σ1 Q1|)`.
    pub fn separations(&self, ms: &MassSystem) -> (f64, f64, f64) {
        let q1 = self.inner.q;
        let q2 = self.outer.q;
        (
            q1.norm(),
            (q2 - q1 * ms.sigma0).norm(),
            (q2 + q1 * ms.sigma1).norm(),
        )
    }

    fn check_collision(&self, ms: &MassSystem) -> Result<()> {
        let (r01, r12, r02) = self.separations(ms);
        if !(r01 > 0.0 && r12 > 0.0 && r02 > 0.0 && self.outer.q.norm() > 0.0) {
            return domain("collision configuration");
        }
        Ok(())
    }

    /// Applies a rotation to every vector.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self {
            inner: CartesianPair::new(r * self.inner.q, r * self.inner.p),
            outer: CartesianPair::new(r * self.outer.q, r * self.outer.p),
        }
    }

    /// Rotates into the Laplace frame (total angular momentum along `+z`).
    pub fn to_laplace_frame(&self) -> Result<Self> {
        let c = self.inner.angular_momentum() + self.outer.angular_momentum();
        Ok(self.rotated(&laplace_rotation(&c)?))
    }
}

/// Barycentric bookkeeping dropped by the reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiFrame {
    pub state: JacobiState,
    pub total_momentum: Vec3,
    pub centre_of_mass: Vec3,
}

/// Jacobi coordinates of an inertial configuration.
pub fn jacobi_from_inertial(q: &[Vec3; 3], p: &[Vec3; 3], ms: &MassSystem) -> Result<JacobiFrame> {
    if (q[0] - q[1]).norm() == 0.0 || (q[0] - q[2]).norm() == 0.0 || (q[1] - q[2]).norm() == 0.0 {
        return domain("two bodies coincide");
    }
    let (s0, s1) = (ms.sigma0, ms.sigma1);
    let total = p[0] + p[1] + p[2];
    let p1 = p[1] * s0 - p[0] * s1;
    let p2 = (p[2] * ms.big_m1 - (p[0] + p[1]) * ms.m2) / ms.big_m2;
    let q1 = q[1] - q[0];
    let q2 = q[2] - q[0] * s0 - q[1] * s1;
    let com = (q[0] * ms.m0 + q[1] * ms.m1 + q[2] * ms.m2) / ms.big_m2;
    Ok(JacobiFrame {
        state: JacobiState::new(CartesianPair::new(q1, p1), CartesianPair::new(q2, p2)),
        total_momentum: total,
        centre_of_mass: com,
    })
}

/// Inverse of [`jacobi_from_inertial`].
pub fn inertial_from_jacobi(fr: &JacobiFrame, ms: &MassSystem) -> ([Vec3; 3], [Vec3; 3]) {
    let s = &fr.state;
    let bary = fr.centre_of_mass - s.outer.q * (ms.m2 / ms.big_m2);
    let q0 = bary - s.inner.q * ms.sigma1;
    let q1 = bary + s.inner.q * ms.sigma0;
    let q2 = bary + s.outer.q;
    let p2 = fr.total_momentum * (ms.m2 / ms.big_m2) + s.outer.p;
    let inner_sum = fr.total_momentum * (ms.big_m1 / ms.big_m2) - s.outer.p;
    let p1 = inner_sum * ms.sigma1 + s.inner.p;
    let p0 = inner_sum * ms.sigma0 - s.inner.p;
    ([q0, q1, q2], [p0, p1, p2])
}

/// Newtonian energy in the inertial chart.
pub fn hamiltonian_inertial(q: &[Vec3; 3], p: &[Vec3; 3], ms: &MassSystem) -> f64 {
    let m = ms.masses();
    let kin: f64 = (0..3).map(|i| p[i].norm_squared() / (2.0 * m[i])).sum();
    let pot = m[0] * m[1] / (q[0] - q[1]).norm()
        + m[0] * m[2] / (q[0] - q[2]).norm()
        + m[1] * m[2] / (q[1] - q[2]).norm();
    kin - pot
}

/// `1/|a − b| − 1/|a|` without cancellation, for `b` small against `a`.
#[inline]
fn inv_diff(a: Vec3, b: Vec3) -> (f64, f64) {
    let d = a - b;
    let ra = a.norm();
    let rd = d.norm();
    // |a|² − |a−b|² = 2a·b − |b|²
    let num = 2.0 * a.dot(&b) - b.norm_squared();
    (num / (ra * rd * (ra + rd)), rd)
}

/// Exact perturbing function.
pub fn f_pert_exact(s: &JacobiState, ms: &MassSystem) -> Result<f64> {
    s.check_collision(ms)?;
    Ok(f_pert_unchecked(s.inner.q, s.outer.q, ms))
}

#[inline]
pub(crate) fn f_pert_unchecked(q1: Vec3, q2: Vec3, ms: &MassSystem) -> f64 {
    let (t1, _) = inv_diff(q2, q1 * ms.sigma0);
    let (t0, _) = inv_diff(q2, -q1 * ms.sigma1);
    -ms.m1 * ms.m2 * t1 - ms.m0 * ms.m2 * t0
}

/// Gradient `(∂F_pert/∂Q1, ∂F_pert/∂Q2)`.
pub fn f_pert_gradient(q1: Vec3, q2: Vec3, ms: &MassSystem) -> (Vec3, Vec3) {
    let d1 = q2 - q1 * ms.sigma0;
    let d0 = q2 + q1 * ms.sigma1;
    let a1 = ms.m1 * ms.m2 / d1.norm().powi(3);
    let a0 = ms.m0 * ms.m2 / d0.norm().powi(3);
    let a2 = ms.big_m1 * ms.m2 / q2.norm().powi(3);
    let g1 = d1 * (-a1 * ms.sigma0) + d0 * (a0 * ms.sigma1);
    let g2 = d1 * a1 + d0 * a0 - q2 * a2;
    (g1, g2)
}

/// Keplerian part `F_Kep`.
pub fn hamiltonian_kepler(s: &JacobiState, ms: &MassSystem) -> f64 {
    s.inner.energy(&ms.inner()) + s.outer.energy(&ms.outer())
}

/// Full Hamiltonian `F_Kep + F_pert`.
pub fn hamiltonian_full(s: &JacobiState, ms: &MassSystem) -> Result<f64> {
    Ok(hamiltonian_kepler(s, ms) + f_pert_exact(s, ms)?)
}

/// Angular-momentum bookkeeping of a Jacobi state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomenta {
    pub c1: Vec3,
    pub c2: Vec3,
    pub c: Vec3,
    pub c_norm: f64,
    pub g1: f64,
    pub g2: f64,
    /// Components of `C1`, `C2` along `C` (vertical components in the Laplace frame).
    pub h1: f64,
    pub h2: f64,
}

pub fn angular_momenta(s: &JacobiState) -> Result<AngularMomenta> {
    let c1 = s.inner.angular_momentum();
    let c2 = s.outer.angular_momentum();
    let c = c1 + c2;
    let cn = c.norm();
    if !(cn > 1e-300) {
        return Err(Error::Degenerate("total angular momentum vanishes".into()));
    }
    let z = c / cn;
    Ok(AngularMomenta {
        c1,
        c2,
        c,
        c_norm: cn,
        g1: c1.norm(),
        g2: c2.norm(),
        h1: c1.dot(&z),
        h2: c2.dot(&z),
    })
}

/// Rotation taking `c` to the `+z` axis; the new `x` axis is the node of the
/// Laplace plane on the old `xy` plane (old `x` when `c` is already vertical).
pub fn laplace_rotation(c: &Vec3) -> Result<Matrix3<f64>> {
    let n = c.norm();
    if !(n > 1e-300) {
        return Err(Error::Degenerate("total angular momentum vanishes".into()));
    }
    let z = c / n;
    let node = Vec3::z().cross(&z);
    let x = if node.norm() < 1e-14 {
        // keep the handedness when c points along −z
        if z.z > 0.0 {
            Vec3::x()
        } else {
            -Vec3::x()
        }
    } else {
        node.normalize()
    };
    let y = z.cross(&x);
    Ok(Matrix3::from_rows(&[
        x.transpose(),
        y.transpose(),
        z.transpose(),
    ]))
}

/// Bounds defining the asynchronous region of the lunar regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsynchronousBounds {
    pub e1_lo: f64,
    pub e1_hi: f64,
    pub e2_lo: f64,
    pub e2_hi: f64,
    pub a1_lo: f64,
    pub a1_hi: f64,
    pub alpha_max: f64,
}

impl AsynchronousBounds {
    pub fn new(
        (e1_lo, e1_hi): (f64, f64),
        (e2_lo, e2_hi): (f64, f64),
        (a1_lo, a1_hi): (f64, f64),
        ms: &MassSystem,
    ) -> Result<Self> {
        for (lo, hi) in [(e1_lo, e1_hi), (e2_lo, e2_hi)] {
            if !(0.0 < lo && lo < hi && hi < 1.0) {
                return domain(format!(
                    "eccentricity bounds need 0 < lo < hi < 1, got ({lo}, {hi})"
                ));
            }
        }
        if !(0.0 < a1_lo && a1_lo < a1_hi) {
            return domain(format!(
                "semi-major axis bounds need 0 < lo < hi, got ({a1_lo}, {a1_hi})"
            ));
        }
        let w = 1.0 - e2_hi;
        let alpha_max = (w / 80.0)
            .min(w / (2.0 * ms.sigma0))
            .min(w / (2.0 * ms.sigma1));
        Ok(Self {
            e1_lo,
            e1_hi,
            e2_lo,
            e2_hi,
            a1_lo,
            a1_hi,
            alpha_max,
        })
    }

    /// Whether a pair of orbits lies in the region.
    pub fn contains(&self, e1: f64, e2: f64, a1: f64, alpha: f64) -> bool {
        (self.e1_lo..=self.e1_hi).contains(&e1)
            && (self.e2_lo..=self.e2_hi).contains(&e2)
            && (self.a1_lo..=self.a1_hi).contains(&a1)
            && alpha > 0.0
            && alpha <= self.alpha_max
    }
}

/// Largest apocentre-to-pericentre ratio weighted by `max σ`; the Legendre
/// expansion converges along the whole orbit pair iff this is below one.
pub fn expansion_ratio(alpha: f64, e1: f64, e2: f64, ms: &MassSystem) -> f64 {
    ms.sigma0.max(ms.sigma1) * alpha * (1.0 + e1) / (1.0 - e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-s..s),
            rng.random_range(-s..s),
            rng.random_range(-s..s),
        )
    }

    #[test]
    fn equal_masses_sigma() {
        let ms = MassSystem::new(1.0, 1.0, 0.3).unwrap();
        assert_eq!(ms.sigma0, 0.5);
        assert_eq!(ms.sigma1, 0.5);
        assert!((1.0 / ms.sigma0 - (1.0 + ms.m1 / ms.m0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(MassSystem::new(1.0, 0.0, 1.0).is_err());
        assert!(MassSystem::new(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn zero_outer_momentum_gives_p1() {
        let ms = MassSystem::new(1.0, 0.5, 0.2).unwrap();
        let q = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 9.0, 1.0),
        ];
        let p = [
            Vec3::new(0.0, -0.3, 0.0),
            Vec3::new(0.0, 0.3, 0.0),
            Vec3::zeros(),
        ];
        let fr = jacobi_from_inertial(&q, &p, &ms).unwrap();
        assert!((fr.state.inner.p - p[1]).norm() < 1e-15);
    }

    #[test]
    fn jacobi_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ms = MassSystem::new(1.0, 0.3, 0.7).unwrap();
        for _ in 0..100 {
            let q = [
                rand_vec(&mut rng, 2.0),
                rand_vec(&mut rng, 2.0),
                rand_vec(&mut rng, 2.0),
            ];
            let mut p = [
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0),
            ];
            p[0] = -p[1] - p[2];
            let fr = jacobi_from_inertial(&q, &p, &ms).unwrap();
            assert!(fr.total_momentum.norm() < 1e-15);
            // zero total momentum: the simplified definitions hold
            assert!((fr.state.inner.p - (p[1] + p[2] * ms.sigma1)).norm() < 1e-14);
            assert!((fr.state.outer.p - p[2]).norm() < 1e-14);
            let (q2, p2) = inertial_from_jacobi(&fr, &ms);
            for i in 0..3 {
                assert!((q2[i] - q[i]).norm() < 1e-13);
                assert!((p2[i] - p[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn hamiltonian_charts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ms = MassSystem::new(1.0, 0.4, 0.9).unwrap();
        for _ in 0..50 {
            let q = [
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 5.0),
            ];
            let mut p = [
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0),
                rand_vec(&mut rng, 1.0),
            ];
            p[0] = -p[1] - p[2];
            let fr = jacobi_from_inertial(&q, &p, &ms).unwrap();
            let hj = hamiltonian_full(&fr.state, &ms).unwrap();
            let hi = hamiltonian_inertial(&q, &p, &ms);
            assert!((hj - hi).abs() < 1e-12 * hi.abs().max(1.0), "{hj} vs {hi}");
        }
    }

    #[test]
    fn small_inner_separation_kills_fpert() {
        let ms = MassSystem::new(1.0, 0.6, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..6 {
            let r = 10f64.powi(-k);
            let s = JacobiState::new(
                CartesianPair::new(Vec3::new(r, 0.0, 0.0), Vec3::zeros()),
                CartesianPair::new(Vec3::new(0.0, 3.0, 0.0), Vec3::zeros()),
            );
            let f = f_pert_exact(&s, &ms).unwrap().abs();
            assert!(f < prev);
            prev = f;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ms = MassSystem::new(1.0, 0.3, 0.8).unwrap();
        let q1 = Vec3::new(0.4, -0.2, 0.3);
        let q2 = Vec3::new(-1.0, 2.0, 0.5);
        let (g1, g2) = f_pert_gradient(q1, q2, &ms);
        let h = 1e-6;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let d1 =
                (f_pert_unchecked(q1 + e, q2, &ms) - f_pert_unchecked(q1 - e, q2, &ms)) / (2.0 * h);
            let d2 =
                (f_pert_unchecked(q1, q2 + e, &ms) - f_pert_unchecked(q1, q2 - e, &ms)) / (2.0 * h);
            assert!((d1 - g1[k]).abs() < 1e-8);
            assert!((d2 - g2[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn coplanar_state_h_equals_g() {
        let ms = MassSystem::new(1.0, 0.5, 0.1).unwrap();
        let s = JacobiState::new(
            CartesianPair::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.3, 0.0)),
            CartesianPair::new(Vec3::new(0.0, 5.0, 0.0), Vec3::new(-0.2, 0.05, 0.0)),
        );
        let am = angular_momenta(&s).unwrap();
        assert_eq!(am.h1, am.g1);
        assert_eq!(am.h2, am.g2);
        let _ = ms;
    }

    #[test]
    fn zero_angular_momentum_is_degenerate() {
        let s = JacobiState::new(
            CartesianPair::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.3, 0.0)),
            CartesianPair::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, -0.3, 0.0)),
        );
        assert!(matches!(angular_momenta(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn laplace_rotation_is_proper() {
        for c in [
            Vec3::new(0.3, -0.2, 1.0),
            Vec3::new(0.0, 0.0, -2.0),
            Vec3::new(1.0, 0.0, 0.0),
        ] {
            let r = laplace_rotation(&c).unwrap();
            assert!((r.determinant() - 1.0).abs() < 1e-14);
            let rc = r * c;
            assert!(rc.x.abs() < 1e-14 && rc.y.abs() < 1e-14 && rc.z > 0.0);
        }
    }

    #[test]
    fn alpha_max_formula() {
        let ms = MassSystem::new(1.0, 1.0, 1.0).unwrap();
        let b = AsynchronousBounds::new((0.1, 0.5), (0.1, 0.6), (0.5, 2.0), &ms).unwrap();
        assert!((b.alpha_max - 0.4 / 80.0).abs() < 1e-16);
        assert!(b.contains(0.2, 0.3, 1.0, 0.004));
        assert!(!b.contains(0.2, 0.3, 1.0, 0.006));
        assert!(AsynchronousBounds::new((0.5, 0.1), (0.1, 0.6), (0.5, 2.0), &ms).is_err());
    }
}
