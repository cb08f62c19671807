//! Fixed-step Wisdom–Holman splitting: exact Kepler drifts of both fictitious
//! bodies alternated with kicks from `F_pert`.

use super::{f_pert_gradient, hamiltonian_full, laplace_rotation, JacobiState, MassSystem};
use crate::error::{domain, Result};
use crate::kepler::{cartesian_to_elements, kepler_drift, CartesianPair, GravParams};
use crate::Vec3;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitOrder {
    /// Drift–kick–drift leapfrog.
    Second,
    /// Triple-jump composition of the leapfrog.
    #[default]
    Fourth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub order: SplitOrder,
    /// Store every `sample_every`-th step (the first and last are always kept).
    #[serde(default = "one")]
    pub sample_every: usize,
    /// Close-encounter threshold as a fraction of the inner semi-major axis.
    #[serde(default = "default_encounter")]
    pub encounter_factor: f64,
}

fn one() -> usize {
    1
}

fn default_encounter() -> f64 {
    1e-6
}

impl IntegratorConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            dt,
            steps,
            order: SplitOrder::Fourth,
            sample_every: 1,
            encounter_factor: default_encounter(),
        }
    }

    pub fn with_order(mut self, order: SplitOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_sampling(mut self, every: usize) -> Self {
        self.sample_every = every.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: JacobiState,
    pub energy: f64,
    pub c: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub steps_taken: usize,
    /// Why the run stopped early, if it did.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds the initial sample")
    }

    /// Largest `|F(t) − F(0)| / |F(0)|` over the samples.
    pub fn max_relative_energy_error(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| ((s.energy - e0) / e0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest component-wise drift of the total angular momentum.
    pub fn max_angular_momentum_error(&self) -> f64 {
        let c0 = self.samples[0].c;
        self.samples
            .iter()
            .map(|s| (s.c - c0).amax())
            .fold(0.0, f64::max)
    }
}

struct Stepper<'a> {
    ms: &'a MassSystem,
    gp1: GravParams,
    gp2: GravParams,
}

impl Stepper<'_> {
    fn drift(&self, s: &mut JacobiState, h: f64) -> Result<()> {
        s.inner = kepler_drift(&s.inner, &self.gp1, h)?;
        s.outer = kepler_drift(&s.outer, &self.gp2, h)?;
        Ok(())
    }

    fn kick(&self, s: &mut JacobiState, h: f64) {
        let (g1, g2) = f_pert_gradient(s.inner.q, s.outer.q, self.ms);
        s.inner.p -= g1 * h;
        s.outer.p -= g2 * h;
    }

    fn step(&self, s: &mut JacobiState, h: f64, order: SplitOrder) -> Result<()> {
        match order {
            SplitOrder::Second => {
                self.drift(s, 0.5 * h)?;
                self.kick(s, h);
                self.drift(s, 0.5 * h)
            }
            SplitOrder::Fourth => {
                let cbrt2 = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - cbrt2);
                let w0 = -cbrt2 * w1;
                self.drift(s, 0.5 * w1 * h)?;
                self.kick(s, w1 * h);
                self.drift(s, 0.5 * (w1 + w0) * h)?;
                self.kick(s, w0 * h);
                self.drift(s, 0.5 * (w0 + w1) * h)?;
                self.kick(s, w1 * h);
                self.drift(s, 0.5 * w1 * h)
            }
        }
    }

    fn encounter(&self, s: &JacobiState, factor: f64) -> Option<String> {
        let (r01, r12, r02) = s.separations(self.ms);
        let e = s.inner.energy(&self.gp1);
        if !(e < 0.0) {
            return Some(format!("inner orbit unbound (energy {e})"));
        }
        let a1 = -self.gp1.mu * self.gp1.m / (2.0 * e);
        let rmin = r01.min(r12).min(r02);
        (rmin < factor * a1)
            .then(|| format!("close encounter: separation {rmin:e} < {factor:e} a1"))
    }
}

fn sample(t: f64, s: &JacobiState, ms: &MassSystem) -> Sample {
    Sample {
        t,
        state: *s,
        energy: hamiltonian_full(s, ms).unwrap_or(f64::NAN),
        c: s.inner.angular_momentum() + s.outer.angular_momentum(),
    }
}

/// Integrates the full problem for `cfg.steps` steps of size `cfg.dt`.
///
/// A close encounter or an unbound orbit stops the run; the samples so far
/// are returned with the reason in [`Trajectory::truncated`].
pub fn integrate(s0: &JacobiState, ms: &MassSystem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return domain(format!("time step must be positive, got {}", cfg.dt));
    }
    let st = Stepper {
        ms,
        gp1: ms.inner(),
        gp2: ms.outer(),
    };
    if let Some(msg) = st.encounter(s0, cfg.encounter_factor) {
        return domain(msg);
    }
    let every = cfg.sample_every.max(1);
    let mut s = *s0;
    let mut samples = vec![sample(0.0, &s, ms)];
    let mut truncated = None;
    let mut taken = 0;
    for k in 1..=cfg.steps {
        if let Err(e) = st.step(&mut s, cfg.dt, cfg.order) {
            truncated = Some(e.to_string());
            break;
        }
        taken = k;
        if let Some(msg) = st.encounter(&s, cfg.encounter_factor) {
            samples.push(sample(k as f64 * cfg.dt, &s, ms));
            truncated = Some(msg);
            break;
        }
        if k % every == 0 || k == cfg.steps {
            samples.push(sample(k as f64 * cfg.dt, &s, ms));
        }
    }
    Ok(Trajectory {
        samples,
        steps_taken: taken,
        truncated,
    })
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "t,Q1x,Q1y,Q1z,P1x,P1y,P1z,Q2x,Q2y,Q2z,P2x,P2y,P2z,energy,Cx,Cy,Cz,a1,e1,i1,g1,a2,e2,i2,g2";

/// `(a, e, i, g)` of one Kepler problem in a frame whose `z` axis is `C`;
/// angles undefined by the chart come out as NaN.
pub(crate) fn orbit_summary(cp: &CartesianPair, gp: &GravParams) -> [f64; 4] {
    let r = cp.q.norm();
    let v = cp.p / gp.mu;
    let energy = 0.5 * v.norm_squared() - gp.m / r;
    let a = -gp.m / (2.0 * energy);
    let c = cp.q.cross(&v);
    let evec = v.cross(&c) / gp.m - cp.q / r;
    let i = (c.z / c.norm()).clamp(-1.0, 1.0).acos();
    let g = cartesian_to_elements(cp, gp)
        .map(|el| el.g)
        .unwrap_or(f64::NAN);
    [a, evec.norm(), i, g]
}

/// Laplace-frame `(a1, e1, i1, g1, a2, e2, i2, g2)` of a state.
pub fn laplace_orbit_summary(s: &JacobiState, ms: &MassSystem) -> Result<[f64; 8]> {
    let c = s.inner.angular_momentum() + s.outer.angular_momentum();
    let ls = s.rotated(&laplace_rotation(&c)?);
    let o1 = orbit_summary(&ls.inner, &ms.inner());
    let o2 = orbit_summary(&ls.outer, &ms.outer());
    Ok([o1[0], o1[1], o1[2], o1[3], o2[0], o2[1], o2[2], o2[3]])
}

/// Writes the trajectory as CSV; element columns refer to the Laplace plane.
pub fn write_trajectory_csv<W: Write>(
    mut w: W,
    traj: &Trajectory,
    ms: &MassSystem,
) -> std::io::Result<()> {
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for smp in &traj.samples {
        let s = &smp.state;
        let el = laplace_orbit_summary(s, ms).unwrap_or([f64::NAN; 8]);
        let mut row = vec![smp.t];
        for v in [s.inner.q, s.inner.p, s.outer.q, s.outer.p] {
            row.extend(v.iter().copied());
        }
        row.push(smp.energy);
        row.extend(smp.c.iter().copied());
        row.extend(el);
        let line: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::{orbital_period, DelaunayElements};

    fn lunar(ms: &MassSystem, alpha: f64) -> JacobiState {
        let el1 =
            DelaunayElements::from_classical(&ms.inner(), 1.0, 0.2, 0.3, 0.1, 0.5, 0.0).unwrap();
        let el2 =
            DelaunayElements::from_classical(&ms.outer(), 1.0 / alpha, 0.1, 0.9, 2.0, 1.0, 3.0)
                .unwrap();
        JacobiState::from_elements(&el1, &el2, ms).unwrap()
    }

    #[test]
    fn tiny_outer_mass_keeps_inner_elements() {
        let ms = MassSystem::new(1.0, 0.5, 1e-12).unwrap();
        let s0 = lunar(&ms, 0.1);
        let (e0, _) = s0.to_elements(&ms).unwrap();
        let p1 = orbital_period(&ms.inner(), 1.0);
        let traj = integrate(&s0, &ms, &IntegratorConfig::new(p1 / 37.0, 1000)).unwrap();
        let (e1, _) = traj.last().state.to_elements(&ms).unwrap();
        assert!((e1.big_l - e0.big_l).abs() < 1e-12);
        assert!((e1.big_g - e0.big_g).abs() < 1e-12);
        assert!((e1.big_h - e0.big_h).abs() < 1e-12);
        assert!((e1.g - e0.g).abs() < 1e-10);
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let ms = MassSystem::new(1.0, 0.5, 0.8).unwrap();
        let s0 = lunar(&ms, 0.1);
        let dt = orbital_period(&ms.inner(), 1.0) / 40.0;
        let cfg = IntegratorConfig::new(dt, 2000).with_sampling(2000);
        let fwd = integrate(&s0, &ms, &cfg).unwrap();
        let mut s = fwd.last().state;
        s.inner.p = -s.inner.p;
        s.outer.p = -s.outer.p;
        let back = integrate(&s, &ms, &cfg).unwrap().last().state;
        assert!((back.inner.q - s0.inner.q).amax() < 1e-9);
        assert!((back.outer.q - s0.outer.q).amax() < 1e-9);
        assert!((back.inner.p + s0.inner.p).amax() < 1e-9);
        assert!((back.outer.p + s0.outer.p).amax() < 1e-9);
    }

    #[test]
    fn fourth_order_beats_second_order() {
        let ms = MassSystem::new(1.0, 0.5, 0.8).unwrap();
        let s0 = lunar(&ms, 0.15);
        let dt = orbital_period(&ms.inner(), 1.0) / 20.0;
        let e2 = integrate(
            &s0,
            &ms,
            &IntegratorConfig::new(dt, 2000).with_order(SplitOrder::Second),
        )
        .unwrap()
        .max_relative_energy_error();
        let e4 = integrate(&s0, &ms, &IntegratorConfig::new(dt, 2000))
            .unwrap()
            .max_relative_energy_error();
        assert!(e4 < e2, "{e4} vs {e2}");
    }

    #[test]
    fn encounter_truncates() {
        let ms = MassSystem::new(1.0, 0.5, 0.8).unwrap();
        let s0 = lunar(&ms, 0.1);
        let mut cfg = IntegratorConfig::new(0.05, 100);
        cfg.encounter_factor = 0.9;
        // the inner pericentre 0.8 a1 is below the threshold
        let traj = integrate(&s0, &ms, &cfg);
        match traj {
            Ok(t) => assert!(t.truncated.is_some()),
            Err(e) => assert!(matches!(e, crate::Error::Domain(_))),
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let ms = MassSystem::new(1.0, 0.5, 0.8).unwrap();
        let s0 = lunar(&ms, 0.1);
        let traj = integrate(&s0, &ms, &IntegratorConfig::new(0.1, 3)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj, &ms).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1].split(',').count(), 25);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let ms = MassSystem::new(1.0, 0.5, 0.8).unwrap();
        assert!(integrate(&lunar(&ms, 0.1), &ms, &IntegratorConfig::new(0.0, 3)).is_err());
    }
}
