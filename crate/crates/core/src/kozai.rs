//! Kozai–Lidov demonstration: integrate the full problem from a point of
//! the quadrupolar portrait and read off the secular behaviour of `g1`.

use crate::actionangle::{branch_level_range, frequencies_no_torsion, Branch};
use crate::error::{domain, Result};
use crate::kepler::orbital_period;
use crate::numerics::{correlation, TWO_PI};
use crate::quadrupolar::{k_coefficient, LZParams, LZPoint};
use crate::secular::PairGeometry;
use crate::threebody::{
    angular_momenta, integrate, laplace_orbit_summary, IntegratorConfig, JacobiState, MassSystem,
    SplitOrder, Trajectory,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Where the initial condition sits in the quadrupolar portrait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KozaiStart {
    /// Inside the separatrix around B.
    Libration,
    /// On the circulating family next to `δ_min`.
    Circulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KozaiConfig {
    pub alpha: f64,
    pub masses: [f64; 3],
    /// Integration window in outer orbital periods.
    pub periods: f64,
    pub e2: f64,
    /// Mutual inclination (degrees) the configuration would have with a circular inner orbit;
    /// fixes `α̂` through `C`.
    pub inclination_deg: f64,
    pub start: KozaiStart,
    /// Position within the branch's level range (0 = degenerate end).
    pub level_fraction: f64,
    pub steps_per_inner_period: usize,
    pub seed: u64,
}

impl Default for KozaiConfig {
    fn default() -> Self {
        Self {
            alpha: 0.08,
            masses: [1.0, 0.8, 0.3],
            periods: 2000.0,
            e2: 0.2,
            inclination_deg: 75.0,
            start: KozaiStart::Libration,
            level_fraction: 0.3,
            steps_per_inner_period: 64,
            seed: 0,
        }
    }
}

/// Initial data derived from a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KozaiSetup {
    pub params: LZParams,
    pub point: LZPoint,
    pub geometry: PairGeometry,
    /// Secular period predicted by the quadrupolar flow (physical time).
    pub predicted_period: f64,
    pub inner_period: f64,
    pub outer_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KozaiReport {
    pub setup: KozaiSetup,
    pub librates: bool,
    pub verdict: String,
    /// Range of the smoothed, unwrapped `g1`.
    pub g1_range: f64,
    pub g1_mean: f64,
    pub e1_peak_to_peak: f64,
    pub e1_i1_correlation: f64,
    pub max_g2_variation: f64,
    pub g2_initial: f64,
    pub max_relative_energy_error: f64,
    pub t_end: f64,
    pub window_secular_periods: f64,
    pub truncated: Option<String>,
}

fn seeded_anomalies(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (rng.random_range(0.0..TWO_PI), rng.random_range(0.0..TWO_PI))
}

/// Builds the initial condition of a demonstration run.
pub fn kozai_setup(cfg: &KozaiConfig) -> Result<KozaiSetup> {
    let [m0, m1, m2] = cfg.masses;
    let ms = MassSystem::new(m0, m1, m2)?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {}", cfg.alpha));
    }
    if !(0.0..1.0).contains(&cfg.e2) {
        return domain(format!("e2 must lie in [0, 1), got {}", cfg.e2));
    }
    if !(cfg.level_fraction > 0.0 && cfg.level_fraction < 1.0) {
        return domain(format!(
            "level_fraction must lie in (0, 1), got {}",
            cfg.level_fraction
        ));
    }
    let (a1, a2) = (cfg.alpha, 1.0);
    let (gp1, gp2) = (ms.inner(), ms.outer());
    let l1 = gp1.circular_momentum(a1);
    let beta = gp2.circular_momentum(a2) * (1.0 - cfg.e2 * cfg.e2).sqrt() / l1;
    let ci = cfg.inclination_deg.to_radians().cos();
    let alpha_hat = (1.0 + beta * beta + 2.0 * beta * ci).sqrt();
    let p = LZParams::new(alpha_hat, beta)?;
    let (branch, sec_omega) = match cfg.start {
        KozaiStart::Libration => (Branch::Libration, FRAC_PI_2),
        KozaiStart::Circulation => (Branch::CircMin, 0.0),
    };
    let range = branch_level_range(&p, branch)?;
    let level = range.at(cfg.level_fraction);
    let point = crate::actionangle::start_point_for(level, &p, branch)?;
    debug_assert_eq!(point.omega, sec_omega);
    let (nu1, _) = frequencies_no_torsion(level, &p, branch)?;
    let delta = point.delta;
    let e1 = (1.0 - delta * delta).max(0.0).sqrt();
    let g1 = delta * l1;
    let g2 = beta * l1;
    let c = alpha_hat * l1;
    let cos_mut = ((c * c - g1 * g1 - g2 * g2) / (2.0 * g1 * g2)).clamp(-1.0, 1.0);
    let (la1, la2) = seeded_anomalies(cfg.seed);
    let geometry = PairGeometry {
        a1,
        e1,
        g1: point.omega,
        a2,
        e2: cfg.e2,
        g2: 0.0,
        mutual_inclination: cos_mut.acos(),
        h: 0.0,
        l1: la1,
        l2: la2,
    };
    let (el1, el2) = geometry.to_elements(&ms)?;
    let k = k_coefficient(&ms, &el1, &el2);
    let scale = cfg.alpha.powi(3) * k / l1;
    Ok(KozaiSetup {
        params: p,
        point,
        geometry,
        predicted_period: TWO_PI / nu1 / scale,
        inner_period: orbital_period(&gp1, a1),
        outer_period: orbital_period(&gp2, a2),
    })
}

/// Centered moving average with an odd window.
fn smooth(xs: &[f64], w: usize) -> Vec<f64> {
    let h = w / 2;
    if xs.len() <= 2 * h {
        return Vec::new();
    }
    let mut prefix = vec![0.0; xs.len() + 1];
    for (i, x) in xs.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    (h..xs.len() - h)
        .map(|i| (prefix[i + h + 1] - prefix[i - h]) / (2 * h + 1) as f64)
        .collect()
}

fn unwrap(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut off = 0.0;
    let mut prev = f64::NAN;
    for &x in xs {
        if prev.is_finite() {
            let d = x + off - prev;
            off -= TWO_PI * (d / TWO_PI).round();
        }
        prev = x + off;
        out.push(prev);
    }
    out
}

/// Secular diagnostics of a finished trajectory.
pub fn analyse(setup: &KozaiSetup, traj: &Trajectory, ms: &MassSystem) -> Result<KozaiReport> {
    let n = traj.samples.len();
    if n < 8 {
        return domain("trajectory too short to analyse");
    }
    let (mut e1, mut i1, mut g1, mut g2n) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for s in &traj.samples {
        let el = laplace_orbit_summary(&s.state, ms)?;
        e1.push(el[1]);
        i1.push(el[2]);
        g1.push(el[3]);
        g2n.push(angular_momenta(&s.state)?.g2);
    }
    if g1.iter().any(|g| !g.is_finite()) {
        return domain("g1 undefined along the run (circular or planar inner orbit)");
    }
    let dt_sample = traj.samples[1].t - traj.samples[0].t;
    let w = ((setup.outer_period / dt_sample).round() as usize) | 1;
    let g1s = smooth(&unwrap(&g1), w);
    let e1s = smooth(&e1, w);
    let i1s = smooth(&i1, w);
    if g1s.len() < 4 {
        return domain("trajectory shorter than the smoothing window");
    }
    let (gmin, gmax) = g1s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let g1_range = gmax - gmin;
    let librates = g1_range < TWO_PI;
    let g1_mean = g1s.iter().sum::<f64>() / g1s.len() as f64;
    let (emin, emax) = e1s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let g20 = g2n[0];
    let max_g2 = g2n.iter().map(|g| (g - g20).abs()).fold(0.0, f64::max);
    let t_end = traj.samples[n - 1].t;
    Ok(KozaiReport {
        setup: *setup,
        librates,
        verdict: if librates {
            "libration".into()
        } else {
            "circulation".into()
        },
        g1_range,
        g1_mean,
        e1_peak_to_peak: emax - emin,
        e1_i1_correlation: correlation(&e1s, &i1s),
        max_g2_variation: max_g2,
        g2_initial: g20,
        max_relative_energy_error: traj.max_relative_energy_error(),
        t_end,
        window_secular_periods: t_end / setup.predicted_period,
        truncated: traj.truncated.clone(),
    })
}

/// Runs the demonstration, returning the raw trajectory and the report.
pub fn demo_kozai(cfg: &KozaiConfig) -> Result<(Trajectory, KozaiReport)> {
    let setup = kozai_setup(cfg)?;
    let [m0, m1, m2] = cfg.masses;
    run_setup(&setup, &MassSystem::new(m0, m1, m2)?, cfg)
}

/// Integrates a prepared initial condition with the masses `ms`, which need not
/// be the ones the setup was derived from (control runs swap in a light perturber).
pub fn run_setup(
    setup: &KozaiSetup,
    ms: &MassSystem,
    cfg: &KozaiConfig,
) -> Result<(Trajectory, KozaiReport)> {
    let ms = *ms;
    let (el1, el2) = setup.geometry.to_elements(&ms)?;
    let s0 = JacobiState::from_elements(&el1, &el2, &ms)?;
    if cfg.steps_per_inner_period < 8 {
        return domain("need at least 8 steps per inner period");
    }
    let dt = setup.inner_period / cfg.steps_per_inner_period as f64;
    if !(cfg.periods > 0.0) {
        return domain(format!("periods must be positive, got {}", cfg.periods));
    }
    let steps = (cfg.periods * setup.outer_period / dt).ceil() as usize;
    let icfg = IntegratorConfig::new(dt, steps)
        .with_order(SplitOrder::Fourth)
        .with_sampling(cfg.steps_per_inner_period);
    let traj = integrate(&s0, &ms, &icfg)?;
    let report = analyse(setup, &traj, &ms)?;
    Ok((traj, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_reproduces_portrait_point() {
        let cfg = KozaiConfig::default();
        let s = kozai_setup(&cfg).unwrap();
        let ms = MassSystem::new(1.0, 0.8, 0.3).unwrap();
        let (el1, el2) = s.geometry.to_elements(&ms).unwrap();
        let (p, pt) = LZParams::from_elements(&el1, &el2).unwrap();
        assert!((p.alpha_hat - s.params.alpha_hat).abs() < 1e-12);
        assert!((p.beta_hat - s.params.beta_hat).abs() < 1e-12);
        assert!((pt.delta - s.point.delta).abs() < 1e-12);
        assert!((pt.omega - s.point.omega).abs() < 1e-12);
        assert!(s.predicted_period > s.outer_period);
    }

    #[test]
    fn smoothing_and_unwrapping() {
        let xs: Vec<f64> = (0..100).map(|k| (0.3 * k as f64) % TWO_PI).collect();
        let u = unwrap(&xs);
        for (k, v) in u.iter().enumerate() {
            assert!((v - 0.3 * k as f64).abs() < 1e-12);
        }
        let s = smooth(&[1.0, 2.0, 3.0, 4.0, 5.0], 3);
        assert_eq!(s, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = KozaiConfig {
            alpha: 1.5,
            ..KozaiConfig::default()
        };
        assert!(kozai_setup(&cfg).is_err());
        let cfg = KozaiConfig {
            level_fraction: 1.0,
            ..KozaiConfig::default()
        };
        assert!(kozai_setup(&cfg).is_err());
    }
}
